// SPDX-License-Identifier: Apache-2.0

#include "misocap/covariance.hpp"

#include <algorithm>
#include <cmath>

namespace misocap {

namespace {

// conj(h)/|h|; canonical phase 0 for a silent antenna so outputs stay
// deterministic (any phase yields the same rate when h_k = 0).
Complex unit_phase(Complex hk) {
    const double m = std::abs(hk);
    if (m == 0.0) return Complex(1.0, 0.0);
    return std::conj(hk) / m;
}

void require_powers(const std::vector<double>& p) {
    if (p.empty()) throw ValidationError("per-antenna powers: needs at least one entry");
    for (double v : p)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("per-antenna powers: entries must be finite and >= 0");
}

} // namespace

HermitianMatrix optimal_cov_sum_power(const ChannelVector& h, double total) {
    if (!(total >= 0.0) || !std::isfinite(total))
        throw ValidationError("optimal_cov_sum_power: total must be finite and >= 0");
    const double hnorm = std::sqrt(h.norm_sq());
    if (hnorm == 0.0)
        throw ValidationError("optimal_cov_sum_power: beam direction undefined for zero channel");
    const double scale = std::sqrt(total) / hnorm;
    std::vector<Complex> a(h.h.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::conj(h.h[k]) * scale;
    return HermitianMatrix::rank_one(a);
}

HermitianMatrix optimal_cov_per_antenna(const ChannelVector& h, const std::vector<double>& p) {
    require_powers(p);
    if (h.dim() != static_cast<int>(p.size()))
        throw ValidationError("optimal_cov_per_antenna: dimension mismatch");
    std::vector<Complex> a(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) a[k] = unit_phase(h.h[k]) * std::sqrt(p[k]);
    // Outer product of the phase-matched beam; exact budgets on the diagonal.
    return HermitianMatrix::rank_one_with_diagonal(a, p);
}

HermitianMatrix optimal_cov_ma(const std::vector<double>& p) {
    require_powers(p);
    return HermitianMatrix::diagonal(p);
}

BeamVector beam_weights_per_antenna(const ChannelVector& h, const std::vector<double>& p) {
    require_powers(p);
    if (h.dim() != static_cast<int>(p.size()))
        throw ValidationError("beam_weights_per_antenna: dimension mismatch");
    double total = 0.0;
    for (double v : p) total += v;
    if (total == 0.0)
        throw ValidationError("beam_weights_per_antenna: all budgets are zero");
    const double root_total = std::sqrt(total);
    BeamVector w;
    w.w.resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        w.w[k] = unit_phase(h.h[k]) * (std::sqrt(p[k]) / root_total);
    return w;
}

ConstraintReport check_constraint(const HermitianMatrix& q, const PowerConstraint& pc,
                                  double tol) {
    if (!(tol >= 0.0)) throw ValidationError("check_constraint: tol must be >= 0");

    ConstraintReport rep;
    const double tr = q.trace();
    const EigenDecomposition ed = eig_hermitian(q);
    rep.psd_deficit = std::max(0.0, -ed.eigenvalues.back() / std::max(1.0, tr));

    switch (pc.kind()) {
    case PowerConstraint::Kind::sum_power:
        rep.trace_excess = std::max(0.0, tr - pc.sum_budget());
        break;
    case PowerConstraint::Kind::per_antenna:
    case PowerConstraint::Kind::independent_ma: {
        const std::vector<double>& p = pc.budgets();
        if (q.dim() != static_cast<int>(p.size()))
            throw ValidationError("check_constraint: dimension mismatch");
        for (int i = 0; i < q.dim(); ++i)
            rep.diagonal_excess = std::max(rep.diagonal_excess, q(i, i).real() - p[i]);
        rep.diagonal_excess = std::max(0.0, rep.diagonal_excess);
        if (pc.kind() == PowerConstraint::Kind::independent_ma) {
            for (int i = 0; i < q.dim(); ++i)
                for (int j = i + 1; j < q.dim(); ++j)
                    rep.offdiagonal_mass = std::max(rep.offdiagonal_mass, std::abs(q(i, j)));
        }
        break;
    }
    }

    rep.worst_violation = std::max({rep.diagonal_excess, rep.trace_excess, rep.psd_deficit,
                                    rep.offdiagonal_mass});
    rep.satisfied = rep.worst_violation <= tol;
    return rep;
}

bool minor_relaxation_check(const HermitianMatrix& q, const std::vector<double>& p, double tol) {
    require_powers(p);
    if (!(tol >= 0.0)) throw ValidationError("minor_relaxation_check: tol must be >= 0");
    if (q.dim() != static_cast<int>(p.size()))
        throw ValidationError("minor_relaxation_check: dimension mismatch");
    for (int i = 0; i < q.dim(); ++i)
        if (std::abs(q(i, i).real() - p[i]) > tol)
            throw ValidationError("minor_relaxation_check: diagonal does not match budgets");
    for (int i = 0; i < q.dim(); ++i)
        for (int j = i + 1; j < q.dim(); ++j)
            if (std::norm(q(i, j)) > p[i] * p[j] + tol) return false;
    return true;
}

} // namespace misocap
