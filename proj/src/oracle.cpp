// SPDX-License-Identifier: Apache-2.0

#include "misocap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace misocap {

namespace {

constexpr double kSweepImprovementTol = 1e-12;
constexpr int kMaxSweeps = 10000;

void require_powers(const std::vector<double>& p) {
    if (p.empty()) throw ValidationError("oracle: needs at least one power budget");
    for (double v : p)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("oracle: budgets must be finite and >= 0");
}

double rate_from_quad(double quad, const SystemParams& sys) {
    const double nats = std::log1p(quad / sys.noise_power);
    return sys.log_base == LogBase::bits ? nats / std::numbers::ln2 : nats;
}

} // namespace

OracleResult maximize_per_antenna_phases(const ChannelVector& h, const std::vector<double>& p,
                                         const SystemParams& sys, int restarts, SeededRng rng) {
    validate(sys);
    require_powers(p);
    if (h.dim() != static_cast<int>(p.size()))
        throw ValidationError("maximize_per_antenna_phases: dimension mismatch");
    if (restarts < 1) throw ValidationError("maximize_per_antenna_phases: restarts must be >= 1");

    const int n = h.dim();
    std::vector<Complex> c(n); // term k = c_k e^{i phi_k}
    for (int k = 0; k < n; ++k) c[k] = h.h[k] * std::sqrt(p[k]);

    OracleResult best;
    best.best_cov = HermitianMatrix(n);
    best.best_rate = -1.0;
    best.restarts_used = restarts;

    for (int r = 0; r < restarts; ++r) {
        const std::uint64_t sub = rng::at(rng.seed, 0x70686173u + static_cast<std::uint64_t>(r));
        std::vector<double> phi(n);
        for (int k = 0; k < n; ++k)
            phi[k] = 2.0 * std::numbers::pi * rng::uniform_unit(sub, static_cast<std::uint64_t>(k));

        auto term = [&](int k) { return c[k] * std::polar(1.0, phi[k]); };
        Complex sum(0.0, 0.0);
        for (int k = 0; k < n; ++k) sum += term(k);

        bool converged = false;
        double prev_rate = rate_from_quad(std::norm(sum), sys);
        for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
            for (int k = 0; k < n; ++k) {
                if (std::abs(c[k]) == 0.0) continue;
                const Complex rest = sum - term(k);
                // Closed-form coordinate optimum: rotate term k onto rest
                // (onto the real axis when everything else cancels).
                phi[k] = (std::abs(rest) == 0.0) ? -std::arg(c[k])
                                                 : std::arg(rest) - std::arg(c[k]);
                sum = rest + term(k);
            }
            // Recompute the aggregate to keep incremental drift out of the
            // convergence measure.
            sum = Complex(0.0, 0.0);
            for (int k = 0; k < n; ++k) sum += term(k);
            const double cur_rate = rate_from_quad(std::norm(sum), sys);
            if (cur_rate < prev_rate - kSweepImprovementTol)
                throw NumericalIntegrityError("phase ascent: rate decreased across a sweep");
            if (cur_rate - prev_rate < kSweepImprovementTol) {
                prev_rate = std::max(prev_rate, cur_rate);
                converged = true;
                break;
            }
            prev_rate = cur_rate;
        }

        std::vector<Complex> a(n);
        for (int k = 0; k < n; ++k) a[k] = std::polar(std::sqrt(p[k]), phi[k]);
        HermitianMatrix cov = HermitianMatrix::rank_one(a);
        const double achieved = rate(h, cov, sys);
        if (achieved > best.best_rate) {
            best.best_rate = achieved;
            best.best_cov = std::move(cov);
            best.converged = converged;
        }
    }
    return best;
}

OracleResult grid_search_n2(const ChannelVector& h, const std::vector<double>& p,
                            const SystemParams& sys, int grid_points) {
    validate(sys);
    require_powers(p);
    if (h.dim() != 2 || p.size() != 2)
        throw ValidationError("grid_search_n2: requires exactly two antennas");
    if (grid_points < 8) throw ValidationError("grid_search_n2: grid_points must be >= 8");

    const double bound = std::sqrt(p[0] * p[1]);
    const double base = p[0] * std::norm(h.h[0]) + p[1] * std::norm(h.h[1]);
    const Complex cross = h.h[0] * std::conj(h.h[1]);

    // Secondary magnitude grid confirms the boundary optimum; the last point
    // hits sqrt(P1 P2) exactly.
    constexpr int kMagPoints = 33;
    double best_quad = -1.0;
    Complex best_q(0.0, 0.0);
    for (int mi = 0; mi < kMagPoints; ++mi) {
        const double mag = bound * (static_cast<double>(mi) / (kMagPoints - 1));
        for (int gi = 0; gi < grid_points; ++gi) {
            const double psi = 2.0 * std::numbers::pi * gi / grid_points;
            const Complex q12 = std::polar(mag, psi);
            const double quad = base + 2.0 * (cross * q12).real();
            if (quad > best_quad) {
                best_quad = quad;
                best_q = q12;
            }
        }
    }

    HermitianMatrix cov(2);
    cov.set(0, 0, p[0]);
    cov.set(1, 1, p[1]);
    cov.set(0, 1, best_q);
    OracleResult res;
    res.best_cov = cov;
    res.best_rate = rate(h, cov, sys);
    res.restarts_used = 1;
    res.converged = true;
    return res;
}

OracleResult maximize_general_rank(const ChannelVector& h, const std::vector<double>& p,
                                   const SystemParams& sys, int rank_cap, int restarts,
                                   SeededRng rng) {
    validate(sys);
    require_powers(p);
    const int n = h.dim();
    if (n != static_cast<int>(p.size()))
        throw ValidationError("maximize_general_rank: dimension mismatch");
    if (rank_cap < 1 || rank_cap > n)
        throw ValidationError("maximize_general_rank: rank_cap must lie in [1, n]");
    if (restarts < 1) throw ValidationError("maximize_general_rank: restarts must be >= 1");

    const int r = rank_cap;
    auto idx = [&](int k, int col) { return static_cast<std::size_t>(k) * r + col; };

    // Row k of A carries power p_k exactly (diagonal equality at the optimum).
    auto project = [&](std::vector<Complex>& a) {
        for (int k = 0; k < n; ++k) {
            double rn2 = 0.0;
            for (int col = 0; col < r; ++col) rn2 += std::norm(a[idx(k, col)]);
            if (p[k] == 0.0 || rn2 == 0.0) {
                for (int col = 0; col < r; ++col) a[idx(k, col)] = Complex(0.0, 0.0);
                if (p[k] > 0.0) a[idx(k, 0)] = std::sqrt(p[k]);
                continue;
            }
            const double sc = std::sqrt(p[k] / rn2);
            for (int col = 0; col < r; ++col) a[idx(k, col)] *= sc;
        }
    };

    // h^T A A^H conj(h) = sum_col |m_col|^2 with m_col = sum_k h_k A_{k,col}.
    auto objective = [&](const std::vector<Complex>& a) {
        double f = 0.0;
        for (int col = 0; col < r; ++col) {
            Complex m(0.0, 0.0);
            for (int k = 0; k < n; ++k) m += h.h[k] * a[idx(k, col)];
            f += std::norm(m);
        }
        return f;
    };

    OracleResult best;
    best.best_cov = HermitianMatrix(n);
    best.best_rate = -1.0;
    best.restarts_used = restarts;

    for (int rs = 0; rs < restarts; ++rs) {
        const std::uint64_t sub = rng::at(rng.seed, 0x72616E6Bu + static_cast<std::uint64_t>(rs));
        std::vector<Complex> a(static_cast<std::size_t>(n) * r);
        for (std::size_t t = 0; t < a.size(); ++t)
            a[t] = Complex(rng::uniform_unit(sub, 2 * t) - 0.5,
                           rng::uniform_unit(sub, 2 * t + 1) - 0.5);
        project(a);

        double f = objective(a);
        double step = 1.0;
        bool converged = false;
        for (int iter = 0; iter < kMaxSweeps; ++iter) {
            // Wirtinger ascent direction: d/d(conj A_{k,col}) = m_col conj(h_k).
            std::vector<Complex> m(r, Complex(0.0, 0.0));
            for (int col = 0; col < r; ++col)
                for (int k = 0; k < n; ++k) m[col] += h.h[k] * a[idx(k, col)];
            std::vector<Complex> grad(a.size());
            for (int k = 0; k < n; ++k)
                for (int col = 0; col < r; ++col)
                    grad[idx(k, col)] = m[col] * std::conj(h.h[k]);

            bool accepted = false;
            std::vector<Complex> trial(a.size());
            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t t = 0; t < a.size(); ++t) trial[t] = a[t] + step * grad[t];
                project(trial);
                const double ft = objective(trial);
                if (ft > f) {
                    const double prev_rate = rate_from_quad(f, sys);
                    const double cur_rate = rate_from_quad(ft, sys);
                    if (cur_rate < prev_rate)
                        throw NumericalIntegrityError("general-rank ascent: rate decreased");
                    a.swap(trial);
                    const double gain = cur_rate - prev_rate;
                    f = ft;
                    accepted = true;
                    step = std::min(step * 2.0, 1e6);
                    if (gain < kSweepImprovementTol) converged = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                converged = true;
                break;
            }
            if (converged) break;
        }

        // Q = A A^H
        HermitianMatrix cov(n);
        for (int i = 0; i < n; ++i) {
            double dii = 0.0;
            for (int col = 0; col < r; ++col) dii += std::norm(a[idx(i, col)]);
            cov.set(i, i, dii);
            for (int j = i + 1; j < n; ++j) {
                Complex v(0.0, 0.0);
                for (int col = 0; col < r; ++col) v += a[idx(i, col)] * std::conj(a[idx(j, col)]);
                cov.set(i, j, v);
            }
        }
        const double achieved = rate(h, cov, sys);
        if (achieved > best.best_rate) {
            best.best_rate = achieved;
            best.best_cov = std::move(cov);
            best.converged = converged;
        }
    }
    return best;
}

} // namespace misocap
