// SPDX-License-Identifier: Apache-2.0

#include "misocap/capacity.hpp"

#include <cmath>
#include <numbers>

namespace misocap {

namespace {

double from_nats(double nats, LogBase base) {
    return base == LogBase::bits ? nats / std::numbers::ln2 : nats;
}

void require_powers(const std::vector<double>& p) {
    if (p.empty()) throw ValidationError("per-antenna powers: needs at least one entry");
    for (double v : p)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("per-antenna powers: entries must be finite and >= 0");
}

} // namespace

double rate(const ChannelVector& h, const HermitianMatrix& q, const SystemParams& sys) {
    validate(sys);
    if (h.dim() != q.dim()) throw ValidationError("rate: dimension mismatch");
    const int n = h.dim();

    Complex s(0.0, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += h.h[i] * q(i, j) * std::conj(h.h[j]);

    const double mag = std::abs(s);
    if (std::abs(s.imag()) > 1e-12 * mag)
        throw NumericalIntegrityError("rate: quadratic form has a non-negligible imaginary part");
    double val = s.real();
    if (val < 0.0) {
        if (val < -(1e-12 * mag + 1e-300))
            throw NumericalIntegrityError("rate: quadratic form negative beyond tolerance");
        val = 0.0;
    }
    return from_nats(std::log1p(val / sys.noise_power), sys.log_base);
}

CapacityResult capacity_sum(const ChannelVector& h, double total, const SystemParams& sys) {
    validate(sys);
    if (!(total >= 0.0) || !std::isfinite(total))
        throw ValidationError("capacity_sum: total must be finite and >= 0");
    PowerConstraint pc = PowerConstraint::sum(total);
    const double hn2 = h.norm_sq();
    if (hn2 == 0.0)
        return CapacityResult{0.0, pc, HermitianMatrix(h.dim())};
    const double value = from_nats(std::log1p(total * hn2 / sys.noise_power), sys.log_base);
    return CapacityResult{value, pc, optimal_cov_sum_power(h, total)};
}

CapacityResult capacity_ma(const ChannelVector& h, const std::vector<double>& p,
                           const SystemParams& sys) {
    validate(sys);
    require_powers(p);
    if (h.dim() != static_cast<int>(p.size()))
        throw ValidationError("capacity_ma: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * std::norm(h.h[k]);
    const double value = from_nats(std::log1p(s / sys.noise_power), sys.log_base);
    return CapacityResult{value, PowerConstraint::independent_ma(p), optimal_cov_ma(p)};
}

CapacityResult capacity_per_antenna(const ChannelVector& h, const std::vector<double>& p,
                                    const SystemParams& sys) {
    validate(sys);
    require_powers(p);
    if (h.dim() != static_cast<int>(p.size()))
        throw ValidationError("capacity_per_antenna: dimension mismatch");
    double amp = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) amp += std::abs(h.h[k]) * std::sqrt(p[k]);
    const double value = from_nats(std::log1p(amp * amp / sys.noise_power), sys.log_base);
    return CapacityResult{value, PowerConstraint::per_antenna(p), optimal_cov_per_antenna(h, p)};
}

double beam_angle_cos(const BeamVector& w, const ChannelVector& h) {
    if (static_cast<int>(w.w.size()) != h.dim())
        throw ValidationError("beam_angle_cos: dimension mismatch");
    double wn2 = 0.0;
    for (const Complex& v : w.w) {
        if (!is_finite(v)) throw ValidationError("beam_angle_cos: non-finite weight");
        wn2 += std::norm(v);
    }
    const double hn = std::sqrt(h.norm_sq());
    const double wn = std::sqrt(wn2);
    if (hn == 0.0 || wn == 0.0)
        throw ValidationError("beam_angle_cos: undefined for a zero vector");
    // The rank-one quadratic form sees |h^T w|, i.e. alignment of w with the
    // conjugate channel direction.
    Complex inner(0.0, 0.0);
    for (int k = 0; k < h.dim(); ++k) inner += h.h[k] * w.w[k];
    return std::min(1.0, std::abs(inner) / (hn * wn));
}

} // namespace misocap
