// SPDX-License-Identifier: Apache-2.0

#include "misocap/channel.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace misocap {

double ChannelVector::norm_sq() const {
    double s = 0.0;
    for (const Complex& v : h) s += std::norm(v);
    return s;
}

ChannelVector make_channel(std::vector<Complex> coeffs) {
    if (coeffs.empty()) throw ValidationError("channel: needs at least one coefficient");
    for (const Complex& v : coeffs)
        if (!is_finite(v)) throw ValidationError("channel: non-finite coefficient");
    return ChannelVector{std::move(coeffs)};
}

void validate(const SystemParams& sys) {
    if (!(sys.noise_power > 0.0) || !std::isfinite(sys.noise_power))
        throw ValidationError("system params: noise power must be positive and finite");
}

namespace {

void require_budgets(const std::vector<double>& p) {
    if (p.empty()) throw ValidationError("power constraint: needs at least one budget");
    for (double v : p)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("power constraint: budgets must be finite and >= 0");
}

} // namespace

PowerConstraint::PowerConstraint(Kind k, double total, std::vector<double> budgets)
    : kind_(k), total_(total), budgets_(std::move(budgets)) {}

PowerConstraint PowerConstraint::sum(double total) {
    if (!(total >= 0.0) || !std::isfinite(total))
        throw ValidationError("sum power: total must be finite and >= 0");
    return PowerConstraint(Kind::sum_power, total, {});
}

PowerConstraint PowerConstraint::per_antenna(std::vector<double> budgets) {
    require_budgets(budgets);
    return PowerConstraint(Kind::per_antenna, 0.0, std::move(budgets));
}

PowerConstraint PowerConstraint::independent_ma(std::vector<double> budgets) {
    require_budgets(budgets);
    return PowerConstraint(Kind::independent_ma, 0.0, std::move(budgets));
}

double PowerConstraint::sum_budget() const {
    if (kind_ != Kind::sum_power)
        throw ValidationError("sum_budget: constraint is not sum-power");
    return total_;
}

const std::vector<double>& PowerConstraint::budgets() const {
    if (kind_ == Kind::sum_power)
        throw ValidationError("budgets: sum-power constraint has no per-antenna budgets");
    return budgets_;
}

double total_power(const PowerConstraint& pc) {
    if (pc.kind() == PowerConstraint::Kind::sum_power) return pc.sum_budget();
    const std::vector<double>& p = pc.budgets();
    return std::accumulate(p.begin(), p.end(), 0.0);
}

ChannelVector sample_rayleigh(int n, SeededRng rng, std::uint64_t index) {
    if (n < 1) throw ValidationError("sample_rayleigh: n must be >= 1");
    std::vector<Complex> h(n);
    const std::uint64_t base = index * (2ull * static_cast<std::uint64_t>(n));
    for (int k = 0; k < n; ++k) {
        const double u1 = rng::uniform_unit(rng.seed, base + 2ull * k);
        const double u2 = rng::uniform_unit(rng.seed, base + 2ull * k + 1);
        // |h_k|^2 ~ Exp(1), phase uniform: unit total variance per coefficient.
        const double r = std::sqrt(-std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        h[k] = Complex(r * std::cos(phi), r * std::sin(phi));
    }
    return ChannelVector{std::move(h)};
}

} // namespace misocap
