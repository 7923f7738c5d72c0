// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "misocap/hermitian.hpp"
#include "misocap/rng.hpp"

namespace misocap {

struct ChannelVector {
    std::vector<Complex> h;

    int dim() const { return static_cast<int>(h.size()); }
    double norm_sq() const;
};

/// Validates n >= 1 and finite coefficients.
ChannelVector make_channel(std::vector<Complex> coeffs);

enum class LogBase { bits, nats };

struct SystemParams {
    double noise_power = 1.0;
    LogBase log_base = LogBase::bits;
};

void validate(const SystemParams& sys);

/// Tagged union over the three power constraint regimes:
/// a shared total budget, a budget per antenna with full cooperation,
/// or per-antenna budgets with independent (uncooperative) signals.
class PowerConstraint {
public:
    enum class Kind { sum_power, per_antenna, independent_ma };

    static PowerConstraint sum(double total);
    static PowerConstraint per_antenna(std::vector<double> budgets);
    static PowerConstraint independent_ma(std::vector<double> budgets);

    Kind kind() const { return kind_; }
    double sum_budget() const;                  // sum_power only
    const std::vector<double>& budgets() const; // per_antenna / independent_ma

private:
    PowerConstraint(Kind k, double total, std::vector<double> budgets);

    Kind kind_;
    double total_ = 0.0;
    std::vector<double> budgets_;
};

double total_power(const PowerConstraint& pc);

/// One Rayleigh channel draw: n i.i.d. circularly-symmetric complex Gaussian
/// coefficients with unit total variance (1/2 per real component).
/// Pure in (rng.seed, index); Box-Muller on two counter-based uniforms per
/// coefficient.
ChannelVector sample_rayleigh(int n, SeededRng rng, std::uint64_t index);

} // namespace misocap
