// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "misocap/channel.hpp"
#include "misocap/covariance.hpp"

namespace misocap {

struct CapacityResult {
    double value = 0.0;       // bits or nats per channel use, per sys.log_base
    PowerConstraint constraint;
    HermitianMatrix achieving_cov;
};

/// Achievable rate log(1 + h^T Q conj(h) / sigma^2) in the configured base.
/// The quadratic form must come out real nonnegative; anything else raises
/// a numerical-integrity error.
double rate(const ChannelVector& h, const HermitianMatrix& q, const SystemParams& sys);

CapacityResult capacity_sum(const ChannelVector& h, double total, const SystemParams& sys);
CapacityResult capacity_ma(const ChannelVector& h, const std::vector<double>& p,
                           const SystemParams& sys);
CapacityResult capacity_per_antenna(const ChannelVector& h, const std::vector<double>& p,
                                    const SystemParams& sys);

/// Alignment between a beam vector and the channel as seen by the rank-one
/// quadratic form: |sum_k h_k w_k| / (|h| |w|), in [0, 1]. Equals 1 exactly
/// when w is the fully matched beam conj(h)/|h|.
double beam_angle_cos(const BeamVector& w, const ChannelVector& h);

} // namespace misocap
