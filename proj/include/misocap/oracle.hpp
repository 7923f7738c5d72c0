// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "misocap/capacity.hpp"
#include "misocap/channel.hpp"
#include "misocap/rng.hpp"

namespace misocap {

struct OracleResult {
    double best_rate = 0.0;
    HermitianMatrix best_cov{1};
    int restarts_used = 0;
    bool converged = false;
};

/// Numerical maximizer for the per-antenna problem over rank-one candidates
/// Q = a a^H with |a_k| = sqrt(P_k): coordinate ascent on the phases, each
/// coordinate update closed-form (align term k with the aggregate of the
/// others). Deterministic per seed; restarts merged by max rate with the
/// lowest restart index winning ties.
OracleResult maximize_per_antenna_phases(const ChannelVector& h, const std::vector<double>& p,
                                         const SystemParams& sys, int restarts, SeededRng rng);

/// Exhaustive n=2 oracle: rate over q_12 = t * sqrt(P1 P2) * e^{i psi} on a
/// phase grid of grid_points points times a magnitude grid over t in [0, 1]
/// (boundary included exactly).
OracleResult grid_search_n2(const ChannelVector& h, const std::vector<double>& p,
                            const SystemParams& sys, int grid_points);

/// Projected ascent over an n-by-rank_cap factor A with Q = A A^H and row
/// norms fixed to sqrt(P_k) (diagonal equality). Gradient in A is closed
/// form; step size by backtracking; best over restarts.
OracleResult maximize_general_rank(const ChannelVector& h, const std::vector<double>& p,
                                   const SystemParams& sys, int rank_cap, int restarts,
                                   SeededRng rng);

} // namespace misocap
