// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "misocap/channel.hpp"
#include "misocap/hermitian.hpp"

namespace misocap {

struct BeamVector {
    std::vector<Complex> w;
};

struct ConstraintReport {
    bool satisfied = false;
    double worst_violation = 0.0;    // max of the applicable checks below
    double diagonal_excess = 0.0;    // max_i (q_ii - P_i), per-antenna kinds
    double trace_excess = 0.0;       // trace(Q) - P, sum-power kind
    double psd_deficit = 0.0;        // max(0, -lambda_min) / max(1, trace)
    double offdiagonal_mass = 0.0;   // max |q_ij|, i != j, independent kind
};

/// Sum-power optimum: all power on the matched beam, Q = P * u u^H with
/// u = conj(h)/|h|. Errors on a zero channel (beam direction undefined).
HermitianMatrix optimal_cov_sum_power(const ChannelVector& h, double total);

/// Per-antenna optimum: rank-one outer product of the phase-matched beam
/// with fixed amplitudes sqrt(P_k); the diagonal is written as exactly P_k.
/// A zero coefficient h_k gets canonical phase 0.
HermitianMatrix optimal_cov_per_antenna(const ChannelVector& h, const std::vector<double>& p);

/// Independent multiple-access: no optimization, Q = diag(p).
HermitianMatrix optimal_cov_ma(const std::vector<double>& p);

/// Beam weights w_k = eta_k * sqrt(P_k)/sqrt(P) with eta_k = conj(h_k)/|h_k|:
/// phases matched to the channel, amplitudes set by the budgets alone.
BeamVector beam_weights_per_antenna(const ChannelVector& h, const std::vector<double>& p);

ConstraintReport check_constraint(const HermitianMatrix& q, const PowerConstraint& pc,
                                  double tol = 1e-9);

/// All 2x2 principal minors PSD: |q_ij|^2 <= P_i P_j + tol for i != j.
/// Precondition (checked): the diagonal equals p within tol.
bool minor_relaxation_check(const HermitianMatrix& q, const std::vector<double>& p,
                            double tol = 1e-9);

} // namespace misocap
