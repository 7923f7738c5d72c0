// SPDX-License-Identifier: Apache-2.0

#include "misocap/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>
#include <utility>

namespace misocap {

CovariancePolicy::CovariancePolicy(Kind k, HermitianMatrix q, double total,
                                   std::vector<double> p)
    : kind_(k), fixed_q_(std::move(q)), total_(total), budgets_(std::move(p)) {}

CovariancePolicy CovariancePolicy::fixed(HermitianMatrix q) {
    if (!is_psd(q, 1e-9)) throw ValidationError("covariance policy: fixed Q must be PSD");
    return CovariancePolicy(Kind::fixed_q, std::move(q), 0.0, {});
}

CovariancePolicy CovariancePolicy::sum_power_iso(double total) {
    if (!(total >= 0.0) || !std::isfinite(total))
        throw ValidationError("covariance policy: total must be finite and >= 0");
    return CovariancePolicy(Kind::sum_power_iso, HermitianMatrix(1), total, {});
}

namespace {

void require_budgets(const std::vector<double>& p) {
    if (p.empty()) throw ValidationError("covariance policy: needs at least one budget");
    for (double v : p)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("covariance policy: budgets must be finite and >= 0");
}

} // namespace

CovariancePolicy CovariancePolicy::ma_diag(std::vector<double> p) {
    require_budgets(p);
    return CovariancePolicy(Kind::ma_diag, HermitianMatrix(1), 0.0, std::move(p));
}

CovariancePolicy CovariancePolicy::per_antenna_diag(std::vector<double> p) {
    require_budgets(p);
    return CovariancePolicy(Kind::per_antenna_diag, HermitianMatrix(1), 0.0, std::move(p));
}

HermitianMatrix CovariancePolicy::covariance(int n) const {
    if (n < 1) throw ValidationError("covariance policy: n must be >= 1");
    switch (kind_) {
    case Kind::fixed_q:
        if (fixed_q_.dim() != n)
            throw ValidationError("covariance policy: fixed Q dimension mismatch");
        return fixed_q_;
    case Kind::sum_power_iso:
        return HermitianMatrix::diagonal(std::vector<double>(n, total_ / n));
    case Kind::ma_diag:
    case Kind::per_antenna_diag:
        // One code path for both: identical budgets give the identical matrix.
        if (static_cast<int>(budgets_.size()) != n)
            throw ValidationError("covariance policy: budget dimension mismatch");
        return HermitianMatrix::diagonal(budgets_);
    }
    throw ValidationError("covariance policy: unknown kind");
}

namespace {

int clamp_workers(int workers) {
    if (workers < 1) throw ValidationError("workers must be >= 1");
    return std::min(workers, 256);
}

// Contiguous chunks; the caller's per-index work must be pure.
template <typename Body>
void parallel_index_fill(std::int64_t count, int workers, const Body& body) {
    workers = std::min<std::int64_t>(workers, std::max<std::int64_t>(count, 1));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        const std::int64_t lo = count * t / workers;
        const std::int64_t hi = count * (t + 1) / workers;
        pool.emplace_back([&body, lo, hi] {
            for (std::int64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

// Mean and standard error with a fixed, index-ordered reduction.
McEstimate reduce(const std::vector<double>& values, std::uint64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    McEstimate est;
    est.mean = mean;
    est.std_error = (n > 1) ? std::sqrt(ss / (static_cast<double>(n - 1) * static_cast<double>(n)))
                            : 0.0;
    est.n_samples = n;
    est.seed = seed;
    return est;
}

} // namespace

std::vector<ChannelVector> draw_channels(int n, SeededRng rng, std::int64_t n_samples,
                                         int workers) {
    if (n_samples < 1) throw ValidationError("draw_channels: n_samples must be >= 1");
    workers = clamp_workers(workers);
    std::vector<ChannelVector> out(n_samples);
    parallel_index_fill(n_samples, workers, [&](std::int64_t i) {
        out[i] = sample_rayleigh(n, rng, static_cast<std::uint64_t>(i));
    });
    return out;
}

McEstimate estimate_over(const std::vector<ChannelVector>& samples, const HermitianMatrix& q,
                         const SystemParams& sys, SeededRng rng, int workers) {
    if (samples.size() < 2) throw ValidationError("estimate_over: needs at least two samples");
    workers = clamp_workers(workers);
    std::vector<double> rates(samples.size());
    parallel_index_fill(static_cast<std::int64_t>(samples.size()), workers,
                        [&](std::int64_t i) { rates[i] = rate(samples[i], q, sys); });
    return reduce(rates, rng.seed);
}

PairedMc paired_estimate_over(const std::vector<ChannelVector>& samples,
                              const HermitianMatrix& q_first, const HermitianMatrix& q_second,
                              const SystemParams& sys, SeededRng rng, int workers) {
    if (samples.size() < 2)
        throw ValidationError("paired_estimate_over: needs at least two samples");
    workers = clamp_workers(workers);
    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    std::vector<double> ra(n), rb(n);
    parallel_index_fill(n, workers, [&](std::int64_t i) {
        ra[i] = rate(samples[i], q_first, sys);
        rb[i] = rate(samples[i], q_second, sys);
    });
    PairedMc out;
    out.first = reduce(ra, rng.seed);
    out.second = reduce(rb, rng.seed);
    std::vector<double> diff(n);
    for (std::int64_t i = 0; i < n; ++i) diff[i] = ra[i] - rb[i];
    const McEstimate d = reduce(diff, rng.seed);
    out.mean_diff = d.mean;
    out.paired_std_error = d.std_error;
    return out;
}

McEstimate ergodic_capacity_mc(const CovariancePolicy& policy, int n, const SystemParams& sys,
                               std::int64_t n_samples, SeededRng rng, int workers) {
    validate(sys);
    if (n_samples < 100) throw ValidationError("ergodic_capacity_mc: n_samples must be >= 100");
    const HermitianMatrix q = policy.covariance(n);
    const std::vector<ChannelVector> samples = draw_channels(n, rng, n_samples, workers);
    return estimate_over(samples, q, sys, rng, workers);
}

// ---------------------------------------------------------------------------
// Gauss-Laguerre quadrature via Golub-Welsch: nodes are the eigenvalues of
// the Laguerre Jacobi matrix (diag 2k+1, off-diagonal k), weights are the
// squared first components of its eigenvectors. The tridiagonal QL below
// tracks only that first row.

namespace {

void tridiag_ql_first_row(std::vector<double>& d, std::vector<double>& e,
                          std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw NumericalIntegrityError("quadrature: tridiagonal QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

void gauss_laguerre(int nodes, std::vector<double>& x, std::vector<double>& w) {
    std::vector<double> d(nodes), e(nodes, 0.0), z(nodes, 0.0);
    for (int k = 0; k < nodes; ++k) d[k] = 2.0 * k + 1.0;
    for (int k = 1; k < nodes; ++k) e[k - 1] = static_cast<double>(k);
    z[0] = 1.0; // mu_0 = integral of e^{-t} dt = 1
    tridiag_ql_first_row(d, e, z);

    std::vector<int> order(nodes);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    x.resize(nodes);
    w.resize(nodes);
    for (int k = 0; k < nodes; ++k) {
        x[k] = d[order[k]];
        w[k] = z[order[k]] * z[order[k]];
    }
}

} // namespace

double ergodic_oracle_quadrature(int n, const CovariancePolicy& policy, const SystemParams& sys,
                                 int nodes) {
    validate(sys);
    if (n != 1 && n != 2)
        throw ValidationError("ergodic_oracle_quadrature: only n in {1, 2} supported");
    if (nodes < 64) throw ValidationError("ergodic_oracle_quadrature: needs >= 64 nodes");

    const HermitianMatrix q = policy.covariance(n);
    if (n == 2 && std::abs(q(0, 1)) != 0.0)
        throw ValidationError("ergodic_oracle_quadrature: policy must be diagonal or isotropic");
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) {
        a[i] = q(i, i).real();
        if (a[i] < 0.0)
            throw ValidationError("ergodic_oracle_quadrature: negative diagonal power");
    }

    std::vector<double> x, w;
    gauss_laguerre(nodes, x, w);

    double acc = 0.0;
    if (n == 1) {
        for (int i = 0; i < nodes; ++i) acc += w[i] * std::log1p(a[0] * x[i] / sys.noise_power);
    } else {
        for (int i = 0; i < nodes; ++i) {
            double inner = 0.0;
            for (int j = 0; j < nodes; ++j)
                inner += w[j] * std::log1p((a[0] * x[i] + a[1] * x[j]) / sys.noise_power);
            acc += w[i] * inner;
        }
    }
    return sys.log_base == LogBase::bits ? acc / std::numbers::ln2 : acc;
}

// ---------------------------------------------------------------------------

namespace {

void require_offdiag_feasible(Complex q, const std::array<double, 2>& p) {
    if (!is_finite(q)) throw ValidationError("off-diagonal q must be finite");
    if (!(p[0] >= 0.0) || !(p[1] >= 0.0) || !std::isfinite(p[0]) || !std::isfinite(p[1]))
        throw ValidationError("budgets must be finite and >= 0");
    if (std::norm(q) > p[0] * p[1] * (1.0 + 1e-12) + 1e-300)
        throw ValidationError("off-diagonal q violates |q|^2 <= P1 P2");
}

HermitianMatrix two_by_two(const std::array<double, 2>& p, Complex q) {
    HermitianMatrix m(2);
    m.set(0, 0, p[0]);
    m.set(1, 1, p[1]);
    m.set(0, 1, q);
    return m;
}

} // namespace

bool signflip_identity_check(Complex q_offdiag, const std::array<double, 2>& p,
                             const SystemParams& sys, std::int64_t n_samples, SeededRng rng) {
    validate(sys);
    require_offdiag_feasible(q_offdiag, p);
    if (n_samples < 1) throw ValidationError("signflip_identity_check: n_samples must be >= 1");

    const HermitianMatrix q_pos = two_by_two(p, q_offdiag);
    const HermitianMatrix q_neg = two_by_two(p, -q_offdiag);

    double sum_flipped = 0.0; // h1 -> -h1, covariance with +q
    double sum_negated = 0.0; // original h,   covariance with -q
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const ChannelVector h = sample_rayleigh(2, rng, static_cast<std::uint64_t>(i));
        const ChannelVector flipped{{-h.h[0], h.h[1]}};
        sum_flipped += rate(flipped, q_pos, sys);
        sum_negated += rate(h, q_neg, sys);
    }
    const double n = static_cast<double>(n_samples);
    return (sum_flipped / n) == (sum_negated / n);
}

PairedMc diagonal_dominance_mc(Complex q_offdiag, const std::array<double, 2>& p,
                               const SystemParams& sys, std::int64_t n_samples, SeededRng rng,
                               int workers) {
    validate(sys);
    require_offdiag_feasible(q_offdiag, p);
    if (n_samples < 100) throw ValidationError("diagonal_dominance_mc: n_samples must be >= 100");
    const std::vector<ChannelVector> samples = draw_channels(2, rng, n_samples, workers);
    return paired_estimate_over(samples, two_by_two(p, Complex(0.0, 0.0)),
                                two_by_two(p, q_offdiag), sys, rng, workers);
}

bool permutation_bound_check(const std::vector<double>& p, const SystemParams& sys,
                             std::int64_t n_samples, SeededRng rng, int workers) {
    validate(sys);
    require_budgets(p);
    const int n = static_cast<int>(p.size());
    if (n < 2) throw ValidationError("permutation_bound_check: needs n >= 2");
    if (n_samples < 100) throw ValidationError("permutation_bound_check: n_samples must be >= 100");

    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    const std::vector<ChannelVector> samples = draw_channels(n, rng, n_samples, workers);
    const PairedMc cmp = paired_estimate_over(
        samples, HermitianMatrix::diagonal(p),
        HermitianMatrix::diagonal(std::vector<double>(p.size(), total / n)), sys, rng, workers);
    return cmp.mean_diff <= 3.0 * cmp.paired_std_error;
}

} // namespace misocap
