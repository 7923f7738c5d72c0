// SPDX-License-Identifier: Apache-2.0

#include "misocap/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace misocap {

bool is_finite(Complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

namespace {

void require_dim(int dim) {
    if (dim < 1) throw ValidationError("HermitianMatrix: dimension must be >= 1");
}

void require_finite(const std::vector<Complex>& vals, const char* what) {
    for (const Complex& v : vals)
        if (!is_finite(v)) throw ValidationError(std::string(what) + ": non-finite entry");
}

} // namespace

HermitianMatrix::HermitianMatrix(int dim) : n_(dim) {
    require_dim(dim);
    e_.assign(static_cast<std::size_t>(n_) * n_, Complex(0.0, 0.0));
}

HermitianMatrix HermitianMatrix::identity(int dim) {
    HermitianMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

HermitianMatrix HermitianMatrix::diagonal(const std::vector<double>& d) {
    HermitianMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) {
        if (!std::isfinite(d[i])) throw ValidationError("diagonal: non-finite entry");
        m.set(i, i, d[i]);
    }
    return m;
}

HermitianMatrix HermitianMatrix::from_entries(int dim, const std::vector<Complex>& row_major) {
    require_dim(dim);
    if (row_major.size() != static_cast<std::size_t>(dim) * dim)
        throw ValidationError("from_entries: entry count does not match dimension");
    require_finite(row_major, "from_entries");

    double scale = 1.0;
    for (const Complex& v : row_major) scale = std::max(scale, std::abs(v));

    HermitianMatrix m(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            const Complex a = row_major[static_cast<std::size_t>(i) * dim + j];
            const Complex b = row_major[static_cast<std::size_t>(j) * dim + i];
            if (std::abs(a - std::conj(b)) > 1e-12 * scale)
                throw ValidationError("from_entries: matrix is not Hermitian");
            if (i == j) {
                m.set(i, i, a.real());
            } else {
                m.set(i, j, 0.5 * (a + std::conj(b)));
            }
        }
    }
    return m;
}

HermitianMatrix HermitianMatrix::rank_one(const std::vector<Complex>& a) {
    require_finite(a, "rank_one");
    const int n = static_cast<int>(a.size());
    HermitianMatrix m(n);
    for (int i = 0; i < n; ++i) {
        m.set(i, i, std::norm(a[i]));
        for (int j = i + 1; j < n; ++j) m.set(i, j, a[i] * std::conj(a[j]));
    }
    return m;
}

HermitianMatrix HermitianMatrix::rank_one_with_diagonal(const std::vector<Complex>& a,
                                                        const std::vector<double>& diag) {
    if (a.size() != diag.size())
        throw ValidationError("rank_one_with_diagonal: dimension mismatch");
    HermitianMatrix m = rank_one(a);
    for (int i = 0; i < m.dim(); ++i) {
        if (!std::isfinite(diag[i]))
            throw ValidationError("rank_one_with_diagonal: non-finite diagonal");
        m.set(i, i, diag[i]);
    }
    return m;
}

void HermitianMatrix::set(int i, int j, Complex v) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
        throw ValidationError("HermitianMatrix::set: index out of range");
    if (!is_finite(v)) throw ValidationError("HermitianMatrix::set: non-finite value");
    if (i == j && v.imag() != 0.0)
        throw ValidationError("HermitianMatrix::set: diagonal entries must be real");
    e_[static_cast<std::size_t>(i) * n_ + j] = v;
    e_[static_cast<std::size_t>(j) * n_ + i] = std::conj(v);
}

double HermitianMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i).real();
    return t;
}

double HermitianMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const Complex& v : e_) s += std::norm(v);
    return std::sqrt(s);
}

double HermitianMatrix::max_abs_entry() const {
    double m = 0.0;
    for (const Complex& v : e_) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// Off-diagonal Frobenius mass of a full row-major matrix.
double off_diag_mass(const std::vector<Complex>& a, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += std::norm(a[static_cast<std::size_t>(i) * n + j]);
    return std::sqrt(2.0 * s);
}

} // namespace

EigenDecomposition eig_hermitian(const HermitianMatrix& q) {
    const int n = q.dim();
    std::vector<Complex> a(static_cast<std::size_t>(n) * n);
    std::vector<Complex> v(static_cast<std::size_t>(n) * n, Complex(0.0, 0.0));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i) * n + i] = 1.0;
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = q(i, j);
    }

    const double norm0 = q.frobenius_norm();
    const double stop = 1e-14 * norm0;
    const double skip = 1e-18 * norm0;

    auto at = [&](std::vector<Complex>& m, int i, int j) -> Complex& {
        return m[static_cast<std::size_t>(i) * n + j];
    };

    bool converged = (off_diag_mass(a, n) <= stop);
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int r = p + 1; r < n; ++r) {
                const Complex beta = at(a, p, r);
                const double absb = std::abs(beta);
                if (absb <= skip) continue;

                // Diagonalize the 2x2 pivot block: peel the phase of beta,
                // then the classic real Jacobi rotation.
                const Complex phase = beta / absb;
                const double alpha = at(a, p, p).real();
                const double gamma = at(a, r, r).real();
                const double tau = (gamma - alpha) / (2.0 * absb);
                const double t =
                    (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // Unitary W = diag(1, conj(phase)) * real Jacobi rotation:
                // W_pp = c, W_pr = s, W_rp = -s*conj(phase), W_rr = c*conj(phase).
                const Complex w_rp = -s * std::conj(phase);
                const Complex w_rr = c * std::conj(phase);

                // A <- A W (columns p, r)
                for (int k = 0; k < n; ++k) {
                    const Complex akp = at(a, k, p);
                    const Complex akr = at(a, k, r);
                    at(a, k, p) = c * akp + w_rp * akr;
                    at(a, k, r) = s * akp + w_rr * akr;
                }
                // A <- W^H A (rows p, r)
                for (int k = 0; k < n; ++k) {
                    const Complex apk = at(a, p, k);
                    const Complex ark = at(a, r, k);
                    at(a, p, k) = c * apk + std::conj(w_rp) * ark;
                    at(a, r, k) = s * apk + std::conj(w_rr) * ark;
                }
                // Restore exact Hermitian structure of the touched entries.
                at(a, p, r) = Complex(0.0, 0.0);
                at(a, r, p) = Complex(0.0, 0.0);
                at(a, p, p) = Complex(at(a, p, p).real(), 0.0);
                at(a, r, r) = Complex(at(a, r, r).real(), 0.0);

                // V <- V W
                for (int k = 0; k < n; ++k) {
                    const Complex vkp = at(v, k, p);
                    const Complex vkr = at(v, k, r);
                    at(v, k, p) = c * vkp + w_rp * vkr;
                    at(v, k, r) = s * vkp + w_rr * vkr;
                }
            }
        }
        converged = (off_diag_mass(a, n) <= stop);
    }
    if (!converged)
        throw NumericalIntegrityError("eig_hermitian: Jacobi sweeps did not converge");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return a[static_cast<std::size_t>(x) * n + x].real() >
               a[static_cast<std::size_t>(y) * n + y].real();
    });

    EigenDecomposition ed;
    ed.eigenvalues.resize(n);
    ed.eigenvectors.assign(n, std::vector<Complex>(n));
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        ed.eigenvalues[k] = a[static_cast<std::size_t>(src) * n + src].real();
        for (int i = 0; i < n; ++i)
            ed.eigenvectors[k][i] = v[static_cast<std::size_t>(i) * n + src];
    }
    return ed;
}

bool is_psd(const HermitianMatrix& q, double tol) {
    if (!(tol >= 0.0)) throw ValidationError("is_psd: tol must be >= 0");
    const EigenDecomposition ed = eig_hermitian(q);
    return ed.eigenvalues.back() >= -tol * std::max(1.0, q.trace());
}

int numerical_rank(const HermitianMatrix& q, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw ValidationError("numerical_rank: rel_tol must lie in (0, 1)");
    const EigenDecomposition ed = eig_hermitian(q);
    double max_abs = 0.0;
    for (double lam : ed.eigenvalues) max_abs = std::max(max_abs, std::abs(lam));
    if (max_abs == 0.0) return 0;
    int count = 0;
    for (double lam : ed.eigenvalues)
        if (std::abs(lam) > rel_tol * max_abs) ++count;
    return count;
}

double reconstruction_residual(const HermitianMatrix& q, const EigenDecomposition& ed) {
    const int n = q.dim();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Complex acc(0.0, 0.0);
            for (int k = 0; k < n; ++k)
                acc += ed.eigenvalues[k] * ed.eigenvectors[k][i] * std::conj(ed.eigenvectors[k][j]);
            s += std::norm(q(i, j) - acc);
        }
    }
    return std::sqrt(s);
}

double orthonormality_residual(const EigenDecomposition& ed) {
    const int n = static_cast<int>(ed.eigenvalues.size());
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            Complex acc(0.0, 0.0);
            for (int i = 0; i < n; ++i) acc += std::conj(ed.eigenvectors[k][i]) * ed.eigenvectors[l][i];
            const double target = (k == l) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(acc - target));
        }
    }
    return worst;
}

double max_abs_diff(const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim()) throw ValidationError("max_abs_diff: dimension mismatch");
    double worst = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

} // namespace misocap
