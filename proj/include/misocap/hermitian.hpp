// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

#include "misocap/errors.hpp"

namespace misocap {

using Complex = std::complex<double>;

bool is_finite(Complex v);

/// Dense n-by-n complex Hermitian matrix. The mirror symmetry
/// entries(i,j) == conj(entries(j,i)) and the realness of the diagonal are
/// maintained by every mutator and checked by every factory, so downstream
/// code can rely on them unconditionally.
class HermitianMatrix {
public:
    explicit HermitianMatrix(int dim); // zero matrix

    static HermitianMatrix identity(int dim);
    static HermitianMatrix diagonal(const std::vector<double>& d);
    /// Validates conjugate symmetry of a full row-major table, then stores
    /// the exactly symmetrized entries.
    static HermitianMatrix from_entries(int dim, const std::vector<Complex>& row_major);
    /// a * a^H; rank <= 1 and PSD by construction.
    static HermitianMatrix rank_one(const std::vector<Complex>& a);
    /// a * a^H with the diagonal overwritten entrywise by exact values.
    static HermitianMatrix rank_one_with_diagonal(const std::vector<Complex>& a,
                                                  const std::vector<double>& diag);

    int dim() const { return n_; }
    Complex operator()(int i, int j) const {
        return e_[static_cast<std::size_t>(i) * n_ + j];
    }

    /// Writes v at (i,j) and conj(v) at (j,i). On the diagonal v must be real.
    void set(int i, int j, Complex v);

    double trace() const;
    double frobenius_norm() const;
    double max_abs_entry() const;

private:
    int n_ = 0;
    std::vector<Complex> e_;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues;                 // sorted descending
    std::vector<std::vector<Complex>> eigenvectors;  // [k] pairs with eigenvalues[k]
};

/// Cyclic Jacobi eigendecomposition for complex Hermitian matrices.
/// Deterministic: identical input bits produce identical output bits.
EigenDecomposition eig_hermitian(const HermitianMatrix& q);

/// True iff the smallest eigenvalue is >= -tol * max(1, trace(q)).
bool is_psd(const HermitianMatrix& q, double tol = 1e-9);

/// Number of eigenvalues with |lambda| > rel_tol * max|lambda|; 0 for the
/// zero matrix. rel_tol must lie in (0, 1).
int numerical_rank(const HermitianMatrix& q, double rel_tol = 1e-9);

// Diagnostics used by tests and the verify command.
double reconstruction_residual(const HermitianMatrix& q, const EigenDecomposition& ed);
double orthonormality_residual(const EigenDecomposition& ed);
double max_abs_diff(const HermitianMatrix& a, const HermitianMatrix& b);

} // namespace misocap
