#pragma once

#include <functional>

#include "adiabatica/symbols.hpp"

namespace adiabatica {

/// Eigen-data of a dense Hermitian matrix, eigenvalues ascending.
struct Spectral {
    RealVec evals;
    Matrix V; // columns are eigenvectors
};

/// Dense Hermitian eigendecomposition (LAPACK divide and conquer).
Spectral eigh(const Matrix& H);

/// C = op(A) * op(B) through BLAS; ops are 'N', 'T' or 'C'.
Matrix matmul(const Matrix& A, const Matrix& B, char opA = 'N', char opB = 'N');

using ApplyFn = std::function<void(const Complex* in, Complex* out)>;

/// Largest singular value by power iteration on A^dagger A, deterministic
/// start vector, relative tolerance on the singular-value estimate.
double operator_norm(const ApplyFn& apply, const ApplyFn& apply_adjoint, int dim,
                     double tol = 1e-10, int max_iter = 20000);

double operator_norm(const Matrix& A, double tol = 1e-10);

/// tr(A B) without forming the product.
Complex trace_of_product(const Matrix& A, const Matrix& B);

/// Least-squares slope/intercept/r^2 of y against x.
struct LineFit {
    double slope = 0, intercept = 0, r_squared = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace adiabatica
