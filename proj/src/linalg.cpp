#include "adiabatica/linalg.hpp"

#include <cblas.h>
#include <cmath>
#include <lapacke.h>
#include <stdexcept>

namespace adiabatica {

Spectral eigh(const Matrix& H) {
    const int n = static_cast<int>(H.rows());
    Spectral out;
    out.V = H;
    out.evals = RealVec::Zero(n);
    const int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', n,
        reinterpret_cast<lapack_complex_double*>(out.V.data()), n, out.evals.data());
    if (info != 0) throw std::runtime_error("zheevd failed: info = " + std::to_string(info));
    return out;
}

namespace {

CBLAS_TRANSPOSE to_op(char op) {
    switch (op) {
        case 'N': return CblasNoTrans;
        case 'T': return CblasTrans;
        case 'C': return CblasConjTrans;
        default: throw std::invalid_argument("bad matmul op");
    }
}

} // namespace

Matrix matmul(const Matrix& A, const Matrix& B, char opA, char opB) {
    const int m = static_cast<int>(opA == 'N' ? A.rows() : A.cols());
    const int k = static_cast<int>(opA == 'N' ? A.cols() : A.rows());
    const int kb = static_cast<int>(opB == 'N' ? B.rows() : B.cols());
    const int n = static_cast<int>(opB == 'N' ? B.cols() : B.rows());
    if (k != kb) throw DimensionMismatch("matmul inner dimensions");
    Matrix C(m, n);
    const Complex one(1, 0), zero(0, 0);
    cblas_zgemm(CblasColMajor, to_op(opA), to_op(opB), m, n, k, &one, A.data(),
                static_cast<int>(A.rows()), B.data(), static_cast<int>(B.rows()), &zero,
                C.data(), m);
    return C;
}

double operator_norm(const ApplyFn& apply, const ApplyFn& apply_adjoint, int dim,
                     double tol, int max_iter) {
    Eigen::VectorXcd v(dim), w(dim), u(dim);
    for (int i = 0; i < dim; ++i) {
        const double ph = 0.61 * i + 1.3e-4 * static_cast<double>(i) * i;
        v[i] = Complex(std::cos(ph), std::sin(ph));
    }
    v /= v.norm();
    double sigma = 0;
    for (int it = 0; it < max_iter; ++it) {
        apply(v.data(), w.data());
        const double s = w.norm();
        if (s == 0.0) return 0.0;
        apply_adjoint(w.data(), u.data());
        v = u / u.norm();
        if (it > 2 && std::abs(s - sigma) <= tol * std::max(s, 1e-300)) return s;
        sigma = s;
    }
    return sigma;
}

double operator_norm(const Matrix& A, double tol) {
    const int dim = static_cast<int>(A.cols());
    const Complex one(1, 0), zero(0, 0);
    auto apply = [&](const Complex* in, Complex* out) {
        cblas_zgemv(CblasColMajor, CblasNoTrans, static_cast<int>(A.rows()), dim, &one,
                    A.data(), static_cast<int>(A.rows()), in, 1, &zero, out, 1);
    };
    auto applyH = [&](const Complex* in, Complex* out) {
        cblas_zgemv(CblasColMajor, CblasConjTrans, static_cast<int>(A.rows()), dim, &one,
                    A.data(), static_cast<int>(A.rows()), in, 1, &zero, out, 1);
    };
    return operator_norm(apply, applyH, dim, tol);
}

Complex trace_of_product(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.rows() || A.rows() != B.cols())
        throw DimensionMismatch("trace_of_product dimensions");
    return (A.transpose().cwiseProduct(B)).sum();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t m = x.size();
    if (m != y.size() || m < 2) throw std::invalid_argument("fit_line needs >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double dn = static_cast<double>(m);
    const double vx = sxx - sx * sx / dn;
    const double vy = syy - sy * sy / dn;
    const double cxy = sxy - sx * sy / dn;
    LineFit fit;
    fit.slope = cxy / vx;
    fit.intercept = (sy - fit.slope * sx) / dn;
    fit.r_squared = vy > 0 ? std::min(1.0, cxy * cxy / (vx * vy)) : 1.0;
    return fit;
}

} // namespace adiabatica
