#include "adiabatica/symbols.hpp"

#include <cmath>
#include <limits>

namespace adiabatica {

double fd_step(double scale) {
    static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    return h0 * scale;
}

bool is_hermitian(const Matrix& A, double tol) {
    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    return (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

const Matrix& SymbolJet::second(int a, int b) const {
    if (!has_second) throw DimensionMismatch("second partials not computed");
    if (a > b) std::swap(a, b);
    const int m = 2 * n;
    // upper-triangle row-major index
    int idx = a * m - a * (a - 1) / 2 + (b - a);
    return d2[static_cast<size_t>(idx)];
}

SymbolJet SymbolJet::from_parts(const Matrix& value, std::vector<Matrix> dq,
                                std::vector<Matrix> dp) {
    SymbolJet j;
    j.n = static_cast<int>(dq.size());
    j.d = static_cast<int>(value.rows());
    j.value = value;
    j.dq = std::move(dq);
    j.dp = std::move(dp);
    j.sub = Matrix::Zero(j.d, j.d);
    return j;
}

namespace {

PhasePoint shifted(const PhasePoint& z, int alpha, double h) {
    PhasePoint w = z;
    const int n = z.n();
    if (alpha < n)
        w.q[alpha] += h;
    else if (alpha < 2 * n)
        w.p[alpha - n] += h;
    else
        w.t = z.t.value() + h;
    return w;
}

Matrix eval_checked(const SymbolModel& model, const PhasePoint& z) {
    Matrix H = model.H0(z);
    if (!is_hermitian(H))
        throw NonHermitianEvaluation("symbol evaluator returned a non-Hermitian matrix");
    return H;
}

} // namespace

SymbolJet evaluate_jet(const SymbolModel& model, const PhasePoint& z, int order) {
    SymbolJet jet;
    jet.n = model.n;
    jet.d = model.d;
    jet.value = eval_checked(model, z);
    jet.sub = model.H1 ? model.H1(z) : Matrix::Zero(model.d, model.d);
    if (order < 1) return jet;

    const int n = model.n;
    const int ncoord = 2 * n + (model.time_dependent ? 1 : 0);

    jet.dq.resize(n);
    jet.dp.resize(n);
    if (model.dH0) {
        Matrix dt;
        model.dH0(z, jet.dq, jet.dp, model.time_dependent ? &dt : nullptr);
        if (model.time_dependent) jet.dt = dt;
    } else {
        for (int a = 0; a < ncoord; ++a) {
            const double h = fd_step(model.coord_scale(a));
            Matrix der = (eval_checked(model, shifted(z, a, h)) -
                          eval_checked(model, shifted(z, a, -h))) /
                         (2.0 * h);
            if (a < n)
                jet.dq[a] = std::move(der);
            else if (a < 2 * n)
                jet.dp[a - n] = std::move(der);
            else
                jet.dt = std::move(der);
        }
    }
    if (order < 2) return jet;

    const int m = 2 * n;
    jet.d2.resize(static_cast<size_t>(m * (m + 1) / 2));
    size_t idx = 0;
    for (int a = 0; a < m; ++a) {
        const double ha = fd_step(model.coord_scale(a));
        for (int b = a; b < m; ++b, ++idx) {
            if (a == b) {
                jet.d2[idx] = (eval_checked(model, shifted(z, a, ha)) - 2.0 * jet.value +
                               eval_checked(model, shifted(z, a, -ha))) /
                              (ha * ha);
            } else {
                const double hb = fd_step(model.coord_scale(b));
                jet.d2[idx] =
                    (eval_checked(model, shifted(shifted(z, a, ha), b, hb)) -
                     eval_checked(model, shifted(shifted(z, a, ha), b, -hb)) -
                     eval_checked(model, shifted(shifted(z, a, -ha), b, hb)) +
                     eval_checked(model, shifted(shifted(z, a, -ha), b, -hb))) /
                    (4.0 * ha * hb);
            }
        }
    }
    jet.has_second = true;
    return jet;
}

namespace {

void require_first_partials(const SymbolJet& A, const SymbolJet& B) {
    if (A.n != B.n || A.d != B.d)
        throw DimensionMismatch("jet dimensions do not match");
    if (A.dq.size() != static_cast<size_t>(A.n) || B.dq.size() != static_cast<size_t>(B.n))
        throw DimensionMismatch("first partials required");
}

} // namespace

Matrix poisson_bracket(const SymbolJet& A, const SymbolJet& B) {
    require_first_partials(A, B);
    Matrix out = Matrix::Zero(A.d, A.d);
    for (int j = 0; j < A.n; ++j) out += A.dp[j] * B.dq[j] - A.dq[j] * B.dp[j];
    return out;
}

Matrix sandwich_bracket(const SymbolJet& A, const Matrix& B, const SymbolJet& C) {
    require_first_partials(A, C);
    if (B.rows() != A.d || B.cols() != A.d)
        throw DimensionMismatch("middle factor has wrong dimension");
    Matrix out = Matrix::Zero(A.d, A.d);
    for (int j = 0; j < A.n; ++j)
        out += A.dp[j] * B * C.dq[j] - A.dq[j] * B * C.dp[j];
    return out;
}

Matrix moyal_subprincipal_pair(const SymbolJet& A, const SymbolJet& B) {
    require_first_partials(A, B);
    const Complex ihalf(0.0, 0.5);
    return A.sub * B.value + A.value * B.sub - ihalf * poisson_bracket(A, B);
}

Matrix moyal_subprincipal_triple(const SymbolJet& A, const SymbolJet& B, const SymbolJet& C) {
    require_first_partials(A, B);
    require_first_partials(B, C);
    const Complex ihalf(0.0, 0.5);
    Matrix out = A.sub * B.value * C.value + A.value * B.sub * C.value +
                 A.value * B.value * C.sub;
    out -= ihalf * (A.value * poisson_bracket(B, C) + poisson_bracket(A, B) * C.value +
                    sandwich_bracket(A, B.value, C));
    return out;
}

} // namespace adiabatica
