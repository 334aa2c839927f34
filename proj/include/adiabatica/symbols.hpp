#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "adiabatica/errors.hpp"

namespace adiabatica {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

/// Phase-space point z = (q, p), with optional time for non-autonomous symbols.
struct PhasePoint {
    RealVec q, p;
    std::optional<double> t;

    int n() const { return static_cast<int>(q.size()); }

    static PhasePoint make(double q0, double p0) {
        PhasePoint z;
        z.q = RealVec::Constant(1, q0);
        z.p = RealVec::Constant(1, p0);
        return z;
    }
};

struct TwoLevelForm; // twolevel.hpp

/// An operator-valued symbol H(z) = H0(z) + eps*H1(z) on 2n-dimensional phase
/// space, values in the Hermitian d x d matrices. Evaluators are arbitrary
/// callables; analytic first derivatives are optional (finite differences
/// otherwise).
struct SymbolModel {
    int n = 1;
    int d = 2;
    bool time_dependent = false;

    std::function<Matrix(const PhasePoint&)> H0;
    std::function<Matrix(const PhasePoint&)> H1; // null => identically zero

    // Fills dq[0..n), dp[0..n) and *dt (when time dependent and dt != nullptr).
    std::function<void(const PhasePoint&, std::vector<Matrix>&, std::vector<Matrix>&, Matrix*)>
        dH0;

    std::vector<double> scale; // FD scale per coordinate (q_1..q_n, p_1..p_n, t); empty => 1
    double gap_promise = 0.1;
    int band_index = 0;

    std::vector<bool> periodic;
    std::vector<double> period;

    // Closed-form fast path for d = 2 symbols H0 = c + b.sigma (twolevel.hpp).
    std::shared_ptr<const TwoLevelForm> two_level;

    double coord_scale(int alpha) const {
        if (alpha < static_cast<int>(scale.size())) return scale[alpha];
        return 1.0;
    }
};

/// Value and partial derivatives of a symbol at one phase-space point.
/// `sub` carries the subprincipal part A1 (zero matrix when the symbol has
/// none). Second partials are stored over z = (q_1..q_n, p_1..p_n) as the
/// upper triangle in row-major pair order.
struct SymbolJet {
    int n = 0, d = 0;
    Matrix value;
    std::vector<Matrix> dq, dp;
    std::optional<Matrix> dt;
    Matrix sub;
    std::vector<Matrix> d2;
    bool has_second = false;

    const Matrix& dz(int alpha) const { return alpha < n ? dq[alpha] : dp[alpha - n]; }

    const Matrix& second(int a, int b) const;

    static SymbolJet from_parts(const Matrix& value, std::vector<Matrix> dq,
                                std::vector<Matrix> dp);
};

/// Central-difference step h = (machine eps)^(1/3) * scale.
double fd_step(double scale);

/// Evaluate value and partials of H0 up to `order` (0, 1 or 2); the H1 value
/// is placed in the jet's subprincipal slot.
SymbolJet evaluate_jet(const SymbolModel& model, const PhasePoint& z, int order);

Matrix poisson_bracket(const SymbolJet& A, const SymbolJet& B);

/// {A|B|C} = sum_j dp_j(A) B dq_j(C) - dq_j(A) B dp_j(C).
Matrix sandwich_bracket(const SymbolJet& A, const Matrix& B, const SymbolJet& C);

/// (A#B)_1 = A1 B0 + A0 B1 - (i/2){A0, B0}.
Matrix moyal_subprincipal_pair(const SymbolJet& A, const SymbolJet& B);

/// (A#B#C)_1, see the triple-product expansion.
Matrix moyal_subprincipal_triple(const SymbolJet& A, const SymbolJet& B, const SymbolJet& C);

bool is_hermitian(const Matrix& A, double tol = 1e-12);

} // namespace adiabatica
