#pragma once

#include <functional>

#include "adiabatica/linalg.hpp"
#include "adiabatica/symbols.hpp"

namespace adiabatica {

/// Periodic position grid x_j = x_min + j*dx with the matching discrete
/// momentum grid p_k = (2 pi eps / L) k, k in [-N/2, N/2).
struct Grid {
    double x_min = -8.0, x_max = 8.0;
    int N = 1024;
    double epsilon = 1.0 / 16;

    double L() const { return x_max - x_min; }
    double dx() const { return L() / N; }
    double dp() const { return 2.0 * M_PI * epsilon / L(); }
    double x(int j) const { return x_min + j * dx(); }
    /// Signed momentum index k in [-N/2, N/2).
    double p(int k) const { return dp() * k; }
    /// Momentum for DFT bin index in [0, N): bins >= N/2 alias to negative k.
    double p_of_bin(int kbin) const { return p(kbin < N / 2 ? kbin : kbin - N); }

    bool operator==(const Grid& o) const {
        return x_min == o.x_min && x_max == o.x_max && N == o.N && epsilon == o.epsilon;
    }
};

/// State vector of length N*d, component index fastest: values[j*d + a].
struct WaveFunction {
    Grid grid;
    int d = 1;
    Eigen::VectorXcd values;

    double norm() const { return values.norm() * std::sqrt(grid.dx()); }
    void normalize() { values /= norm(); }
};

struct QuantumOperator {
    Grid grid;
    int d = 1;
    Matrix mat; // (N*d) x (N*d), row index j*d + a
};

struct SpectralOp {
    Grid grid;
    int d = 1;
    Spectral spec;
};

using ScalarSymbolFn = std::function<double(double q, double p)>;
using MatrixSymbolFn = std::function<Matrix(double q, double p)>;

/// Discrete Weyl operator: A_{(j,a),(l,b)} = (1/N) sum_k [A(x_s, p_k)]_{ab}
/// exp(2 pi i k (j-l)/N), where x_s is the midpoint of x_j and x_l nearest on
/// the position circle (the plain arithmetic midpoint for |j-l| < N/2; both
/// equidistant midpoints are averaged on the antipodal class of even N).
/// Exact for Op(1) and multiplication operators.
QuantumOperator weyl_quantize(const MatrixSymbolFn& symbol, int d, const Grid& grid,
                              bool check_hermitian = true);

/// Op(a * I_d) for a scalar symbol.
QuantumOperator weyl_quantize_scalar(const ScalarSymbolFn& symbol, int d, const Grid& grid);

/// H0 + eps*H1 of a registry model as a grid symbol (n = 1 models only).
MatrixSymbolFn hamiltonian_symbol(const SymbolModel& model, double epsilon);

/// pi0 (order 0) or pi0 + eps*pi1 (order 1) of the model's band.
MatrixSymbolFn projector_symbol(const SymbolModel& model, double epsilon, int order);

Complex trace_pair(const QuantumOperator& A, const QuantumOperator& B);

/// (1/N) sum_{j,k} tr(A(x_j,p_k) B(x_j,p_k)): the phase-space side of the
/// trace-of-product formula.
Complex phase_space_trace(const MatrixSymbolFn& A, const MatrixSymbolFn& B, int d,
                          const Grid& grid);

SpectralOp diagonalize(const QuantumOperator& H);

/// psi(t) = V exp(-i Lambda t / eps) V^dag psi.
WaveFunction propagate(const SpectralOp& H, const WaveFunction& psi, double t);

QuantumOperator op_function(const SpectralOp& H, const std::function<double(double)>& f);

WaveFunction apply(const QuantumOperator& A, const WaveFunction& psi);

Complex expectation(const QuantumOperator& A, const WaveFunction& psi);

struct ProjectorResult {
    QuantumOperator pi_hat; // spectral rounding of P0: exact projector
    QuantumOperator P0;     // Op(pi0 + eps*pi1)
    double defect = 0;      // ||pi_hat - P0|| = max_i min(|lambda_i|, |1-lambda_i|)
    int rank = 0;
};

/// Quantized super-adiabatic projector of the model's band at grid.epsilon.
/// Throws ClusterGapViolation when any P0 eigenvalue lands in [0.25, 0.75].
ProjectorResult superadiabatic_projector(const SymbolModel& model, const Grid& grid);

/// Collar geometry for periodized_for_grid, as fractions of each axis
/// half-width X: the map is the identity on |y| < core*X and flattens the
/// coordinate to 0 between edge*X and the torus seam at X. p_core_min keeps
/// a minimum physical core radius on momentum axes when the momentum torus
/// (half-width pi*eps*N/L) becomes small.
struct CollarParams {
    double q_core = 0.5, q_edge = 0.95;
    double p_core = 0.55, p_edge = 0.97;
    double p_core_min = 0.0;
};

/// Smooth periodization of a symbol for quantization on the grid torus.
/// The discrete Weyl calculus needs symbols that are smooth and periodic in
/// both q and p; a confining symbol jumps at the seam and seeds spurious
/// mid-gap states of Op(pi0 + eps*pi1). Each non-periodic axis is composed
/// with an odd C^inf collar map that is the identity on a core region and
/// flattens to 0 at the seam, so the composed symbol is smooth on the torus
/// and agrees with the original wherever the physics lives. Axes the model
/// declares periodic are left untouched. H0/H1, analytic derivatives, and the
/// two-level fast path are all wrapped (chain rule on the diagonal Jacobian).
SymbolModel periodized_for_grid(const SymbolModel& model, const Grid& grid,
                                const CollarParams& collar = {});

/// Scalar discrete Wigner transform, an N x N real array indexed (j, kbin):
/// W(x_j, p) = dx * sum_s psi(x_j + s dx/2) psi^dag(x_j - s dx/2)
/// exp(-i p s dx / eps), traced over the fast index. Half-step displacements
/// come from band-limited (Fourier) upsampling of psi onto the dx/2 grid;
/// displacements leaving the domain contribute zero. Column kbin holds the
/// DFT bin (see Grid::p_of_bin).
/// Normalization: sum_{j,k} W * dx*dp/(2 pi eps) = ||psi||^2 for states
/// localized away from the boundary.
RealMat wigner_trace(const WaveFunction& psi);

/// Matrix-valued Wigner transform at a single phase-space bin (test support).
Matrix wigner_matrix(const WaveFunction& psi, int j, int k);

/// Band Wigner function w = (1 - i eps tr(pi0 {pi0, pi0})) * tr W.
RealMat band_wigner(const WaveFunction& psi, const SymbolModel& model, double epsilon);

/// Gaussian wave packet exp(i p0 (x-q0)/eps) exp(-(x-q0)^2/(2 eps sigma^2)),
/// normalized, optionally with a fast-space spinor amplitude.
WaveFunction gaussian_packet(const Grid& grid, int d, double q0, double p0, double sigma,
                             const Eigen::VectorXcd& spinor);

} // namespace adiabatica
