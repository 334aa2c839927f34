#pragma once

#include <utility>
#include <vector>

#include "adiabatica/symbols.hpp"

namespace adiabatica {

/// e0, rank-1 projection and spectral gap of one eigenvalue band at a point.
struct BandPoint {
    double e0 = 0;
    Matrix pi0;
    double gap = 0;
};

/// Full per-point spectral package. Omega is over z = (q_1..q_n, p_1..p_n);
/// the optional time columns are filled for time-dependent models.
struct BandData {
    double e0 = 0, gap = 0;
    Matrix pi0;
    std::vector<Matrix> dpi0; // 2n entries, plus time derivative appended when present
    double M = 0, e1 = 0, h = 0;
    RealVec grad_h;
    RealMat Omega;
    RealVec Omega_qt, Omega_pt;
    double liouville_density = 1.0;
};

enum class DerivMethod { resolvent, finite_difference, cross_validated };

BandPoint spectral_band(const Matrix& H0, int band_index, double gap_min);

/// Derivatives of z -> pi0(z) over (q_1..q_n, p_1..p_n[, t]). Default method
/// is the reduced-resolvent formula; cross_validated also runs central
/// differences of pi0 and demands agreement to 1e-6.
std::vector<Matrix> projector_derivatives(const SymbolModel& model, const PhasePoint& z,
                                          DerivMethod method = DerivMethod::resolvent,
                                          double gap_min = 0.1);

/// M = (i/2) tr({pi0|H0|pi0}); also evaluates -(i/2) tr(pi0 {pi0, H0-e0}) and
/// requires both routes to agree.
double energy_correction_M(const SymbolJet& jet, const Matrix& pi0,
                           const std::vector<Matrix>& dpi0, double e0);

/// Omega_{ab} = -i tr(pi0 [d_a pi0, d_b pi0]). When dpi0 carries a trailing
/// time derivative the qt/pt columns are written to the output vectors.
RealMat berry_curvature(const Matrix& pi0, const std::vector<Matrix>& dpi0, int n,
                        RealVec* Omega_qt = nullptr, RealVec* Omega_pt = nullptr);

/// h = e0 + eps tr(H1 pi0) + eps M and its gradient by central differences of
/// the scalar field.
std::pair<double, RealVec> effective_hamiltonian(const SymbolModel& model, const PhasePoint& z,
                                                 double eps, double gap_min = 0.1);

/// 1 + (eps/2) sum_j (Omega^{qp}_jj - Omega^{pq}_jj), checked against
/// 1 + i eps tr(pi0 {pi0, pi0}).
double liouville_density(const Matrix& pi0, const std::vector<Matrix>& dpi0,
                         const RealMat& Omega, double eps, int n);

/// Subprincipal projector pi1: diagonal blocks fixed by the Moyal projector
/// identity, off-diagonal blocks from the order-eps commutation equation via
/// the reduced resolvent.
Matrix subprincipal_projector(const SymbolModel& model, const PhasePoint& z,
                              double gap_min = 0.1);

struct BandOptions {
    double gap_min = 0.1;
    bool want_gradient = true;
    bool want_curvature = true;
    bool include_M = true; // uncorrected flow drops M from h
};

BandData band_data(const SymbolModel& model, const PhasePoint& z, double eps,
                   const BandOptions& opts = {});

} // namespace adiabatica
