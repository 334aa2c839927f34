#pragma once

#include "adiabatica/band.hpp"
#include "adiabatica/flow.hpp"

namespace adiabatica {

/// Curvature blocks over the kappa-torus at fixed time.
struct MixedCurvature {
    RealVec Omega_pt; // -i tr(pi0 [d_kappa pi0, d_t pi0]), zero when static
    RealMat Omega_pp; // -i tr(pi0 [d_{kappa_i} pi0, d_{kappa_j} pi0])
};

MixedCurvature mixed_curvature(const SymbolModel& model, double t, const RealVec& kappa);

/// Weak-field mixed blocks derived from Omega_pp and the skew field matrix B.
RealMat omega_pq_from_field(const RealMat& Omega_pp, const RealMat& B);  //  1/2 Omega_pp B
RealMat omega_qq_from_field(const RealMat& Omega_pp, const RealMat& B);  // -1/4 B Omega_pp B

/// j(t) = integral of Omega_pt over the kappa-torus with measure dk/(2 pi)^m,
/// by the trapezoid rule (spectrally convergent for smooth gapped bands).
RealVec pump_current(const SymbolModel& model, double t, int nodes);

/// Q = integral of j(t) over one pump period T; each component is within 1e-3
/// of an integer for a gapped pump at 128 nodes per axis.
RealVec pumped_charge(const SymbolModel& model, double T, int nodes);

/// Chern number of the band over the (t, kappa) 2-torus of an m = 1 pump.
/// Plaquette Berry-flux algorithm on projector Wilson loops; exact integer by
/// construction. Orientation: plaquettes traversed counterclockwise in the
/// (kappa, t) plane, which makes chern_number carry the same sign as the
/// pumped charge (the period integral of the Omega_pt current).
int chern_number(const SymbolModel& model, double T, int nodes_t, int nodes_k);

/// Same plaquette algorithm over a fixed-time (kappa_i, kappa_j) plane through
/// base; the remaining kappa components are held at base.
int chern_number_plane(const SymbolModel& model, double t, int axis_i, int axis_j,
                       const RealVec& base, int nodes);

struct PiezoResult {
    RealVec term1;      // Bvec * integral of Omega_vec . grad e0 over the torus
    double div_max = 0; // max-norm of the spectral divergence of Omega_vec
};

/// The cancellation identity behind the Piezo current: with
/// Omega_vec_i = 1/2 eps_{ijk} Omega_pp_{jk}, the torus integral of
/// Omega_vec . grad e0 vanishes because div Omega_vec = 0 (closedness).
PiezoResult piezo_cancellation(const SymbolModel& model, const RealMat& B, double t,
                               int nodes);

/// Density of the Bloch Liouville measure, 1 + eps Omega_vec . Bvec (m = 3).
double bloch_density(const SymbolModel& model, double t, const RealVec& kappa, double eps,
                     const RealMat& B);

/// Weak-field semiclassical Bloch dynamics in (q, kappa):
/// qdot = (1 + eps Omega_pp B) grad_kappa h + eps Omega_pt, kappadot = B qdot.
Trajectory bloch_flow(const SymbolModel& model, const RealVec& q0, const RealVec& kappa0,
                      double t0, double t1, double eps, const RealMat& B,
                      const FlowConfig& cfg = {});

} // namespace adiabatica
