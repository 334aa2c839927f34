#pragma once

#include <string>
#include <vector>

#include "adiabatica/flow.hpp"
#include "adiabatica/quantum.hpp"

namespace adiabatica {

/// Measured error over a decreasing epsilon sweep.
struct ErrorCurve {
    std::vector<double> epsilons; // decreasing, >= 3 entries for fitting
    std::vector<double> errors;
    std::string experiment, model, mode;
    double t = 0;
    int N = 0;
};

/// Least-squares line through (log eps, log err).
struct OrderFit {
    double slope = 0, intercept = 0, r_squared = 0;
    bool exact = false; // all errors below 1e-14; slope not meaningful
};

OrderFit fit_order(const ErrorCurve& curve);

/// Shared per-(model, grid) spectral data so one sweep point can feed several
/// experiments: the dense Hamiltonian, its eigendecomposition, and the
/// rounded projector onto the almost-invariant subspace.
struct GridPack {
    Grid grid;
    QuantumOperator H;
    SpectralOp Hs;
    ProjectorResult proj;

    static GridPack build(const SymbolModel& model, const Grid& grid);
};

/// || pihat (A(t) - Op(a o phi^t)) pihat || with A(t) the Heisenberg evolution
/// of Op(a) and phi^t the classical flow in the given mode.
double egorov_error(const SymbolModel& model, const ScalarSymbolFn& a, double t,
                    FlowMode mode, const GridPack& pack, const FlowConfig& cfg = {});

/// (2 pi eps) * | Tr(pihat f(H) Op(a)) - (2 pi eps)^{-1} integral f(h) a rho |.
/// With corrections off, M, the order-eps energy term and the measure density
/// are all dropped from the right-hand side and pihat uses the bare symbol.
double equilibrium_error(const SymbolModel& model, const std::function<double(double)>& f,
                         const ScalarSymbolFn& a, const GridPack& pack,
                         bool corrections = true);

/// | <psi(t), Op(a) psi(t)> - integral dlambda_eps (w o phi^{-t}) a |, with
/// psi0 projected into ran pihat and renormalized first.
double wigner_transport_error(const SymbolModel& model, const WaveFunction& psi0,
                              const ScalarSymbolFn& a, double t, const GridPack& pack,
                              const FlowConfig& cfg = {});

/// || [pihat, e^{-iHt/eps}] ||.
double projector_invariance(double t, const GridPack& pack);

/// || pihat (Op(h) - H) pihat ||; include_M toggles the order-eps energy
/// correction inside h.
double effective_hamiltonian_residual(const SymbolModel& model, const GridPack& pack,
                                      bool include_M = true);

/// Scalar symbol with analytic first derivatives, enough to form {a, b}.
struct ScalarSymbol1 {
    ScalarSymbolFn value, dq, dp;
};

/// || [Op(a), Op(b)] + i eps Op({a, b}) || for scalar symbols (d = 1).
double moyal_commutator_error(const ScalarSymbol1& a, const ScalarSymbol1& b,
                              const Grid& grid);

} // namespace adiabatica
