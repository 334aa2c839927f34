#pragma once

#include <functional>
#include <vector>

#include "adiabatica/band.hpp"
#include "adiabatica/symbols.hpp"

namespace adiabatica {

enum class FlowMode {
    corrected_truncated, // the printed first-order equations of motion
    corrected_exact,     // invert omega_eps exactly
    uncorrected          // Omega and M dropped
};

enum class IntegratorKind { rk4_fixed, rk45_adaptive };

struct FlowConfig {
    double epsilon = 0.0;
    FlowMode mode = FlowMode::corrected_truncated;
    IntegratorKind integrator = IntegratorKind::rk4_fixed;
    double dt = 0.0; // 0 => min(1e-3, eps/10), or 1e-3 at eps = 0
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    bool jacobian = false;
    double gap_min = 0.1;
    double jacobian_step = 1e-5; // directional-derivative step scale

    double step_size() const {
        if (dt > 0) return dt;
        return epsilon > 0 ? std::min(1e-3, epsilon / 10.0) : 1e-3;
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<RealVec> points;
    std::vector<double> h_values;
    std::vector<double> densities;
    std::vector<RealMat> jacobians; // present when cfg.jacobian
};

/// Right-hand side of the corrected equations of motion at (t, z), z = (q, p).
RealVec vector_field(const SymbolModel& model, const RealVec& z, double t,
                     const FlowConfig& cfg);

/// Effective Hamiltonian value along the flow (fast closed-form path when the
/// model provides one).
double effective_h(const SymbolModel& model, const RealVec& z, double t,
                   const FlowConfig& cfg);

double flow_density(const SymbolModel& model, const RealVec& z, double t,
                    const FlowConfig& cfg);

Trajectory integrate(const SymbolModel& model, const RealVec& z0, double t0, double t1,
                     const FlowConfig& cfg);

/// Endpoint of the flow map phi^{t1,t0}(z0), without storing the path.
RealVec flow_point(const SymbolModel& model, const RealVec& z0, double t0, double t1,
                   const FlowConfig& cfg);

/// a(phi^{t,t0}(z)) for each target z. Targets evaluate independently in
/// parallel; output order matches input order regardless of scheduling.
/// `skip` (optional) marks targets whose value is known to be negligible;
/// those return `skip_value` without integrating.
std::vector<double> pullback(const SymbolModel& model,
                             const std::function<double(const RealVec&)>& a,
                             const std::vector<RealVec>& targets, double t, double t0,
                             const FlowConfig& cfg,
                             const std::function<bool(const RealVec&)>& skip = nullptr,
                             double skip_value = 0.0);

/// | rho_eps(phi^t(z0)) det D phi^t - rho_eps(z0) |.
double liouville_invariance_defect(const SymbolModel& model, const RealVec& z0, double t,
                                   double eps, FlowConfig cfg);

} // namespace adiabatica
