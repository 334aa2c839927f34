#include "adiabatica/flow.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

#include "adiabatica/twolevel.hpp"

namespace adiabatica {

namespace {

constexpr int kMaxDim = 6; // 2n with n <= 3 on the stack-allocated fast path

struct FieldEval {
    const SymbolModel& model;
    const FlowConfig& cfg;
    int n;

    bool fast() const { return static_cast<bool>(model.two_level); }

    void pack(const double* z, double t, double* x) const {
        std::memcpy(x, z, sizeof(double) * static_cast<size_t>(2 * n));
        if (model.time_dependent) x[2 * n] = t;
    }

    double h(double t, const double* z) const {
        const bool with_M = cfg.mode != FlowMode::uncorrected;
        if (fast()) {
            double x[kMaxDim + 1];
            pack(z, t, x);
            return tl_h(*model.two_level, x, cfg.epsilon, model.band_index, with_M);
        }
        PhasePoint zp = to_point(z, t);
        BandOptions opts;
        opts.gap_min = cfg.gap_min;
        opts.want_gradient = false;
        opts.want_curvature = false;
        opts.include_M = with_M;
        return band_data(model, zp, cfg.epsilon, opts).h;
    }

    double density(double t, const double* z) const {
        if (cfg.mode == FlowMode::uncorrected || cfg.epsilon == 0.0) return 1.0;
        if (fast()) {
            double x[kMaxDim + 1];
            pack(z, t, x);
            TLBand band;
            tl_band(*model.two_level, x, cfg.epsilon, model.band_index, false, true, true,
                    band);
            return band.density;
        }
        PhasePoint zp = to_point(z, t);
        BandOptions opts;
        opts.gap_min = cfg.gap_min;
        opts.want_gradient = false;
        return band_data(model, zp, cfg.epsilon, opts).liouville_density;
    }

    PhasePoint to_point(const double* z, double t) const {
        PhasePoint zp;
        zp.q = Eigen::Map<const RealVec>(z, n);
        zp.p = Eigen::Map<const RealVec>(z + n, n);
        if (model.time_dependent) zp.t = t;
        return zp;
    }

    void operator()(double t, const double* z, double* out) const {
        const double eps = cfg.epsilon;
        const bool corrected = cfg.mode != FlowMode::uncorrected && eps != 0.0;

        double grad[kMaxDim];
        double Omega[kMaxDim][kMaxDim] = {};
        double Oqt[3] = {}, Opt[3] = {};

        if (fast()) {
            double x[kMaxDim + 1];
            pack(z, t, x);
            TLBand band;
            tl_band(*model.two_level, x, eps, model.band_index, true, corrected,
                    cfg.mode != FlowMode::uncorrected, band);
            std::memcpy(grad, band.grad_h, sizeof(grad));
            if (corrected) {
                for (int a = 0; a < 2 * n; ++a)
                    for (int b = 0; b < 2 * n; ++b) Omega[a][b] = band.Omega[a][b];
                for (int j = 0; j < n; ++j) {
                    Oqt[j] = band.Omega_qt[j];
                    Opt[j] = band.Omega_pt[j];
                }
            }
        } else {
            BandOptions opts;
            opts.gap_min = cfg.gap_min;
            opts.want_curvature = corrected;
            opts.include_M = cfg.mode != FlowMode::uncorrected;
            BandData band = band_data(model, to_point(z, t), eps, opts);
            for (int a = 0; a < 2 * n; ++a) grad[a] = band.grad_h[a];
            if (corrected) {
                for (int a = 0; a < 2 * n; ++a)
                    for (int b = 0; b < 2 * n; ++b) Omega[a][b] = band.Omega(a, b);
                if (band.Omega_qt.size() == n)
                    for (int j = 0; j < n; ++j) {
                        Oqt[j] = band.Omega_qt[j];
                        Opt[j] = band.Omega_pt[j];
                    }
            }
        }

        if (!corrected) {
            for (int i = 0; i < n; ++i) {
                out[i] = grad[n + i];
                out[n + i] = -grad[i];
            }
            return;
        }

        if (cfg.mode == FlowMode::corrected_truncated) {
            for (int i = 0; i < n; ++i) {
                double dq = grad[n + i] + eps * Opt[i];
                double dp = -grad[i] - eps * Oqt[i];
                for (int j = 0; j < n; ++j) {
                    dq += eps * (Omega[n + i][j] * grad[n + j] -
                                 Omega[n + i][n + j] * grad[j]);
                    dp += eps * (Omega[i][n + j] * grad[j] - Omega[i][j] * grad[n + j]);
                }
                out[i] = dq;
                out[n + i] = dp;
            }
            return;
        }

        // corrected_exact: solve omega_eps X = -grad h
        double onorm = 0;
        for (int a = 0; a < 2 * n; ++a)
            for (int b = 0; b < 2 * n; ++b) onorm = std::max(onorm, std::abs(Omega[a][b]));
        if (eps * onorm >= 1.0)
            throw SingularForm("eps * |Omega| >= 1, omega_eps may be degenerate");

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        Eigen::VectorXd rhs(2 * n);
        for (int i = 0; i < n; ++i) {
            A(i, n + i) += 1.0;
            A(n + i, i) -= 1.0;
        }
        for (int a = 0; a < 2 * n; ++a) {
            rhs[a] = -grad[a];
            for (int b = 0; b < 2 * n; ++b) A(a, b) += eps * Omega[a][b];
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        Eigen::VectorXd X = lu.solve(rhs);
        for (int i = 0; i < n; ++i) {
            X[i] += eps * Opt[i];
            X[n + i] -= eps * Oqt[i];
        }
        for (int a = 0; a < 2 * n; ++a) out[a] = X[a];
    }
};

/// RHS of the combined (state, variational) system.
struct CombinedField {
    const FieldEval& field;
    int dim;       // 2n
    bool jacobian; // when set, state layout is [z, J columns]

    int size() const { return jacobian ? dim + dim * dim : dim; }

    void operator()(double t, const double* y, double* out) const {
        field(t, y, out);
        if (!jacobian) return;
        // J' = (D_z X) J with D_z X by central differences of the field
        double fp[kMaxDim], fm[kMaxDim], zp[kMaxDim];
        double DX[kMaxDim][kMaxDim];
        for (int j = 0; j < dim; ++j) {
            const double step =
                field.cfg.jacobian_step * std::max(1.0, std::abs(y[j]));
            std::memcpy(zp, y, sizeof(double) * static_cast<size_t>(dim));
            zp[j] += step;
            field(t, zp, fp);
            zp[j] -= 2 * step;
            field(t, zp, fm);
            for (int i = 0; i < dim; ++i) DX[i][j] = (fp[i] - fm[i]) / (2 * step);
        }
        const double* J = y + dim;
        double* Jd = out + dim;
        for (int c = 0; c < dim; ++c)
            for (int i = 0; i < dim; ++i) {
                double s = 0;
                for (int k = 0; k < dim; ++k) s += DX[i][k] * J[c * dim + k];
                Jd[c * dim + i] = s;
            }
    }
};

constexpr int kMaxState = kMaxDim + kMaxDim * kMaxDim;

void rk4_step(const CombinedField& f, double t, double dt, double* y, double* work) {
    const int m = f.size();
    double* k1 = work;
    double* k2 = work + kMaxState;
    double* k3 = work + 2 * kMaxState;
    double* k4 = work + 3 * kMaxState;
    double* tmp = work + 4 * kMaxState;
    f(t, y, k1);
    for (int i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    f(t + 0.5 * dt, tmp, k2);
    for (int i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    f(t + 0.5 * dt, tmp, k3);
    for (int i = 0; i < m; ++i) tmp[i] = y[i] + dt * k3[i];
    f(t + dt, tmp, k4);
    for (int i = 0; i < m; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

// Dormand-Prince 5(4) coefficients
const double DP_C[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
const double DP_A[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
const double DP_B5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                         11.0 / 84, 0};
const double DP_B4[7] = {5179.0 / 57600,    0,           7571.0 / 16695, 393.0 / 640,
                         -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

/// One adaptive attempt; returns the error estimate and writes the candidate
/// state into ynew.
double dp_attempt(const CombinedField& f, double t, double dt, const double* y,
                  double* ynew, double rel, double abs, double* work) {
    const int m = f.size();
    double* k = work; // 7 stages
    double* tmp = work + 7 * kMaxState;
    for (int s = 0; s < 7; ++s) {
        for (int i = 0; i < m; ++i) {
            double acc = y[i];
            for (int j = 0; j < s; ++j) acc += dt * DP_A[s][j] * k[j * kMaxState + i];
            tmp[i] = acc;
        }
        f(t + DP_C[s] * dt, tmp, k + s * kMaxState);
    }
    double err = 0;
    for (int i = 0; i < m; ++i) {
        double y5 = y[i], y4 = y[i];
        for (int s = 0; s < 7; ++s) {
            y5 += dt * DP_B5[s] * k[s * kMaxState + i];
            y4 += dt * DP_B4[s] * k[s * kMaxState + i];
        }
        ynew[i] = y5;
        const double sc = abs + rel * std::max(std::abs(y[i]), std::abs(y5));
        const double e = (y5 - y4) / sc;
        err += e * e;
    }
    return std::sqrt(err / m);
}

struct StepperResult {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

StepperResult run_integrator(const CombinedField& f, const double* y0, double t0, double t1,
                             const FlowConfig& cfg, bool record_path) {
    const int m = f.size();
    StepperResult out;
    std::vector<double> y(y0, y0 + m);
    double t = t0;
    out.times.push_back(t);
    if (record_path) out.states.emplace_back(y);

    const double span = t1 - t0;
    if (span == 0.0) {
        if (!record_path) out.states.emplace_back(y);
        return out;
    }
    const double dir = span > 0 ? 1.0 : -1.0;

    if (cfg.integrator == IntegratorKind::rk4_fixed) {
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) /
                                                                 cfg.step_size())));
        const double dt = span / steps;
        double work[6 * kMaxState];
        for (int s = 0; s < steps; ++s) {
            rk4_step(f, t, dt, y.data(), work);
            t = t0 + (s + 1) * dt;
            out.times.push_back(t);
            if (record_path) out.states.emplace_back(y);
        }
    } else {
        double work[9 * kMaxState];
        std::vector<double> ynew(m);
        double dt = dir * std::min(std::abs(span), cfg.step_size() * 10.0);
        const double dt_min = std::abs(span) * 1e-12;
        long iter = 0;
        while (dir * (t1 - t) > 0) {
            if (++iter > 100000000L) throw StepFailure("adaptive step count exceeded");
            if (dir * (t + dt - t1) > 0) dt = t1 - t;
            const double err = dp_attempt(f, t, dt, y.data(), ynew.data(), cfg.rel_tol,
                                          cfg.abs_tol, work);
            if (err <= 1.0) {
                t += dt;
                y = ynew;
                out.times.push_back(t);
                if (record_path) out.states.emplace_back(y);
            }
            const double fac =
                std::clamp(0.9 * std::pow(err > 0 ? err : 1e-16, -0.2), 0.2, 5.0);
            dt *= fac;
            if (std::abs(dt) < dt_min) throw StepFailure("adaptive step size underflow");
        }
    }
    if (!record_path) out.states.emplace_back(y);
    return out;
}

} // namespace

RealVec vector_field(const SymbolModel& model, const RealVec& z, double t,
                     const FlowConfig& cfg) {
    if (z.size() != 2 * model.n) throw DimensionMismatch("phase point has wrong dimension");
    FieldEval field{model, cfg, model.n};
    RealVec out(2 * model.n);
    field(t, z.data(), out.data());
    return out;
}

double effective_h(const SymbolModel& model, const RealVec& z, double t,
                   const FlowConfig& cfg) {
    FieldEval field{model, cfg, model.n};
    return field.h(t, z.data());
}

double flow_density(const SymbolModel& model, const RealVec& z, double t,
                    const FlowConfig& cfg) {
    FieldEval field{model, cfg, model.n};
    return field.density(t, z.data());
}

Trajectory integrate(const SymbolModel& model, const RealVec& z0, double t0, double t1,
                     const FlowConfig& cfg) {
    const int dim = 2 * model.n;
    FieldEval field{model, cfg, model.n};
    CombinedField cf{field, dim, cfg.jacobian};

    std::vector<double> y0(static_cast<size_t>(cf.size()), 0.0);
    for (int i = 0; i < dim; ++i) y0[static_cast<size_t>(i)] = z0[i];
    if (cfg.jacobian)
        for (int i = 0; i < dim; ++i) y0[static_cast<size_t>(dim + i * dim + i)] = 1.0;

    StepperResult res = run_integrator(cf, y0.data(), t0, t1, cfg, true);

    Trajectory traj;
    traj.times = res.times;
    traj.points.reserve(res.states.size());
    for (size_t s = 0; s < res.states.size(); ++s) {
        const double* y = res.states[s].data();
        traj.points.emplace_back(Eigen::Map<const RealVec>(y, dim));
        traj.h_values.push_back(field.h(traj.times[s], y));
        traj.densities.push_back(field.density(traj.times[s], y));
        if (cfg.jacobian) {
            RealMat J(dim, dim);
            for (int c = 0; c < dim; ++c)
                for (int i = 0; i < dim; ++i) J(i, c) = y[dim + c * dim + i];
            traj.jacobians.push_back(std::move(J));
        }
    }
    return traj;
}

RealVec flow_point(const SymbolModel& model, const RealVec& z0, double t0, double t1,
                   const FlowConfig& cfg) {
    const int dim = 2 * model.n;
    FieldEval field{model, cfg, model.n};
    FlowConfig c = cfg;
    c.jacobian = false;
    CombinedField cf{field, dim, false};
    std::vector<double> y0(z0.data(), z0.data() + dim);
    StepperResult res = run_integrator(cf, y0.data(), t0, t1, c, false);
    return Eigen::Map<const RealVec>(res.states.back().data(), dim);
}

std::vector<double> pullback(const SymbolModel& model,
                             const std::function<double(const RealVec&)>& a,
                             const std::vector<RealVec>& targets, double t, double t0,
                             const FlowConfig& cfg,
                             const std::function<bool(const RealVec&)>& skip,
                             double skip_value) {
    std::vector<double> out(targets.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < static_cast<long>(targets.size()); ++i) {
        if (failure) continue;
        try {
            const RealVec& z = targets[static_cast<size_t>(i)];
            if (skip && skip(z)) {
                out[static_cast<size_t>(i)] = skip_value;
            } else {
                out[static_cast<size_t>(i)] =
                    t == t0 ? a(z) : a(flow_point(model, z, t0, t, cfg));
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

double liouville_invariance_defect(const SymbolModel& model, const RealVec& z0, double t,
                                   double eps, FlowConfig cfg) {
    cfg.epsilon = eps;
    cfg.jacobian = true;
    Trajectory traj = integrate(model, z0, 0.0, t, cfg);
    const double rho0 = traj.densities.front();
    const double rho1 = traj.densities.back();
    const double det = traj.jacobians.back().determinant();
    return std::abs(rho1 * det - rho0);
}

} // namespace adiabatica
