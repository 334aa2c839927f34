#include "adiabatica/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "adiabatica/errors.hpp"
#include "adiabatica/linalg.hpp"

namespace adiabatica {

namespace {

Matrix dense_propagator(const SpectralOp& H, double t) {
    const double eps = H.grid.epsilon;
    Eigen::VectorXcd phases(H.spec.evals.size());
    for (int i = 0; i < H.spec.evals.size(); ++i)
        phases[i] = std::exp(Complex(0, -H.spec.evals[i] * t / eps));
    return matmul(H.spec.V * phases.asDiagonal(), H.spec.V, 'N', 'C');
}

FlowConfig sweep_flow_config(const FlowConfig& base, double eps, FlowMode mode) {
    FlowConfig cfg = base;
    cfg.epsilon = eps;
    cfg.mode = mode;
    if (cfg.dt <= 0) cfg.dt = 1e-2; // grid-wide pullbacks: rk4 global error ~1e-8
    return cfg;
}

/// a(phi^t(z)) tabulated at every Weyl midpoint/momentum node of the grid,
/// wrapped back up as a symbol for weyl_quantize (pure index lookup).
ScalarSymbolFn pullback_symbol_table(const SymbolModel& model, const ScalarSymbolFn& a,
                                     double t, const Grid& grid, const FlowConfig& cfg,
                                     std::shared_ptr<std::vector<double>>& table) {
    const int N = grid.N;
    std::vector<RealVec> targets;
    targets.reserve(static_cast<size_t>(2 * N) * N);
    for (int s = 0; s < 2 * N; ++s) {
        const double q = grid.x_min + 0.5 * s * grid.dx();
        for (int kb = 0; kb < N; ++kb) {
            RealVec z(2);
            z << q, grid.p_of_bin(kb);
            targets.push_back(std::move(z));
        }
    }
    auto af = [&a](const RealVec& z) { return a(z[0], z[1]); };
    table = std::make_shared<std::vector<double>>(
        pullback(model, af, targets, t, 0.0, cfg));
    auto tbl = table;
    return [tbl, grid, N](double q, double p) {
        const int s = static_cast<int>(std::lround((q - grid.x_min) / (0.5 * grid.dx())));
        const int k = static_cast<int>(std::lround(p / grid.dp()));
        const int kb = (k % N + N) % N;
        return (*tbl)[static_cast<size_t>(s) * N + kb];
    };
}

} // namespace

OrderFit fit_order(const ErrorCurve& curve) {
    if (curve.epsilons.size() != curve.errors.size() || curve.epsilons.size() < 3)
        throw DegenerateFit("order fit needs >= 3 matched (epsilon, error) points");
    OrderFit fit;
    if (*std::max_element(curve.errors.begin(), curve.errors.end()) < 1e-14) {
        fit.exact = true; // errors at rounding level: no measurable order
        return fit;
    }
    std::vector<double> lx, ly;
    for (size_t i = 0; i < curve.epsilons.size(); ++i) {
        if (curve.epsilons[i] <= 0 || curve.errors[i] <= 0)
            throw DegenerateFit("order fit needs positive epsilons and errors");
        lx.push_back(std::log(curve.epsilons[i]));
        ly.push_back(std::log(curve.errors[i]));
    }
    const LineFit lf = fit_line(lx, ly);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r_squared;
    return fit;
}

GridPack GridPack::build(const SymbolModel& model, const Grid& grid) {
    GridPack pack;
    pack.grid = grid;
    pack.H = weyl_quantize(hamiltonian_symbol(model, grid.epsilon), model.d, grid);
    pack.Hs = diagonalize(pack.H);
    pack.proj = superadiabatic_projector(model, grid);
    return pack;
}

double egorov_error(const SymbolModel& model, const ScalarSymbolFn& a, double t,
                    FlowMode mode, const GridPack& pack, const FlowConfig& base_cfg) {
    const Grid& grid = pack.grid;
    const FlowConfig cfg = sweep_flow_config(base_cfg, grid.epsilon, mode);

    const Matrix U = dense_propagator(pack.Hs, t);
    const QuantumOperator A0 = weyl_quantize_scalar(a, model.d, grid);
    const Matrix At = matmul(matmul(U, A0.mat, 'C', 'N'), U); // Heisenberg A(t)

    std::shared_ptr<std::vector<double>> table;
    const ScalarSymbolFn apull = pullback_symbol_table(model, a, t, grid, cfg, table);
    const QuantumOperator Acl = weyl_quantize_scalar(apull, model.d, grid);

    const Matrix& P = pack.proj.pi_hat.mat;
    const Matrix D = matmul(matmul(P, At - Acl.mat), P);
    return operator_norm(D);
}

double equilibrium_error(const SymbolModel& model, const std::function<double(double)>& f,
                         const ScalarSymbolFn& a, const GridPack& pack, bool corrections) {
    const Grid& grid = pack.grid;
    const double eps = grid.epsilon;

    const QuantumOperator fH = op_function(pack.Hs, f);
    const QuantumOperator A0 = weyl_quantize_scalar(a, model.d, grid);
    const Complex lhs =
        trace_of_product(matmul(pack.proj.pi_hat.mat, fH.mat), A0.mat);

    // classical side: f(h) a rho over the phase-space box, trapezoid refined
    // until self-converged; corrections off keeps h = e0 and rho = 1
    FlowConfig hcfg;
    hcfg.epsilon = corrections ? eps : 0.0;
    hcfg.mode = FlowMode::corrected_truncated;
    auto integrand = [&](double q, double p) {
        RealVec z(2);
        z << q, p;
        const double h = effective_h(model, z, 0.0, hcfg);
        const double fv = f(h);
        if (fv == 0.0) return 0.0;
        const double rho = corrections ? flow_density(model, z, 0.0, hcfg) : 1.0;
        return fv * a(q, p) * rho;
    };
    const double qlo = grid.x_min, qhi = grid.x_max;
    const double plim = M_PI * eps * static_cast<double>(grid.N) / grid.L();
    double prev = 0, integral = 0;
    bool converged = false;
    for (int nodes = 256; nodes <= 8192; nodes *= 2) {
        const double hq = (qhi - qlo) / nodes, hp = 2.0 * plim / nodes;
        std::vector<double> rows(nodes); // per-row sums: thread-count invariant
#pragma omp parallel for schedule(static)
        for (int i = 0; i < nodes; ++i) {
            const double q = qlo + (i + 0.5) * hq;
            double row = 0;
            for (int j = 0; j < nodes; ++j) row += integrand(q, -plim + (j + 0.5) * hp);
            rows[i] = row * hq * hp;
        }
        integral = 0;
        for (double r : rows) integral += r;
        if (nodes > 256 && std::abs(integral - prev) < 1e-9) {
            converged = true;
            break;
        }
        prev = integral;
    }
    if (!converged)
        throw QuadratureNotConverged("equilibrium phase-space integral above 1e-9");
    return std::abs(2.0 * M_PI * eps * lhs.real() - integral);
}

double wigner_transport_error(const SymbolModel& model, const WaveFunction& psi0,
                              const ScalarSymbolFn& a, double t, const GridPack& pack,
                              const FlowConfig& base_cfg) {
    const Grid& grid = pack.grid;
    const double eps = grid.epsilon;
    const int N = grid.N;
    const FlowConfig cfg = sweep_flow_config(base_cfg, eps, FlowMode::corrected_truncated);

    WaveFunction psi = apply(pack.proj.pi_hat, psi0);
    const double nrm = psi.norm();
    if (nrm < 1e-12) throw DimensionMismatch("psi0 has no overlap with ran pi_hat");
    for (auto& v : psi.values) v /= nrm;

    const WaveFunction psit = propagate(pack.Hs, psi, t);
    const QuantumOperator A0 = weyl_quantize_scalar(a, model.d, grid);
    const double lhs = expectation(A0, psit).real();

    // rhs via change of variables z -> phi^{-t}: integral of w(z) a(phi^t z)
    // rho_eps(z), using invariance of the corrected measure; only nodes where
    // the band Wigner function is non-negligible contribute
    const RealMat w = band_wigner(psi, model, eps);
    const double wcut = 1e-13 * w.cwiseAbs().maxCoeff();
    std::vector<RealVec> targets;
    std::vector<double> weights;
    for (int j = 0; j < N; ++j)
        for (int kb = 0; kb < N; ++kb) {
            if (std::abs(w(j, kb)) < wcut) continue;
            RealVec z(2);
            z << grid.x(j), grid.p_of_bin(kb);
            targets.push_back(std::move(z));
            weights.push_back(w(j, kb));
        }
    auto af = [&a](const RealVec& z) { return a(z[0], z[1]); };
    const std::vector<double> apull = pullback(model, af, targets, t, 0.0, cfg);
    double rhs = 0;
    for (size_t i = 0; i < targets.size(); ++i) {
        const double rho = flow_density(model, targets[i], 0.0, cfg);
        rhs += weights[i] * apull[i] * rho;
    }
    rhs *= grid.dx() * grid.dp() / (2.0 * M_PI * eps);
    return std::abs(lhs - rhs);
}

double projector_invariance(double t, const GridPack& pack) {
    const Matrix U = dense_propagator(pack.Hs, t);
    const Matrix& P = pack.proj.pi_hat.mat;
    return operator_norm(matmul(P, U) - matmul(U, P));
}

double effective_hamiltonian_residual(const SymbolModel& model, const GridPack& pack,
                                      bool include_M) {
    const Grid& grid = pack.grid;
    FlowConfig hcfg;
    hcfg.epsilon = grid.epsilon;
    hcfg.mode = include_M ? FlowMode::corrected_truncated : FlowMode::uncorrected;
    auto hsym = [&](double q, double p) {
        RealVec z(2);
        z << q, p;
        return effective_h(model, z, 0.0, hcfg);
    };
    const QuantumOperator Oph = weyl_quantize_scalar(hsym, model.d, grid);
    const Matrix& P = pack.proj.pi_hat.mat;
    const Matrix D = matmul(matmul(P, Oph.mat - pack.H.mat), P);
    return operator_norm(D);
}

double moyal_commutator_error(const ScalarSymbol1& a, const ScalarSymbol1& b,
                              const Grid& grid) {
    const double eps = grid.epsilon;
    const QuantumOperator A = weyl_quantize_scalar(a.value, 1, grid);
    const QuantumOperator B = weyl_quantize_scalar(b.value, 1, grid);
    // {a, b} = dp a dq b - dq a dp b, matching {q, p} = -1
    auto bracket = [&](double q, double p) {
        return a.dp(q, p) * b.dq(q, p) - a.dq(q, p) * b.dp(q, p);
    };
    const QuantumOperator Pb = weyl_quantize_scalar(bracket, 1, grid);
    const Matrix C =
        matmul(A.mat, B.mat) - matmul(B.mat, A.mat) + Complex(0, eps) * Pb.mat;
    return operator_norm(C);
}

} // namespace adiabatica
