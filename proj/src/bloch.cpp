#include "adiabatica/bloch.hpp"

#include <cmath>
#include <fftw3.h>
#include <mutex>
#include <vector>

#include "adiabatica/errors.hpp"

namespace adiabatica {

namespace {

PhasePoint torus_point(const SymbolModel& model, double t, const RealVec& kappa) {
    PhasePoint z;
    z.q = RealVec::Zero(model.n);
    z.p = kappa;
    z.t = t;
    return z;
}

Matrix band_projector(const SymbolModel& model, double t, const RealVec& kappa) {
    const PhasePoint z = torus_point(model, t, kappa);
    return spectral_band(model.H0(z), model.band_index, 0.5 * model.gap_promise).pi0;
}

/// Dual vector of a 3x3 skew matrix: v_i = 1/2 eps_{ijk} A_{jk}.
RealVec skew_dual(const RealMat& A) {
    RealVec v(3);
    v << A(2, 1), A(0, 2), A(1, 0);
    return v;
}

/// Plaquette Berry-flux sum over a closed 2-torus of projectors, indexed
/// (i, j) with counterclockwise plaquettes. Returns the integer flux/2pi.
int plaquette_chern(const std::vector<std::vector<Matrix>>& P, int n1, int n2) {
    double total = 0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const Matrix& a = P[i][j];
            const Matrix& b = P[(i + 1) % n1][j];
            const Matrix& c = P[(i + 1) % n1][(j + 1) % n2];
            const Matrix& d = P[i][(j + 1) % n2];
            const Complex loop = (a * b * c * d).trace();
            const double flux = std::arg(loop);
            if (std::abs(flux) >= M_PI * 0.999)
                throw VortexOnPlaquette("plaquette Berry flux at pi: grid too coarse");
            total += flux;
        }
    const double c = total / (2.0 * M_PI);
    const int ci = static_cast<int>(std::lround(c));
    if (std::abs(c - ci) > 0.01)
        throw VortexOnPlaquette("plaquette flux sum is not an integer multiple of 2 pi");
    return ci;
}

} // namespace

MixedCurvature mixed_curvature(const SymbolModel& model, double t, const RealVec& kappa) {
    const PhasePoint z = torus_point(model, t, kappa);
    const int n = model.n;
    const Matrix pi0 = band_projector(model, t, kappa);
    const auto dpi0 =
        projector_derivatives(model, z, DerivMethod::resolvent, 0.5 * model.gap_promise);
    RealVec oqt, opt;
    const RealMat Omega = berry_curvature(pi0, dpi0, n, &oqt, &opt);
    MixedCurvature out;
    out.Omega_pp = Omega.block(n, n, n, n);
    out.Omega_pt = opt.size() > 0 ? opt : RealVec::Zero(n);
    return out;
}

RealMat omega_pq_from_field(const RealMat& Omega_pp, const RealMat& B) {
    return 0.5 * Omega_pp * B;
}

RealMat omega_qq_from_field(const RealMat& Omega_pp, const RealMat& B) {
    return -0.25 * B * Omega_pp * B;
}

RealVec pump_current(const SymbolModel& model, double t, int nodes) {
    const int m = model.n;
    // per-node storage + serial sum: results identical at any thread count
    const long total = m == 1 ? nodes : static_cast<long>(nodes) * nodes * nodes;
    std::vector<RealVec> vals(total);
#pragma omp parallel for schedule(static)
    for (long idx = 0; idx < total; ++idx) {
        RealVec kappa(m);
        if (m == 1)
            kappa << 2.0 * M_PI * idx / nodes;
        else
            kappa << 2.0 * M_PI * (idx / (nodes * nodes)) / nodes,
                2.0 * M_PI * ((idx / nodes) % nodes) / nodes,
                2.0 * M_PI * (idx % nodes) / nodes;
        vals[idx] = mixed_curvature(model, t, kappa).Omega_pt;
    }
    RealVec acc = RealVec::Zero(m);
    for (const RealVec& v : vals) acc += v;
    return acc / static_cast<double>(total); // measure dk/(2 pi)^m
}

RealVec pumped_charge(const SymbolModel& model, double T, int nodes) {
    RealVec Q = RealVec::Zero(model.n);
    for (int it = 0; it < nodes; ++it) // periodic drive: uniform sum is trapezoid
        Q += pump_current(model, T * it / nodes, nodes);
    return Q * (T / nodes);
}

int chern_number(const SymbolModel& model, double T, int nodes_t, int nodes_k) {
    // (kappa, t) plaquette orientation: matches the sign of the pumped charge
    // integral of Omega_pt over dt dkappa/(2 pi)
    std::vector<std::vector<Matrix>> P(nodes_k, std::vector<Matrix>(nodes_t));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nodes_k; ++i)
        for (int j = 0; j < nodes_t; ++j) {
            RealVec kappa(1);
            kappa << 2.0 * M_PI * i / nodes_k;
            P[i][j] = band_projector(model, T * j / nodes_t, kappa);
        }
    return plaquette_chern(P, nodes_k, nodes_t);
}

int chern_number_plane(const SymbolModel& model, double t, int axis_i, int axis_j,
                       const RealVec& base, int nodes) {
    std::vector<std::vector<Matrix>> P(nodes, std::vector<Matrix>(nodes));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j) {
            RealVec kappa = base;
            kappa[axis_i] = 2.0 * M_PI * i / nodes;
            kappa[axis_j] = 2.0 * M_PI * j / nodes;
            P[i][j] = band_projector(model, t, kappa);
        }
    return plaquette_chern(P, nodes, nodes);
}

PiezoResult piezo_cancellation(const SymbolModel& model, const RealMat& B, double t,
                               int nodes) {
    if (model.n != 3) throw DimensionMismatch("piezo cancellation needs m = 3");
    const int n3 = nodes * nodes * nodes;
    // Omega_vec and grad e0 on the torus grid
    std::vector<RealVec> ovec(n3);
    std::vector<RealVec> ge0(n3);
#pragma omp parallel for schedule(dynamic, 64)
    for (int idx = 0; idx < n3; ++idx) {
        RealVec kappa(3);
        kappa << 2.0 * M_PI * (idx / (nodes * nodes)) / nodes,
            2.0 * M_PI * ((idx / nodes) % nodes) / nodes,
            2.0 * M_PI * (idx % nodes) / nodes;
        const PhasePoint z = torus_point(model, t, kappa);
        BandOptions opts;
        opts.gap_min = 0.5 * model.gap_promise;
        const BandData bd = band_data(model, z, 0.0, opts);
        ovec[idx] = skew_dual(bd.Omega.block(3, 3, 3, 3));
        ge0[idx] = bd.grad_h.segment(3, 3); // eps = 0: grad of e0 over kappa
    }
    double dot = 0;
    for (int idx = 0; idx < n3; ++idx) dot += ovec[idx].dot(ge0[idx]);
    dot /= static_cast<double>(n3); // measure dk/(2 pi)^3

    // spectral divergence of Omega_vec on the torus
    std::vector<Complex> comp(n3), div(n3, Complex(0));
    fftw_plan fwd, bwd;
    {
        static std::mutex planner;
        std::lock_guard<std::mutex> lock(planner);
        fwd = fftw_plan_dft_3d(nodes, nodes, nodes, reinterpret_cast<fftw_complex*>(comp.data()),
                               reinterpret_cast<fftw_complex*>(comp.data()), FFTW_FORWARD,
                               FFTW_ESTIMATE);
        bwd = fftw_plan_dft_3d(nodes, nodes, nodes, reinterpret_cast<fftw_complex*>(div.data()),
                               reinterpret_cast<fftw_complex*>(div.data()), FFTW_BACKWARD,
                               FFTW_ESTIMATE);
    }
    std::vector<Complex> spec_sum(n3, Complex(0));
    for (int c = 0; c < 3; ++c) {
        for (int idx = 0; idx < n3; ++idx) comp[idx] = ovec[idx][c];
        fftw_execute(fwd);
        for (int idx = 0; idx < n3; ++idx) {
            const int ks[3] = {idx / (nodes * nodes), (idx / nodes) % nodes, idx % nodes};
            int k = ks[c] < (nodes + 1) / 2 ? ks[c] : ks[c] - nodes;
            if (2 * k == -nodes) k = 0; // drop the unmatched Nyquist mode
            spec_sum[idx] += Complex(0, static_cast<double>(k)) * comp[idx];
        }
    }
    for (int idx = 0; idx < n3; ++idx) div[idx] = spec_sum[idx];
    fftw_execute(bwd);
    double div_max = 0;
    for (int idx = 0; idx < n3; ++idx)
        div_max = std::max(div_max, std::abs(div[idx]) / static_cast<double>(n3));
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);

    PiezoResult out;
    out.term1 = skew_dual(B) * dot;
    out.div_max = div_max;
    return out;
}

double bloch_density(const SymbolModel& model, double t, const RealVec& kappa, double eps,
                     const RealMat& B) {
    const MixedCurvature mc = mixed_curvature(model, t, kappa);
    return 1.0 + eps * skew_dual(mc.Omega_pp).dot(skew_dual(B));
}

Trajectory bloch_flow(const SymbolModel& model, const RealVec& q0, const RealVec& kappa0,
                      double t0, double t1, double eps, const RealMat& B,
                      const FlowConfig& cfg) {
    const int m = model.n;
    auto field = [&](double t, const RealVec& q, const RealVec& kappa, RealVec& qd,
                     RealVec& kd) {
        (void)q;
        PhasePoint z = torus_point(model, t, kappa);
        BandOptions opts;
        opts.gap_min = 0.5 * model.gap_promise;
        opts.want_curvature = true;
        const BandData bd = band_data(model, z, eps, opts);
        const RealVec gk = bd.grad_h.segment(m, m);
        const RealMat opp = bd.Omega.block(m, m, m, m);
        RealVec opt = bd.Omega_pt.size() > 0 ? bd.Omega_pt : RealVec::Zero(m);
        qd = gk + eps * (opp * B * gk) + eps * opt;
        kd = B * qd;
    };
    FlowConfig c = cfg;
    c.epsilon = eps;
    const double dt_req = c.step_size();
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / dt_req)));
    const double dt = (t1 - t0) / steps;

    Trajectory traj;
    RealVec q = q0, kappa = kappa0;
    auto record = [&](double t) {
        traj.times.push_back(t);
        RealVec z(2 * m);
        z << q, kappa;
        traj.points.push_back(z);
        BandOptions opts;
        opts.gap_min = 0.5 * model.gap_promise;
        opts.want_gradient = false;
        opts.want_curvature = false;
        traj.h_values.push_back(band_data(model, torus_point(model, t, kappa), eps, opts).h);
        traj.densities.push_back(1.0);
    };
    record(t0);
    RealVec k1q(m), k1k(m), k2q(m), k2k(m), k3q(m), k3k(m), k4q(m), k4k(m);
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * dt;
        field(t, q, kappa, k1q, k1k);
        field(t + dt / 2, q + dt / 2 * k1q, kappa + dt / 2 * k1k, k2q, k2k);
        field(t + dt / 2, q + dt / 2 * k2q, kappa + dt / 2 * k2k, k3q, k3k);
        field(t + dt, q + dt * k3q, kappa + dt * k3k, k4q, k4k);
        q += dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
        kappa += dt / 6 * (k1k + 2 * k2k + 2 * k3k + k4k);
        record(t + dt);
    }
    return traj;
}

} // namespace adiabatica
