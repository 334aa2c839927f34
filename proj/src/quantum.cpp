#include "adiabatica/quantum.hpp"

#include <cmath>
#include <fftw3.h>
#include <mutex>
#include <vector>

#include "adiabatica/band.hpp"
#include "adiabatica/twolevel.hpp"

namespace adiabatica {

namespace {

/// Shared 1-D complex DFT plans of length N, executed on caller-owned buffers.
struct DftPlans {
    int N = 0;
    fftw_plan backward = nullptr;
    fftw_plan forward = nullptr;
    std::vector<Complex> proto;

    explicit DftPlans(int n) : N(n), proto(n) {
        auto* buf = reinterpret_cast<fftw_complex*>(proto.data());
        backward = fftw_plan_dft_1d(N, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        forward = fftw_plan_dft_1d(N, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~DftPlans() {
        fftw_destroy_plan(backward);
        fftw_destroy_plan(forward);
    }
    void run(fftw_plan p, Complex* data) const {
        auto* buf = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(p, buf, buf);
    }
};

std::mutex plan_mutex; // fftw planning is not thread-safe

} // namespace

QuantumOperator weyl_quantize(const MatrixSymbolFn& symbol, int d, const Grid& grid,
                              bool check_hermitian) {
    const int N = grid.N;
    QuantumOperator out;
    out.grid = grid;
    out.d = d;
    out.mat = Matrix::Zero(N * d, N * d);

    DftPlans plans = [&] {
        std::lock_guard<std::mutex> lock(plan_mutex);
        return DftPlans(N);
    }();

    // Each pair (j, l) uses the midpoint nearest on the circle: with md the
    // minimal signed difference j - l (mod N), the midpoint index is
    // s = 2l + md (mod 2N), so wrapped pairs evaluate the symbol near the
    // boundary instead of reaching across the domain. For |j - l| < N/2 this
    // is the plain arithmetic midpoint (x_j + x_l)/2. For even N the exactly
    // antipodal class j - l = N/2 has two equidistant midpoints; average them
    // to keep the operator Hermitian.
    const int half = N / 2;
    const bool even = (N % 2 == 0);
    std::vector<Matrix> antip(even ? 2 * N : 0);
    std::exception_ptr failure;
#pragma omp parallel
    {
        std::vector<Matrix> vals(N);
        std::vector<Complex> buf(N);
#pragma omp for schedule(dynamic, 8)
        for (int s = 0; s < 2 * N; ++s) {
            if (failure) continue;
            try {
                const double mid = grid.x_min + 0.5 * s * grid.dx();
                for (int kb = 0; kb < N; ++kb) {
                    vals[kb] = symbol(mid, grid.p_of_bin(kb));
                    if (vals[kb].rows() != d || vals[kb].cols() != d)
                        throw DimensionMismatch("symbol value size vs fast dimension");
                }
                const int m_lo = even ? -half + 1 : -half;
                const int m_hi = even ? half - 1 : half;
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) {
                        for (int kb = 0; kb < N; ++kb) buf[kb] = vals[kb](a, b);
                        plans.run(plans.backward, buf.data());
                        for (int md = m_lo; md <= m_hi; ++md) {
                            if (((md - s) % 2 + 2) % 2 != 0) continue;
                            const int l = (((s - md) / 2) % N + N) % N;
                            const int j = ((l + md) % N + N) % N;
                            const int mb = (md % N + N) % N;
                            out.mat(j * d + a, l * d + b) =
                                buf[mb] / static_cast<double>(N);
                        }
                        if (even && ((s - half) % 2 + 2) % 2 == 0) {
                            if (a == 0 && b == 0) antip[s] = Matrix::Zero(d, d);
                            antip[s](a, b) = buf[half] / static_cast<double>(N);
                        }
                    }
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    if (even) {
        for (int s = 0; s < 2 * N; ++s) {
            if (((s - half) % 2 + 2) % 2 != 0) continue;
            const int l = ((s + half) / 2) % N;
            const int j = ((l - half) % N + N) % N;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    out.mat(j * d + a, l * d + b) += 0.5 * antip[s](a, b);
                    out.mat(l * d + a, j * d + b) += 0.5 * antip[s](a, b);
                }
        }
    }

    if (check_hermitian) {
        const double scale = out.mat.cwiseAbs().maxCoeff();
        const double herm = (out.mat - out.mat.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-10 * std::max(scale, 1.0))
            throw NonHermitianSymbol("quantized operator departs from Hermitian by " +
                                     std::to_string(herm));
    }
    return out;
}

QuantumOperator weyl_quantize_scalar(const ScalarSymbolFn& symbol, int d, const Grid& grid) {
    const Matrix id = Matrix::Identity(d, d);
    return weyl_quantize([&](double q, double p) -> Matrix { return symbol(q, p) * id; }, d,
                         grid, true);
}

MatrixSymbolFn hamiltonian_symbol(const SymbolModel& model, double epsilon) {
    return [&model, epsilon](double q, double p) -> Matrix {
        const PhasePoint z = PhasePoint::make(q, p);
        Matrix H = model.H0(z);
        if (model.H1) H += epsilon * model.H1(z);
        return H;
    };
}

MatrixSymbolFn projector_symbol(const SymbolModel& model, double epsilon, int order) {
    return [&model, epsilon, order](double q, double p) -> Matrix {
        const PhasePoint z = PhasePoint::make(q, p);
        Matrix pi = spectral_band(model.H0(z), model.band_index, 0.5 * model.gap_promise).pi0;
        if (order >= 1) pi += epsilon * subprincipal_projector(model, z, 0.5 * model.gap_promise);
        return pi;
    };
}

Complex trace_pair(const QuantumOperator& A, const QuantumOperator& B) {
    if (!(A.grid == B.grid) || A.d != B.d) throw GridMismatch("trace_pair operands");
    return trace_of_product(A.mat, B.mat);
}

Complex phase_space_trace(const MatrixSymbolFn& A, const MatrixSymbolFn& B, int d,
                          const Grid& grid) {
    Complex acc = 0;
    for (int j = 0; j < grid.N; ++j)
        for (int kb = 0; kb < grid.N; ++kb) {
            const double q = grid.x(j), p = grid.p_of_bin(kb);
            acc += (A(q, p) * B(q, p)).trace();
        }
    (void)d;
    return acc / static_cast<double>(grid.N);
}

SpectralOp diagonalize(const QuantumOperator& H) {
    SpectralOp out;
    out.grid = H.grid;
    out.d = H.d;
    out.spec = eigh(H.mat);
    return out;
}

WaveFunction propagate(const SpectralOp& H, const WaveFunction& psi, double t) {
    if (!(H.grid == psi.grid)) throw GridMismatch("propagate state vs spectrum");
    Eigen::VectorXcd w = H.spec.V.adjoint() * psi.values;
    const double eps = H.grid.epsilon;
    for (int i = 0; i < w.size(); ++i)
        w[i] *= std::exp(Complex(0, -H.spec.evals[i] * t / eps));
    WaveFunction out = psi;
    out.values = H.spec.V * w;
    return out;
}

QuantumOperator op_function(const SpectralOp& H, const std::function<double(double)>& f) {
    Matrix scaled = H.spec.V;
    for (int i = 0; i < scaled.cols(); ++i) scaled.col(i) *= f(H.spec.evals[i]);
    QuantumOperator out;
    out.grid = H.grid;
    out.d = H.d;
    out.mat = matmul(scaled, H.spec.V, 'N', 'C');
    return out;
}

WaveFunction apply(const QuantumOperator& A, const WaveFunction& psi) {
    if (!(A.grid == psi.grid)) throw GridMismatch("apply operator vs state");
    WaveFunction out = psi;
    out.values = A.mat * psi.values;
    return out;
}

Complex expectation(const QuantumOperator& A, const WaveFunction& psi) {
    if (!(A.grid == psi.grid)) throw GridMismatch("expectation operator vs state");
    return psi.grid.dx() * psi.values.dot(A.mat * psi.values);
}

ProjectorResult superadiabatic_projector(const SymbolModel& model, const Grid& grid) {
    ProjectorResult out;
    out.P0 = weyl_quantize(projector_symbol(model, grid.epsilon, 1), model.d, grid);
    const SpectralOp sp = diagonalize(out.P0);
    const int dim = static_cast<int>(sp.spec.evals.size());
    out.defect = 0;
    out.rank = 0;
    for (int i = 0; i < dim; ++i) {
        const double lam = sp.spec.evals[i];
        if (lam >= 0.25 && lam <= 0.75)
            throw ClusterGapViolation("projector eigenvalue " + std::to_string(lam) +
                                      " inside [0.25, 0.75]");
        if (lam > 0.5) ++out.rank;
        out.defect = std::max(out.defect, std::min(std::abs(lam), std::abs(1.0 - lam)));
    }
    Matrix W(dim, out.rank);
    int c = 0;
    for (int i = 0; i < dim; ++i)
        if (sp.spec.evals[i] > 0.5) W.col(c++) = sp.spec.V.col(i);
    out.pi_hat.grid = grid;
    out.pi_hat.d = model.d;
    out.pi_hat.mat = matmul(W, W, 'N', 'C');
    return out;
}

namespace {

/// Band-limited interpolation of every spin component onto the half-step grid
/// u_r = x_min + r dx/2, r = 0..2N-1; samples at even r reproduce psi exactly.
/// The half-step samples let the Wigner displacement sum use step dx instead
/// of 2 dx, which removes the aliased copy at momentum offset pi eps / dx and
/// makes normalization and observable duality hold simultaneously.
std::vector<Complex> upsample_half_grid(const WaveFunction& psi) {
    const int N = psi.grid.N, d = psi.d;
    DftPlans plansN = [&] {
        std::lock_guard<std::mutex> lock(plan_mutex);
        return DftPlans(N);
    }();
    DftPlans plans2 = [&] {
        std::lock_guard<std::mutex> lock(plan_mutex);
        return DftPlans(2 * N);
    }();
    std::vector<Complex> out(static_cast<size_t>(2 * N) * d);
    std::vector<Complex> buf(N), zbuf(2 * N);
    for (int a = 0; a < d; ++a) {
        for (int j = 0; j < N; ++j) buf[j] = psi.values[j * d + a];
        plansN.run(plansN.forward, buf.data());
        std::fill(zbuf.begin(), zbuf.end(), Complex(0));
        for (int kb = 0; kb < N; ++kb) {
            const int k = kb < (N + 1) / 2 ? kb : kb - N;
            if (2 * k == -N) { // Nyquist coefficient split symmetrically
                zbuf[(N / 2) % (2 * N)] += 0.5 * buf[kb];
                zbuf[2 * N - N / 2] += 0.5 * buf[kb];
            } else {
                zbuf[(k % (2 * N) + 2 * N) % (2 * N)] = buf[kb];
            }
        }
        plans2.run(plans2.backward, zbuf.data());
        for (int r = 0; r < 2 * N; ++r)
            out[static_cast<size_t>(r) * d + a] = zbuf[r] / static_cast<double>(N);
    }
    return out;
}

} // namespace

RealMat wigner_trace(const WaveFunction& psi) {
    const int N = psi.grid.N, d = psi.d;
    RealMat W(N, N);
    const std::vector<Complex> psi2 = upsample_half_grid(psi);

    DftPlans plans = [&] {
        std::lock_guard<std::mutex> lock(plan_mutex);
        return DftPlans(N);
    }();

#pragma omp parallel
    {
        std::vector<Complex> g(N);
#pragma omp for schedule(static)
        for (int j = 0; j < N; ++j) {
            std::fill(g.begin(), g.end(), Complex(0));
            for (int s = -N + 1; s <= N - 1; ++s) {
                const int rp = 2 * j + s, rm = 2 * j - s;
                if (rp < 0 || rp >= 2 * N || rm < 0 || rm >= 2 * N) continue;
                Complex acc = 0;
                for (int a = 0; a < d; ++a)
                    acc += psi2[static_cast<size_t>(rp) * d + a] *
                           std::conj(psi2[static_cast<size_t>(rm) * d + a]);
                g[(s % N + N) % N] += acc;
            }
            plans.run(plans.forward, g.data());
            for (int kb = 0; kb < N; ++kb) W(j, kb) = psi.grid.dx() * g[kb].real();
        }
    }
    return W;
}

Matrix wigner_matrix(const WaveFunction& psi, int j, int k) {
    const int N = psi.grid.N, d = psi.d;
    const std::vector<Complex> psi2 = upsample_half_grid(psi);
    Matrix W = Matrix::Zero(d, d);
    for (int s = -N + 1; s <= N - 1; ++s) {
        const int rp = 2 * j + s, rm = 2 * j - s;
        if (rp < 0 || rp >= 2 * N || rm < 0 || rm >= 2 * N) continue;
        const Complex phase = std::exp(Complex(0, -2.0 * M_PI * k * s / N));
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                W(a, b) += psi2[static_cast<size_t>(rp) * d + a] *
                           std::conj(psi2[static_cast<size_t>(rm) * d + b]) * phase;
    }
    return psi.grid.dx() * W;
}

RealMat band_wigner(const WaveFunction& psi, const SymbolModel& model, double epsilon) {
    RealMat W = wigner_trace(psi);
    const int N = psi.grid.N;
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (int j = 0; j < N; ++j) {
        if (failure) continue;
        try {
            for (int kb = 0; kb < N; ++kb) {
                const PhasePoint z = PhasePoint::make(psi.grid.x(j), psi.grid.p_of_bin(kb));
                const Matrix pi0 = spectral_band(model.H0(z), model.band_index,
                                                 0.5 * model.gap_promise).pi0;
                const auto dpi0 = projector_derivatives(model, z, DerivMethod::resolvent,
                                                        0.5 * model.gap_promise);
                // tr(pi0 {pi0, pi0}) with {A,B} = d_p A d_q B - d_q A d_p B
                const Complex br = (pi0 * (dpi0[1] * dpi0[0] - dpi0[0] * dpi0[1])).trace();
                const double factor = 1.0 - (Complex(0, epsilon) * br).real();
                W(j, kb) *= factor;
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return W;
}

WaveFunction gaussian_packet(const Grid& grid, int d, double q0, double p0, double sigma,
                             const Eigen::VectorXcd& spinor) {
    WaveFunction psi;
    psi.grid = grid;
    psi.d = d;
    psi.values = Eigen::VectorXcd::Zero(grid.N * d);
    for (int j = 0; j < grid.N; ++j) {
        const double x = grid.x(j);
        const double arg = (x - q0) / sigma;
        const Complex amp = std::exp(Complex(-arg * arg / (2.0 * grid.epsilon),
                                             p0 * (x - q0) / grid.epsilon));
        for (int a = 0; a < d; ++a) psi.values[j * d + a] = amp * spinor[a];
    }
    psi.normalize();
    return psi;
}

namespace {

// C-infinity step, 1 on tau <= 0, 0 on tau >= 1.
double collar_step(double tau) {
    if (tau <= 0) return 1.0;
    if (tau >= 1) return 0.0;
    const double f1 = std::exp(-1.0 / tau), f2 = std::exp(-1.0 / (1.0 - tau));
    return f2 / (f1 + f2);
}

double collar_step_d(double tau) {
    if (tau <= 0 || tau >= 1) return 0.0;
    const double f1 = std::exp(-1.0 / tau), f2 = std::exp(-1.0 / (1.0 - tau));
    const double d1 = f1 / (tau * tau), d2 = -f2 / ((1.0 - tau) * (1.0 - tau));
    return (d2 * f1 - f2 * d1) / ((f1 + f2) * (f1 + f2));
}

// Odd map y -> y * B((|y| - lo)/(hi - lo)) around `center`: identity on the
// core |y - center| < lo, flattened to the center beyond hi.
struct AxisMap {
    double center = 0, lo = 0, hi = 0; // hi <= lo means identity
    double map(double y) const {
        if (hi <= lo) return y;
        const double u = y - center;
        return center + u * collar_step((std::abs(u) - lo) / (hi - lo));
    }
    double dmap(double y) const {
        if (hi <= lo) return 1.0;
        const double u = y - center;
        const double tau = (std::abs(u) - lo) / (hi - lo);
        return collar_step(tau) + std::abs(u) * collar_step_d(tau) / (hi - lo);
    }
};

} // namespace

SymbolModel periodized_for_grid(const SymbolModel& model, const Grid& grid,
                                const CollarParams& collar) {
    const int n = model.n;
    auto maps = std::make_shared<std::vector<AxisMap>>(2 * n);
    const double Xq = 0.5 * grid.L(), qc = 0.5 * (grid.x_min + grid.x_max);
    const double Xp = M_PI * grid.epsilon * grid.N / grid.L();
    bool any = false;
    for (int i = 0; i < 2 * n; ++i) {
        if (i < static_cast<int>(model.periodic.size()) && model.periodic[i]) continue;
        AxisMap& m = (*maps)[i];
        if (i < n) {
            m.center = qc;
            m.lo = collar.q_core * Xq;
            m.hi = collar.q_edge * Xq;
        } else {
            m.lo = std::max(collar.p_core * Xp, std::min(collar.p_core_min, 0.75 * Xp));
            m.hi = collar.p_edge * Xp;
        }
        any = true;
    }
    if (!any) return model;

    auto mapped = [maps, n](const PhasePoint& z) {
        PhasePoint w = z;
        for (int i = 0; i < n; ++i) w.q[i] = (*maps)[i].map(z.q[i]);
        for (int i = 0; i < n; ++i) w.p[i] = (*maps)[n + i].map(z.p[i]);
        return w;
    };

    SymbolModel out = model;
    const auto base0 = model.H0;
    out.H0 = [base0, mapped](const PhasePoint& z) { return base0(mapped(z)); };
    if (model.H1) {
        const auto base1 = model.H1;
        out.H1 = [base1, mapped](const PhasePoint& z) { return base1(mapped(z)); };
    }
    if (model.dH0) {
        const auto based = model.dH0;
        out.dH0 = [based, mapped, maps, n](const PhasePoint& z, std::vector<Matrix>& dq,
                                           std::vector<Matrix>& dp, Matrix* dt) {
            based(mapped(z), dq, dp, dt);
            for (int i = 0; i < n; ++i) {
                dq[i] *= (*maps)[i].dmap(z.q[i]);
                dp[i] *= (*maps)[n + i].dmap(z.p[i]);
            }
        };
    }
    if (model.two_level) {
        auto tl = std::make_shared<TwoLevelForm>(*model.two_level);
        const auto base = model.two_level;
        const int nc = base->ncoord();
        auto mapx = [maps, n, nc](const double* x, double* w) {
            for (int i = 0; i < 2 * n; ++i) w[i] = (*maps)[i].map(x[i]);
            for (int i = 2 * n; i < nc; ++i) w[i] = x[i];
        };
        tl->eval = [base, mapx](const double* x, double b[3], double* c) {
            double w[7];
            mapx(x, w);
            base->eval(w, b, c);
        };
        tl->deriv = [base, mapx, maps, n](const double* x, int alpha, double db[3],
                                          double* dc) {
            double w[7];
            mapx(x, w);
            base->deriv(w, alpha, db, dc);
            if (alpha < 2 * n) {
                const double j = (*maps)[alpha].dmap(x[alpha]);
                db[0] *= j;
                db[1] *= j;
                db[2] *= j;
                if (dc) *dc *= j;
            }
        };
        if (base->eval1)
            tl->eval1 = [base, mapx](const double* x, double b1[3], double* c1) {
                double w[7];
                mapx(x, w);
                base->eval1(w, b1, c1);
            };
        out.two_level = tl;
    }
    return out;
}

} // namespace adiabatica
