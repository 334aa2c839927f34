#include "adiabatica/band.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace adiabatica {

namespace {

struct EigData {
    Eigen::VectorXd evals;
    Matrix evecs;
};

EigData eig(const Matrix& H0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H0);
    return {es.eigenvalues(), es.eigenvectors()};
}

double gap_of(const Eigen::VectorXd& evals, int b) {
    double gap = std::numeric_limits<double>::infinity();
    if (b > 0) gap = std::min(gap, evals[b] - evals[b - 1]);
    if (b + 1 < evals.size()) gap = std::min(gap, evals[b + 1] - evals[b]);
    return gap;
}

/// Reduced resolvent R = (H0 - e0)^{-1} restricted to ran(pi0^perp).
Matrix reduced_resolvent(const EigData& ed, int b) {
    const int d = static_cast<int>(ed.evals.size());
    Matrix R = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        if (k == b) continue;
        R += ed.evecs.col(k) * ed.evecs.col(k).adjoint() / (ed.evals[k] - ed.evals[b]);
    }
    return R;
}

PhasePoint shifted(const PhasePoint& z, int alpha, double h) {
    PhasePoint w = z;
    const int n = z.n();
    if (alpha < n)
        w.q[alpha] += h;
    else if (alpha < 2 * n)
        w.p[alpha - n] += h;
    else
        w.t = z.t.value() + h;
    return w;
}

SymbolJet pi0_jet(const Matrix& pi0, const std::vector<Matrix>& dpi0, int n) {
    SymbolJet j;
    j.n = n;
    j.d = static_cast<int>(pi0.rows());
    j.value = pi0;
    j.sub = Matrix::Zero(j.d, j.d);
    j.dq.assign(dpi0.begin(), dpi0.begin() + n);
    j.dp.assign(dpi0.begin() + n, dpi0.begin() + 2 * n);
    if (dpi0.size() > static_cast<size_t>(2 * n)) j.dt = dpi0[static_cast<size_t>(2 * n)];
    return j;
}

} // namespace

BandPoint spectral_band(const Matrix& H0, int band_index, double gap_min) {
    const int d = static_cast<int>(H0.rows());
    if (d < 2 || band_index < 0 || band_index >= d)
        throw DimensionMismatch("band index out of range");
    EigData ed = eig(H0);
    const double gap = gap_of(ed.evals, band_index);
    if (gap < gap_min)
        throw GapViolation("spectral gap " + std::to_string(gap) + " below " +
                           std::to_string(gap_min));
    BandPoint out;
    out.e0 = ed.evals[band_index];
    out.pi0 = ed.evecs.col(band_index) * ed.evecs.col(band_index).adjoint();
    out.gap = gap;
    return out;
}

std::vector<Matrix> projector_derivatives(const SymbolModel& model, const PhasePoint& z,
                                          DerivMethod method, double gap_min) {
    const int n = model.n;
    const int ncoord = 2 * n + (model.time_dependent ? 1 : 0);
    const int b = model.band_index;

    std::vector<Matrix> out(static_cast<size_t>(ncoord));

    if (method != DerivMethod::finite_difference) {
        EigData ed = eig(model.H0(z));
        if (gap_of(ed.evals, b) < gap_min) throw GapViolation("gap below minimum");
        const Matrix pi0 = ed.evecs.col(b) * ed.evecs.col(b).adjoint();
        const Matrix R = reduced_resolvent(ed, b);
        SymbolJet jet = evaluate_jet(model, z, 1);
        for (int a = 0; a < ncoord; ++a) {
            const Matrix& dH = a < 2 * n ? jet.dz(a) : jet.dt.value();
            out[static_cast<size_t>(a)] = -R * dH * pi0 - pi0 * dH * R;
        }
    }
    if (method == DerivMethod::resolvent) return out;

    std::vector<Matrix> fd(static_cast<size_t>(ncoord));
    for (int a = 0; a < ncoord; ++a) {
        const double h = fd_step(model.coord_scale(a));
        const Matrix pp = spectral_band(model.H0(shifted(z, a, h)), b, gap_min).pi0;
        const Matrix pm = spectral_band(model.H0(shifted(z, a, -h)), b, gap_min).pi0;
        fd[static_cast<size_t>(a)] = (pp - pm) / (2.0 * h);
    }
    if (method == DerivMethod::finite_difference) return fd;

    for (int a = 0; a < ncoord; ++a) {
        const double diff =
            (out[static_cast<size_t>(a)] - fd[static_cast<size_t>(a)]).cwiseAbs().maxCoeff();
        if (diff > 1e-6)
            throw MethodDisagreement("projector derivative methods differ by " +
                                     std::to_string(diff));
    }
    return out;
}

double energy_correction_M(const SymbolJet& jet, const Matrix& pi0,
                           const std::vector<Matrix>& dpi0, double e0) {
    const int n = jet.n;
    SymbolJet pj = pi0_jet(pi0, dpi0, n);
    const Complex ihalf(0.0, 0.5);

    const Complex m1 = (ihalf * sandwich_bracket(pj, jet.value, pj)).trace();

    // -(i/2) tr(pi0 {pi0, H0 - e0}); the e0 shift only alters dz(H0 - e0).
    SymbolJet hshift = jet;
    const int d = jet.d;
    hshift.value = jet.value - e0 * Matrix::Identity(d, d);
    // subtract grad e0 = tr(pi0 dH0) from the derivative of the scalar shift
    for (int a = 0; a < 2 * n; ++a) {
        const double de0 = (pi0 * jet.dz(a)).trace().real();
        Matrix& der = a < n ? hshift.dq[a] : hshift.dp[a - n];
        der = jet.dz(a) - de0 * Matrix::Identity(d, d);
    }
    const Complex m2 = -ihalf * (pi0 * poisson_bracket(pj, hshift)).trace();

    if (std::abs(m1 - m2) > 1e-9)
        throw FormulaDisagreement("energy correction formulas disagree: " +
                                  std::to_string(std::abs(m1 - m2)));
    if (std::abs(m1.imag()) > 1e-10)
        throw FormulaDisagreement("energy correction not real");
    return m1.real();
}

RealMat berry_curvature(const Matrix& pi0, const std::vector<Matrix>& dpi0, int n,
                        RealVec* Omega_qt, RealVec* Omega_pt) {
    const int m = 2 * n;
    RealMat Omega = RealMat::Zero(m, m);
    const Complex mi(0.0, -1.0);
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            const Complex w =
                mi * (pi0 * (dpi0[a] * dpi0[b] - dpi0[b] * dpi0[a])).trace();
            Omega(a, b) = w.real();
            Omega(b, a) = -w.real();
        }
    if (dpi0.size() > static_cast<size_t>(m) && Omega_qt && Omega_pt) {
        const Matrix& dt = dpi0[static_cast<size_t>(m)];
        *Omega_qt = RealVec::Zero(n);
        *Omega_pt = RealVec::Zero(n);
        for (int j = 0; j < n; ++j) {
            (*Omega_qt)[j] = (mi * (pi0 * (dpi0[j] * dt - dt * dpi0[j])).trace()).real();
            (*Omega_pt)[j] =
                (mi * (pi0 * (dpi0[n + j] * dt - dt * dpi0[n + j])).trace()).real();
        }
    }
    return Omega;
}

namespace {

double scalar_h(const SymbolModel& model, const PhasePoint& z, double eps, double gap_min,
                bool include_M) {
    BandPoint bp = spectral_band(model.H0(z), model.band_index, gap_min);
    double h = bp.e0;
    if (eps != 0.0) {
        if (model.H1) h += eps * (model.H1(z) * bp.pi0).trace().real();
        if (include_M) {
            SymbolJet jet = evaluate_jet(model, z, 1);
            auto dpi0 = projector_derivatives(model, z, DerivMethod::resolvent, gap_min);
            h += eps * energy_correction_M(jet, bp.pi0, dpi0, bp.e0);
        }
    }
    return h;
}

} // namespace

std::pair<double, RealVec> effective_hamiltonian(const SymbolModel& model, const PhasePoint& z,
                                                 double eps, double gap_min) {
    const double h = scalar_h(model, z, eps, gap_min, true);
    RealVec grad = RealVec::Zero(2 * model.n);
    for (int a = 0; a < 2 * model.n; ++a) {
        const double step = fd_step(model.coord_scale(a));
        grad[a] = (scalar_h(model, shifted(z, a, step), eps, gap_min, true) -
                   scalar_h(model, shifted(z, a, -step), eps, gap_min, true)) /
                  (2.0 * step);
    }
    return {h, grad};
}

double liouville_density(const Matrix& pi0, const std::vector<Matrix>& dpi0,
                         const RealMat& Omega, double eps, int n) {
    double sum = 0;
    for (int j = 0; j < n; ++j) sum += Omega(j, n + j) - Omega(n + j, j);
    const double rho1 = 1.0 + 0.5 * eps * sum;

    SymbolJet pj = pi0_jet(pi0, dpi0, n);
    const Complex rho2 =
        1.0 + Complex(0.0, 1.0) * eps * (pi0 * poisson_bracket(pj, pj)).trace();
    if (std::abs(rho1 - rho2) > 1e-9)
        throw FormulaDisagreement("Liouville density formulas disagree");
    if (rho1 <= 0.0) throw NonPositiveDensity("Liouville density not positive");
    return rho1;
}

Matrix subprincipal_projector(const SymbolModel& model, const PhasePoint& z, double gap_min) {
    const int d = model.d;
    EigData ed = eig(model.H0(z));
    const int b = model.band_index;
    if (gap_of(ed.evals, b) < gap_min) throw GapViolation("gap below minimum");
    const Matrix pi0 = ed.evecs.col(b) * ed.evecs.col(b).adjoint();
    const Matrix pi0p = Matrix::Identity(d, d) - pi0;
    const Matrix R = reduced_resolvent(ed, b);

    auto dpi0 = projector_derivatives(model, z, DerivMethod::resolvent, gap_min);
    SymbolJet pj = pi0_jet(pi0, dpi0, model.n);
    SymbolJet hj = evaluate_jet(model, z, 1);

    const Complex ihalf(0.0, 0.5);
    const Matrix br = poisson_bracket(pj, pj);

    // diagonal blocks fixed by the order-eps Moyal projector identity
    const Matrix diag = ihalf * (pi0 * br * pi0) - ihalf * (pi0p * br * pi0p);

    // off-diagonal block from the order-eps commutation equation
    // (H0 - e0) X = pi0p [ -(i/2)({pi0,H0} - {H0,pi0}) - H1 ] pi0
    Matrix rhs = -ihalf * (poisson_bracket(pj, hj) - poisson_bracket(hj, pj));
    if (model.H1) rhs -= model.H1(z);
    const Matrix X = R * (pi0p * rhs * pi0);

    return diag + X + X.adjoint();
}

BandData band_data(const SymbolModel& model, const PhasePoint& z, double eps,
                   const BandOptions& opts) {
    BandData out;
    const int n = model.n;
    BandPoint bp = spectral_band(model.H0(z), model.band_index, opts.gap_min);
    out.e0 = bp.e0;
    out.gap = bp.gap;
    out.pi0 = bp.pi0;
    out.dpi0 = projector_derivatives(model, z, DerivMethod::resolvent, opts.gap_min);

    SymbolJet hj = evaluate_jet(model, z, 1);
    out.M = energy_correction_M(hj, out.pi0, out.dpi0, out.e0);
    out.e1 = model.H1 ? (model.H1(z) * out.pi0).trace().real() : 0.0;
    out.h = out.e0 + eps * out.e1 + (opts.include_M ? eps * out.M : 0.0);

    if (opts.want_curvature) {
        out.Omega = berry_curvature(out.pi0, out.dpi0, n, &out.Omega_qt, &out.Omega_pt);
        out.liouville_density = liouville_density(out.pi0, out.dpi0, out.Omega, eps, n);
    }
    if (opts.want_gradient) {
        out.grad_h = RealVec::Zero(2 * n);
        for (int a = 0; a < 2 * n; ++a) {
            const double step = fd_step(model.coord_scale(a));
            out.grad_h[a] =
                (scalar_h(model, shifted(z, a, step), eps, opts.gap_min, opts.include_M) -
                 scalar_h(model, shifted(z, a, -step), eps, opts.gap_min, opts.include_M)) /
                (2.0 * step);
        }
    }
    return out;
}

} // namespace adiabatica
