#pragma once

#include <functional>

namespace adiabatica {

/// Closed-form data for two-band symbols H0 = c(x)*1 + b(x).sigma. Coordinates
/// are packed as x = (q_1..q_n, p_1..p_n [, t]); derivative callbacks take the
/// coordinate index in that layout. All band quantities then have closed forms
/// in b and its first derivatives, which keeps the flow kernels allocation
/// free. Cross-validated against the generic matrix path in the test suite.
struct TwoLevelForm {
    int n = 1;
    bool time_dependent = false;

    std::function<void(const double* x, double b[3], double* c)> eval;
    std::function<void(const double* x, int alpha, double db[3], double* dc)> deriv;
    // H1 = c1*1 + b1.sigma; null => 0
    std::function<void(const double* x, double b1[3], double* c1)> eval1;

    int ncoord() const { return 2 * n + (time_dependent ? 1 : 0); }
};

/// Per-point band package from the closed forms. Fixed-capacity arrays sized
/// for n <= 3. Omega is stored over z = (q_1..q_n, p_1..p_n).
struct TLBand {
    double e0 = 0, gap = 0, e1 = 0, M = 0, h = 0;
    double grad_h[6] = {};
    double Omega[6][6] = {};
    double Omega_qt[3] = {};
    double Omega_pt[3] = {};
    double density = 1.0;
};

/// Effective Hamiltonian h = e0 + eps*tr(H1 pi0) + eps*M at packed point x.
/// band: 0 = lower, 1 = upper. include_M switches the order-eps energy
/// correction (uncorrected flow mode drops it).
double tl_h(const TwoLevelForm& f, const double* x, double eps, int band, bool include_M = true);

/// Full band package; curvature blocks only when want_curvature.
void tl_band(const TwoLevelForm& f, const double* x, double eps, int band, bool want_gradient,
             bool want_curvature, bool include_M, TLBand& out);

} // namespace adiabatica
