#include "adiabatica/twolevel.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "adiabatica/errors.hpp"

namespace adiabatica {

namespace {

inline void cross(const double a[3], const double b[3], double out[3]) {
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
}

inline double dot(const double a[3], const double b[3]) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

struct TLPoint {
    double b[3], c, bn, bhat[3];
    // dbhat[alpha][3], dbn[alpha], dc[alpha] over packed coordinates
    double dbhat[7][3], dbn[7], dc[7];
};

void tl_point(const TwoLevelForm& f, const double* x, TLPoint& pt) {
    f.eval(x, pt.b, &pt.c);
    pt.bn = std::sqrt(dot(pt.b, pt.b));
    const int nc = f.ncoord();
    if (pt.bn <= 0.0) {
        // Degenerate pair. If the field vanishes identically (all derivatives
        // zero too) the bands coincide smoothly and carry no geometry; treat
        // as a scalar band. A genuine conical crossing is still rejected.
        double db[3], dcv = 0;
        for (int a = 0; a < nc; ++a) {
            f.deriv(x, a, db, &dcv);
            if (db[0] != 0.0 || db[1] != 0.0 || db[2] != 0.0)
                throw GapViolation("two-level gap closed: |b| = 0");
            pt.dc[a] = dcv;
            pt.dbn[a] = 0.0;
            for (int k = 0; k < 3; ++k) pt.dbhat[a][k] = 0.0;
        }
        pt.bhat[0] = pt.bhat[1] = 0.0;
        pt.bhat[2] = 1.0;
        return;
    }
    for (int k = 0; k < 3; ++k) pt.bhat[k] = pt.b[k] / pt.bn;
    for (int a = 0; a < nc; ++a) {
        double db[3], dcv = 0;
        f.deriv(x, a, db, &dcv);
        pt.dc[a] = dcv;
        pt.dbn[a] = dot(pt.bhat, db);
        for (int k = 0; k < 3; ++k)
            pt.dbhat[a][k] = (db[k] - pt.bhat[k] * pt.dbn[a]) / pt.bn;
    }
}

inline double band_sign(int band) { return band == 0 ? -1.0 : 1.0; }

double tl_h_point(const TwoLevelForm& f, const TLPoint& pt, const double* x, double eps,
                  int band, bool include_M) {
    const double s = band_sign(band);
    double h = pt.c + s * pt.bn;
    if (eps != 0.0) {
        if (f.eval1) {
            double b1[3], c1 = 0;
            f.eval1(x, b1, &c1);
            h += eps * (c1 + s * dot(b1, pt.bhat));
        }
        if (include_M) {
            double M = 0;
            for (int j = 0; j < f.n; ++j) {
                double cr[3];
                cross(pt.dbhat[f.n + j], pt.dbhat[j], cr); // dp_j bhat x dq_j bhat
                M += dot(pt.bhat, cr);
            }
            h += eps * 0.5 * pt.bn * M;
        }
    }
    return h;
}

} // namespace

double tl_h(const TwoLevelForm& f, const double* x, double eps, int band, bool include_M) {
    TLPoint pt;
    tl_point(f, x, pt);
    return tl_h_point(f, pt, x, eps, band, include_M);
}

void tl_band(const TwoLevelForm& f, const double* x, double eps, int band, bool want_gradient,
             bool want_curvature, bool include_M, TLBand& out) {
    TLPoint pt;
    tl_point(f, x, pt);
    const double s = band_sign(band);
    const int n = f.n;

    out.e0 = pt.c + s * pt.bn;
    out.gap = 2.0 * pt.bn;
    out.e1 = 0;
    if (f.eval1) {
        double b1[3], c1 = 0;
        f.eval1(x, b1, &c1);
        out.e1 = c1 + s * dot(b1, pt.bhat);
    }
    out.M = 0;
    for (int j = 0; j < n; ++j) {
        double cr[3];
        cross(pt.dbhat[n + j], pt.dbhat[j], cr);
        out.M += dot(pt.bhat, cr);
    }
    out.M *= 0.5 * pt.bn;
    out.h = out.e0 + eps * out.e1 + (include_M ? eps * out.M : 0.0);

    if (want_curvature) {
        double trace_qp = 0;
        for (int a = 0; a < 2 * n; ++a) {
            out.Omega[a][a] = 0;
            for (int bcoord = a + 1; bcoord < 2 * n; ++bcoord) {
                double cr[3];
                cross(pt.dbhat[a], pt.dbhat[bcoord], cr);
                const double w = 0.5 * s * dot(pt.bhat, cr);
                out.Omega[a][bcoord] = w;
                out.Omega[bcoord][a] = -w;
            }
        }
        for (int j = 0; j < n; ++j) trace_qp += out.Omega[j][n + j];
        if (f.time_dependent) {
            const int ti = 2 * n;
            for (int j = 0; j < n; ++j) {
                double cr[3];
                cross(pt.dbhat[j], pt.dbhat[ti], cr);
                out.Omega_qt[j] = 0.5 * s * dot(pt.bhat, cr);
                cross(pt.dbhat[n + j], pt.dbhat[ti], cr);
                out.Omega_pt[j] = 0.5 * s * dot(pt.bhat, cr);
            }
        }
        out.density = 1.0 + eps * trace_qp;
        if (out.density <= 0.0) throw NonPositiveDensity("Liouville density not positive");
    }

    if (want_gradient) {
        const int nc = f.ncoord();
        double xs[8];
        std::memcpy(xs, x, sizeof(double) * static_cast<size_t>(nc));
        static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
        for (int a = 0; a < 2 * n; ++a) {
            const double step = h0 * std::max(1.0, std::abs(x[a]));
            const double save = xs[a];
            xs[a] = save + step;
            const double hp = tl_h(f, xs, eps, band, include_M);
            xs[a] = save - step;
            const double hm = tl_h(f, xs, eps, band, include_M);
            xs[a] = save;
            out.grad_h[a] = (hp - hm) / (2.0 * step);
        }
    }
}

} // namespace adiabatica
