#include "adiabatica/models.hpp"

#include <cmath>
#include <stdexcept>

namespace adiabatica {

Matrix pauli(int k) {
    Matrix s(2, 2);
    const Complex i(0, 1);
    switch (k) {
        case 0: s << 1, 0, 0, 1; break;
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, -i, i, 0; break;
        case 3: s << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli index");
    }
    return s;
}

namespace {

Matrix bdotsigma(double bx, double by, double bz, double c) {
    Matrix H(2, 2);
    const Complex i(0, 1);
    H << c + bz, bx - i * by, bx + i * by, c - bz;
    return H;
}

std::map<std::string, double> resolve(const std::map<std::string, double>& defaults,
                                      const std::map<std::string, double>& given) {
    std::map<std::string, double> out = defaults;
    for (const auto& [k, v] : given) {
        if (!out.count(k)) throw std::invalid_argument("unknown model parameter: " + k);
        out[k] = v;
    }
    return out;
}

// --- decoupled_diag: H0 = diag(f, f + offset), f = (q^2+p^2)/2, constant pi0

ModelInfo make_decoupled(const std::map<std::string, double>& given) {
    ModelInfo m;
    m.name = "decoupled_diag";
    m.params = resolve({{"offset", 3.0}, {"band", 0.0}}, given);
    const double offset = m.params.at("offset");
    m.description = "diagonal two-band symbol diag(f, f + offset) with f = (q^2+p^2)/2; "
                    "constant eigenprojections, all geometric corrections vanish";
    SymbolModel& s = m.symbol;
    s.n = 1;
    s.d = 2;
    s.band_index = static_cast<int>(m.params.at("band"));
    s.gap_promise = offset;
    s.H0 = [offset](const PhasePoint& z) {
        const double f = 0.5 * (z.q[0] * z.q[0] + z.p[0] * z.p[0]);
        Matrix H(2, 2);
        H << f, 0, 0, f + offset;
        return H;
    };
    s.dH0 = [](const PhasePoint& z, std::vector<Matrix>& dq, std::vector<Matrix>& dp,
               Matrix*) {
        Matrix dfq(2, 2), dfp(2, 2);
        dfq << z.q[0], 0, 0, z.q[0];
        dfp << z.p[0], 0, 0, z.p[0];
        dq[0] = dfq;
        dp[0] = dfp;
    };
    return m;
}

// --- avoided_crossing: H0 = ((q^2+p^2)/2) 1 + theta (q sx + p sy + delta sz)

std::shared_ptr<TwoLevelForm> avoided_crossing_form(double theta, double delta,
                                                    double kinetic) {
    auto f = std::make_shared<TwoLevelForm>();
    f->n = 1;
    f->time_dependent = false;
    f->eval = [theta, delta, kinetic](const double* x, double b[3], double* c) {
        b[0] = theta * x[0];
        b[1] = theta * x[1];
        b[2] = theta * delta;
        *c = kinetic * 0.5 * (x[0] * x[0] + x[1] * x[1]);
    };
    f->deriv = [theta, kinetic](const double* x, int alpha, double db[3], double* dc) {
        db[0] = db[1] = db[2] = 0;
        db[alpha] = theta;
        *dc = kinetic * x[alpha];
    };
    return f;
}

ModelInfo make_avoided(const std::map<std::string, double>& given, bool kinetic) {
    ModelInfo m;
    m.name = kinetic ? "avoided_crossing" : "spin";
    m.params = resolve({{"theta", 0.5}, {"delta", 1.0}, {"band", 0.0}}, given);
    const double theta = m.params.at("theta");
    const double delta = m.params.at("delta");
    m.description =
        kinetic ? "confining two-level symbol ((q^2+p^2)/2) 1 + theta (q sx + p sy + delta sz)"
                : "linear two-level symbol q sx + p sy + delta sz (no scalar part)";
    SymbolModel& s = m.symbol;
    s.n = 1;
    s.d = 2;
    s.band_index = static_cast<int>(m.params.at("band"));
    s.gap_promise = 2.0 * std::abs(theta * delta);
    const double kin = kinetic ? 1.0 : 0.0;
    s.H0 = [theta, delta, kin](const PhasePoint& z) {
        const double c = kin * 0.5 * (z.q[0] * z.q[0] + z.p[0] * z.p[0]);
        return bdotsigma(theta * z.q[0], theta * z.p[0], theta * delta, c);
    };
    s.dH0 = [theta, kin](const PhasePoint& z, std::vector<Matrix>& dq,
                         std::vector<Matrix>& dp, Matrix*) {
        dq[0] = bdotsigma(theta, 0, 0, kin * z.q[0]);
        dp[0] = bdotsigma(0, theta, 0, kin * z.p[0]);
    };
    s.two_level = avoided_crossing_form(theta, delta, kin);
    return m;
}

// --- rice_mele: periodic pump b(t,k) = (t1(s) + cos k, sin k, Delta(s)), s = t/T

ModelInfo make_rice_mele(const std::map<std::string, double>& given) {
    ModelInfo m;
    m.name = "rice_mele";
    m.params = resolve(
        {{"t1_center", 1.0}, {"radius", 0.3}, {"period", 1.0}, {"band", 0.0}}, given);
    const double t1c = m.params.at("t1_center");
    const double r = m.params.at("radius");
    const double T = m.params.at("period");
    m.pump_period = T;
    m.description = "two-band pump, b(t,k) = (t1(s) + cos k, sin k, Delta(s)) with "
                    "t1(s) = t1_center + radius cos(2 pi s), Delta(s) = radius sin(2 pi s)";
    SymbolModel& s = m.symbol;
    s.n = 1;
    s.d = 2;
    s.time_dependent = true;
    s.band_index = static_cast<int>(m.params.at("band"));
    s.periodic = {false, true};
    s.period = {0.0, 2.0 * M_PI};
    s.gap_promise = 0.05;
    auto bfun = [t1c, r, T](double t, double k, double b[3]) {
        const double w = 2.0 * M_PI * t / T;
        b[0] = t1c + r * std::cos(w) + std::cos(k);
        b[1] = std::sin(k);
        b[2] = r * std::sin(w);
    };
    s.H0 = [bfun](const PhasePoint& z) {
        double b[3];
        bfun(z.t.value(), z.p[0], b);
        return bdotsigma(b[0], b[1], b[2], 0.0);
    };
    auto f = std::make_shared<TwoLevelForm>();
    f->n = 1;
    f->time_dependent = true;
    f->eval = [bfun](const double* x, double b[3], double* c) {
        bfun(x[2], x[1], b); // layout (q, k, t)
        *c = 0;
    };
    f->deriv = [t1c, r, T](const double* x, int alpha, double db[3], double* dc) {
        *dc = 0;
        db[0] = db[1] = db[2] = 0;
        if (alpha == 1) {
            db[0] = -std::sin(x[1]);
            db[1] = std::cos(x[1]);
        } else if (alpha == 2) {
            const double w = 2.0 * M_PI * x[2] / T;
            db[0] = -r * std::sin(w) * 2.0 * M_PI / T;
            db[2] = r * std::cos(w) * 2.0 * M_PI / T;
        }
    };
    s.two_level = f;
    return m;
}

// --- dirac_3d: gapped 3d two-band lattice symbol on the torus

ModelInfo make_dirac3d(const std::map<std::string, double>& given) {
    ModelInfo m;
    m.name = "dirac_3d";
    m.params = resolve({{"mass", 3.5}, {"band", 0.0}}, given);
    const double M0 = m.params.at("mass");
    m.description = "3d two-band lattice symbol b(k) = (sin k1, sin k2, mass - cos k1 - "
                    "cos k2 - cos k3)";
    SymbolModel& s = m.symbol;
    s.n = 3;
    s.d = 2;
    s.band_index = static_cast<int>(m.params.at("band"));
    s.periodic = {false, false, false, true, true, true};
    s.period = {0, 0, 0, 2.0 * M_PI, 2.0 * M_PI, 2.0 * M_PI};
    s.gap_promise = 2.0 * std::abs(std::abs(M0) - 3.0);
    s.H0 = [M0](const PhasePoint& z) {
        return bdotsigma(std::sin(z.p[0]), std::sin(z.p[1]),
                         M0 - std::cos(z.p[0]) - std::cos(z.p[1]) - std::cos(z.p[2]), 0.0);
    };
    auto f = std::make_shared<TwoLevelForm>();
    f->n = 3;
    f->time_dependent = false;
    f->eval = [M0](const double* x, double b[3], double* c) {
        b[0] = std::sin(x[3]);
        b[1] = std::sin(x[4]);
        b[2] = M0 - std::cos(x[3]) - std::cos(x[4]) - std::cos(x[5]);
        *c = 0;
    };
    f->deriv = [](const double* x, int alpha, double db[3], double* dc) {
        *dc = 0;
        db[0] = db[1] = db[2] = 0;
        if (alpha == 3) {
            db[0] = std::cos(x[3]);
            db[2] = std::sin(x[3]);
        } else if (alpha == 4) {
            db[1] = std::cos(x[4]);
            db[2] = std::sin(x[4]);
        } else if (alpha == 5) {
            db[2] = std::sin(x[5]);
        }
    };
    s.two_level = f;
    return m;
}

} // namespace

ModelInfo make_model(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "decoupled_diag") return make_decoupled(params);
    if (name == "avoided_crossing") return make_avoided(params, true);
    if (name == "spin") return make_avoided(params, false);
    if (name == "rice_mele") return make_rice_mele(params);
    if (name == "dirac_3d") return make_dirac3d(params);
    throw std::invalid_argument("unknown model: " + name);
}

std::vector<std::string> model_names() {
    return {"avoided_crossing", "decoupled_diag", "dirac_3d", "rice_mele", "spin"};
}

std::map<std::string, double> model_defaults(const std::string& name) {
    return make_model(name).params;
}

std::string model_description(const std::string& name) {
    return make_model(name).description;
}

} // namespace adiabatica
