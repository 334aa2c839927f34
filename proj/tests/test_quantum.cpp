#include <doctest.h>

#include <cmath>
#include <random>

#include "adiabatica/models.hpp"
#include "adiabatica/quantum.hpp"

using namespace adiabatica;

namespace {

Grid small_grid(int N = 64, double eps = 1.0 / 16) {
    Grid g;
    g.x_min = -8;
    g.x_max = 8;
    g.N = N;
    g.epsilon = eps;
    return g;
}

double gauss(double u, double s) { return std::exp(-u * u / (2 * s * s)); }

} // namespace

TEST_CASE("momentum grid spans [-pi eps N / L, pi eps N / L)") {
    const Grid g = small_grid(128, 1.0 / 8);
    CHECK(g.p(-g.N / 2) == doctest::Approx(-M_PI * g.epsilon * g.N / g.L()));
    CHECK(g.p(0) == 0.0);
    CHECK(g.p_of_bin(g.N - 1) == doctest::Approx(-g.dp()));
    CHECK(g.p_of_bin(1) == doctest::Approx(g.dp()));
}

TEST_CASE("Op(1) is the identity exactly") {
    const Grid g = small_grid();
    const auto A = weyl_quantize_scalar([](double, double) { return 1.0; }, 2, g);
    CHECK((A.mat - Matrix::Identity(2 * g.N, 2 * g.N)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("Op(f(q)) is diagonal with entries f(x_j)") {
    const Grid g = small_grid();
    auto f = [](double q) { return std::cos(q) + 0.3 * q; };
    const auto A = weyl_quantize_scalar([&](double q, double) { return f(q); }, 1, g);
    for (int j = 0; j < g.N; ++j)
        for (int l = 0; l < g.N; ++l) {
            const Complex expected = j == l ? Complex(f(g.x(j))) : Complex(0);
            CHECK(std::abs(A.mat(j, l) - expected) < 1e-13);
        }
}

TEST_CASE("Op(p) has the discrete plane waves as eigenvectors") {
    const Grid g = small_grid();
    const auto A = weyl_quantize_scalar([](double, double p) { return p; }, 1, g);
    for (int m : {0, 1, 5, -3, -g.N / 2}) {
        Eigen::VectorXcd psi(g.N);
        for (int j = 0; j < g.N; ++j)
            psi[j] = std::exp(Complex(0, 2 * M_PI * m * j / double(g.N)));
        const Eigen::VectorXcd out = A.mat * psi;
        CHECK((out - g.p(m) * psi).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("Op is linear") {
    const Grid g = small_grid(32);
    auto a = [](double q, double p) { return gauss(q - 1, 1.0) * gauss(p, 1.0); };
    auto b = [](double q, double p) { return std::sin(q) * gauss(p - 0.5, 0.8); };
    const auto A = weyl_quantize_scalar(a, 1, g);
    const auto B = weyl_quantize_scalar(b, 1, g);
    const auto C = weyl_quantize_scalar(
        [&](double q, double p) { return 2.0 * a(q, p) - 0.5 * b(q, p); }, 1, g);
    CHECK((C.mat - 2.0 * A.mat + 0.5 * B.mat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quantized model Hamiltonians are Hermitian") {
    Grid g = small_grid(256);
    for (const char* name : {"avoided_crossing", "decoupled_diag", "spin"}) {
        auto m = make_model(name);
        const auto H = weyl_quantize(hamiltonian_symbol(m.symbol, g.epsilon), 2, g);
        const double herm = (H.mat - H.mat.adjoint()).cwiseAbs().maxCoeff();
        CHECK(herm < 1e-10 * H.mat.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("trace of a product: operator side vs phase-space side") {
    const Grid g = small_grid(64);
    SUBCASE("identity pair") {
        const auto I2 = weyl_quantize_scalar([](double, double) { return 1.0; }, 2, g);
        CHECK(trace_pair(I2, I2).real() == doctest::Approx(2.0 * g.N));
        const auto ps = phase_space_trace(
            [](double, double) { return Matrix::Identity(2, 2); },
            [](double, double) { return Matrix::Identity(2, 2); }, 2, g);
        CHECK(ps.real() == doctest::Approx(2.0 * g.N));
    }
    SUBCASE("multiplication operators are exact") {
        auto f = [](double q) { return gauss(q, 2.0); };
        auto gq = [](double q) { return q * gauss(q, 1.5); };
        const auto F = weyl_quantize_scalar([&](double q, double) { return f(q); }, 1, g);
        const auto G = weyl_quantize_scalar([&](double q, double) { return gq(q); }, 1, g);
        double direct = 0;
        for (int j = 0; j < g.N; ++j) direct += f(g.x(j)) * gq(g.x(j));
        CHECK(trace_pair(F, G).real() == doctest::Approx(direct).epsilon(1e-12));
    }
    SUBCASE("Gaussian symbols at N = 512") {
        const Grid gg = small_grid(512, 1.0 / 16);
        auto a = [](double q, double p) { return gauss(q - 0.5, 1.0) * gauss(p, 1.0); };
        auto b = [](double q, double p) { return gauss(q, 1.2) * gauss(p + 0.3, 0.9); };
        const auto A = weyl_quantize_scalar(a, 1, gg);
        const auto B = weyl_quantize_scalar(b, 1, gg);
        const Complex lhs = trace_pair(A, B);
        const Complex rhs = phase_space_trace(
            [&](double q, double p) { return Matrix::Constant(1, 1, a(q, p)); },
            [&](double q, double p) { return Matrix::Constant(1, 1, b(q, p)); }, 1, gg);
        CHECK(std::abs(lhs - rhs) < 1e-8 * std::abs(rhs));
    }
}

TEST_CASE("propagation is unitary and trivial cases are exact") {
    Grid g = small_grid(128);
    auto m = make_model("avoided_crossing");
    const auto H = weyl_quantize(hamiltonian_symbol(m.symbol, g.epsilon), 2, g);
    const auto sp = diagonalize(H);

    WaveFunction psi;
    psi.grid = g;
    psi.d = 2;
    std::mt19937 rng(57);
    std::normal_distribution<double> nd;
    psi.values = Eigen::VectorXcd::Zero(2 * g.N);
    for (int i = 0; i < psi.values.size(); ++i) psi.values[i] = Complex(nd(rng), nd(rng));
    psi.normalize();

    const WaveFunction at0 = propagate(sp, psi, 0.0);
    CHECK((at0.values - psi.values).cwiseAbs().maxCoeff() < 1e-10);

    const WaveFunction at1 = propagate(sp, psi, 1.0);
    CHECK(at1.norm() == doctest::Approx(psi.norm()).epsilon(1e-10));
}

TEST_CASE("functional calculus") {
    Grid g = small_grid(64);
    auto m = make_model("avoided_crossing");
    const auto H = weyl_quantize(hamiltonian_symbol(m.symbol, g.epsilon), 2, g);
    const auto sp = diagonalize(H);

    const auto one = op_function(sp, [](double) { return 1.0; });
    CHECK((one.mat - Matrix::Identity(2 * g.N, 2 * g.N)).cwiseAbs().maxCoeff() < 1e-9);

    const auto idf = op_function(sp, [](double x) { return x; });
    CHECK((idf.mat - H.mat).cwiseAbs().maxCoeff() < 1e-9 * H.mat.cwiseAbs().maxCoeff());

    const auto gse = op_function(sp, [](double x) { return std::exp(-x * x); });
    const auto sp2 = diagonalize(gse);
    RealVec expected(sp.spec.evals.size());
    for (int i = 0; i < expected.size(); ++i)
        expected[i] = std::exp(-sp.spec.evals[i] * sp.spec.evals[i]);
    std::sort(expected.data(), expected.data() + expected.size());
    CHECK((sp2.spec.evals - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("superadiabatic projector of the decoupled model is exact") {
    Grid g = small_grid(64);
    auto m = make_model("decoupled_diag");
    const auto pr = superadiabatic_projector(m.symbol, g);
    CHECK(pr.rank == g.N);
    CHECK(pr.defect < 1e-10);
    // Op(diag(1,0)): diagonal pattern selecting the first component
    Matrix expected = Matrix::Zero(2 * g.N, 2 * g.N);
    for (int j = 0; j < g.N; ++j) expected(2 * j, 2 * j) = 1.0;
    CHECK((pr.pi_hat.mat - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("collar periodization: identity on the core, smooth and flat at the seam") {
    Grid g = small_grid(256, 1.0 / 8); // Xp = 2 pi
    auto m = make_model("avoided_crossing");
    const SymbolModel qm = periodized_for_grid(m.symbol, g);
    const double Xq = 0.5 * g.L(), Xp = M_PI * g.epsilon * g.N / g.L();

    // untouched on the core region
    for (double q : {-3.0, 0.0, 3.5}) {
        for (double p : {-3.0, 0.5, 3.0}) {
            PhasePoint z = PhasePoint::make(q, p);
            CHECK((qm.H0(z) - m.symbol.H0(z)).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    // flat at the seam: value there matches the flattened center, both signs
    PhasePoint seam_lo = PhasePoint::make(-Xq, -Xp);
    PhasePoint seam_hi = PhasePoint::make(Xq - g.dx(), Xp - g.dp());
    CHECK((qm.H0(seam_lo) - qm.H0(seam_hi)).cwiseAbs().maxCoeff() < 1e-6);

    // wrapped two-level fast path agrees with the wrapped generic evaluator,
    // including a point inside the collar
    REQUIRE(qm.two_level);
    for (double p : {1.0, 0.8 * Xp}) {
        const double x[2] = {1.0, p};
        double b[3], c;
        qm.two_level->eval(x, b, &c);
        PhasePoint z = PhasePoint::make(x[0], x[1]);
        const Matrix H = qm.H0(z);
        CHECK(std::real(H(0, 0) + H(1, 1)) / 2 == doctest::Approx(c).epsilon(1e-12));
        CHECK(std::real(H(0, 1)) == doctest::Approx(b[0]).epsilon(1e-10));
        // derivative callback matches finite differences of the wrapped eval
        const double h = 1e-6;
        for (int alpha = 0; alpha < 2; ++alpha) {
            double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
            xp[alpha] += h;
            xm[alpha] -= h;
            double bp[3], bm[3], cp, cm, db[3], dc;
            qm.two_level->eval(xp, bp, &cp);
            qm.two_level->eval(xm, bm, &cm);
            qm.two_level->deriv(x, alpha, db, &dc);
            for (int i = 0; i < 3; ++i)
                CHECK(db[i] == doctest::Approx((bp[i] - bm[i]) / (2 * h)).epsilon(1e-4));
        }
    }

    // a model that declares an axis periodic keeps it untouched there
    auto rm = make_model("rice_mele");
    Grid gk = small_grid(128, 1.0 / 8);
    const SymbolModel rmp = periodized_for_grid(rm.symbol, gk);
    const double Xpk = M_PI * gk.epsilon * gk.N / gk.L();
    PhasePoint zk = PhasePoint::make(1.0, 0.99 * Xpk); // q core, kappa near seam
    zk.t = 0.3;
    CHECK((rmp.H0(zk) - rm.symbol.H0(zk)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("superadiabatic projector clusters and squares to itself") {
    // confining symbol: quantize the collar-periodized model so the symbol is
    // smooth on the torus (the raw symbol jumps at the seam and pins mid-gap
    // eigenvalues of P0 there)
    Grid g = small_grid(256, 1.0 / 8);
    auto m = make_model("avoided_crossing");
    const auto pr = superadiabatic_projector(periodized_for_grid(m.symbol, g), g);
    CHECK(pr.defect < 0.06);
    const Matrix sq = pr.pi_hat.mat * pr.pi_hat.mat;
    CHECK((sq - pr.pi_hat.mat).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pr.rank == g.N); // one band of two
}

TEST_CASE("Wigner transform of a coherent state") {
    Grid g = small_grid(256, 1.0 / 16);
    const double q0 = 1.0, p0 = 0.5;
    const WaveFunction psi =
        gaussian_packet(g, 1, q0, p0, 1.0, Eigen::VectorXcd::Ones(1));

    const RealMat W = wigner_trace(psi);

    SUBCASE("normalization") {
        const double total = W.sum() * g.dx() * g.dp() / (2 * M_PI * g.epsilon);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("peak location and positivity") {
        int jmax = 0, kmax = 0;
        W.maxCoeff(&jmax, &kmax);
        CHECK(W(jmax, kmax) > 0);
        CHECK(std::abs(g.x(jmax) - q0) <= g.dx() / 2 + 1e-12);
        CHECK(std::abs(g.p_of_bin(kmax) - p0) <= g.dp() / 2 + 1e-12);
    }
    SUBCASE("duality with quantization") {
        const Grid g2 = small_grid(512, 1.0 / 16);
        const WaveFunction phi =
            gaussian_packet(g2, 1, q0, p0, 1.0, Eigen::VectorXcd::Ones(1));
        auto a = [](double q, double p) {
            return gauss(q - 0.8, 0.9) * gauss(p - 0.4, 0.7);
        };
        const auto A = weyl_quantize_scalar(a, 1, g2);
        const Complex lhs = expectation(A, phi);
        const RealMat W2 = wigner_trace(phi);
        double rhs = 0;
        for (int j = 0; j < g2.N; ++j)
            for (int kb = 0; kb < g2.N; ++kb)
                rhs += a(g2.x(j), g2.p_of_bin(kb)) * W2(j, kb);
        rhs *= g2.dx() * g2.dp() / (2 * M_PI * g2.epsilon);
        CHECK(std::abs(lhs.imag()) < 1e-10);
        CHECK(lhs.real() == doctest::Approx(rhs).epsilon(1e-7));
    }
}

TEST_CASE("matrix-valued Wigner agrees with the traced fast path") {
    Grid g = small_grid(64, 1.0 / 8);
    WaveFunction psi = gaussian_packet(g, 2, 0.5, 0.25, 1.0,
                                       (Eigen::VectorXcd(2) << 1.0, Complex(0, 1)).finished());
    const RealMat W = wigner_trace(psi);
    for (int j : {10, 32, 50})
        for (int k : {-20, 0, 7}) {
            const Matrix Wm = wigner_matrix(psi, j, k);
            const int kb = (k + g.N) % g.N;
            CHECK(Wm.trace().real() == doctest::Approx(W(j, kb)).epsilon(1e-10).scale(1.0));
            CHECK(is_hermitian(Wm, 1e-10));
        }
}

TEST_CASE("band Wigner reduces to the trace for constant projections") {
    Grid g = small_grid(64, 1.0 / 8);
    auto m = make_model("decoupled_diag");
    WaveFunction psi = gaussian_packet(g, 2, 0.0, 0.5, 1.0,
                                       (Eigen::VectorXcd(2) << 1.0, 0.0).finished());
    const RealMat W = wigner_trace(psi);
    const RealMat Wb = band_wigner(psi, m.symbol, g.epsilon);
    CHECK((W - Wb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("grid mismatch is rejected") {
    const Grid a = small_grid(64), b = small_grid(128);
    const auto A = weyl_quantize_scalar([](double, double) { return 1.0; }, 1, a);
    const auto B = weyl_quantize_scalar([](double, double) { return 1.0; }, 1, b);
    CHECK_THROWS_AS(trace_pair(A, B), GridMismatch);
}
