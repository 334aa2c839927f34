// Benchmark: closed-form two-level band kernels versus the generic
// matrix-valued path (dense eigensolve + reduced resolvent), and the
// corrected flow built on each. The generic path stays in the library as the
// serial reference the tests cross-validate against.
#include <chrono>
#include <cstdio>

#include "adiabatica/band.hpp"
#include "adiabatica/flow.hpp"
#include "adiabatica/models.hpp"

using namespace adiabatica;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

RealVec point2(double q, double p) {
    RealVec z(2);
    z << q, p;
    return z;
}

} // namespace

int main() {
    auto mi = make_model("avoided_crossing");
    SymbolModel fast = mi.symbol;
    SymbolModel generic = mi.symbol;
    generic.two_level = nullptr; // force the dense reference path

    const double eps = 1.0 / 16;
    const int reps = 20000;

    // pointwise band package
    double sink = 0;
    auto bench_band = [&](const SymbolModel& m, const char* label) {
        BandOptions opts;
        opts.gap_min = 0.5 * m.gap_promise;
        const auto t0 = clock_type::now();
        for (int i = 0; i < reps; ++i) {
            PhasePoint z = PhasePoint::make(0.3 + 1e-6 * i, -0.7);
            sink += band_data(m, z, eps, opts).h;
        }
        const double ms = ms_since(t0);
        std::printf("%-28s %8.1f ms   (%.2f us/point)\n", label, ms, 1e3 * ms / reps);
        return ms;
    };
    const double tb_fast = bench_band(fast, "band_data closed-form");
    const double tb_gen = bench_band(generic, "band_data generic");
    std::printf("band_data speedup: %.1fx\n\n", tb_gen / tb_fast);

    // corrected flow over one time unit
    auto bench_flow = [&](const SymbolModel& m, const char* label) {
        FlowConfig cfg;
        cfg.epsilon = eps;
        cfg.gap_min = 0.5 * m.gap_promise;
        cfg.dt = 1e-3;
        const auto t0 = clock_type::now();
        const RealVec end = flow_point(m, point2(1.0, 0.0), 0.0, 1.0, cfg);
        const double ms = ms_since(t0);
        sink += end[0];
        std::printf("%-28s %8.1f ms\n", label, ms);
        return ms;
    };
    const double tf_fast = bench_flow(fast, "flow t=1 closed-form");
    const double tf_gen = bench_flow(generic, "flow t=1 generic");
    std::printf("flow speedup: %.1fx\n", tf_gen / tf_fast);

    // keep the optimizer honest
    std::printf("(checksum %g)\n", sink);
    return 0;
}
