#include "adiabatica/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <omp.h>
#include <set>
#include <sstream>

#include "adiabatica/bloch.hpp"
#include "adiabatica/models.hpp"

extern "C" void openblas_set_num_threads(int);

namespace adiabatica {

using nlohmann::json;

namespace {

const std::vector<std::string> kExperiments = {
    "band-info", "flow",  "egorov", "equilibrium", "wigner", "projector",
    "residual",  "moyal", "pump",   "chern",       "piezo"};

/// Config keys each experiment accepts beyond the common set.
const std::map<std::string, std::set<std::string>> kKeys = {
    {"band-info", {"epsilon", "points"}},
    {"flow", {"epsilon", "mode", "z0", "t"}},
    {"egorov", {"sweep", "epsilon", "grid", "mode", "t", "observable"}},
    {"equilibrium", {"sweep", "epsilon", "grid", "mode", "f", "observable"}},
    {"wigner", {"sweep", "epsilon", "grid", "mode", "t", "observable", "state"}},
    {"projector", {"sweep", "epsilon", "grid", "t"}},
    {"residual", {"sweep", "epsilon", "grid", "mode"}},
    {"moyal", {"sweep", "epsilon", "grid", "observable", "observable_b"}},
    {"pump", {"nodes", "T"}},
    {"chern", {"nodes_t", "nodes_k", "T"}},
    {"piezo", {"nodes", "t", "b_field"}},
};

std::map<std::string, double> param_map(const json& j, const std::string& where) {
    std::map<std::string, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number())
            throw ConfigError(where + "." + it.key() + ": expected a number");
        out[it.key()] = it.value().get<double>();
    }
    return out;
}

Selector parse_selector(const json& j, const std::string& where) {
    Selector s;
    if (j.is_string()) {
        s.name = j.get<std::string>();
        return s;
    }
    if (!j.is_object()) throw ConfigError(where + ": expected a name or {name, params}");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "name" && it.key() != "params")
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    if (!j.contains("name")) throw ConfigError(where + ": missing 'name'");
    s.name = j.at("name").get<std::string>();
    if (j.contains("params")) s.params = param_map(j.at("params"), where + ".params");
    return s;
}

json selector_json(const Selector& s) {
    json j;
    j["name"] = s.name;
    if (!s.params.empty()) j["params"] = s.params;
    return j;
}

std::vector<double> parse_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(where + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

/// Fixed-format float: locale-free, round-trips doubles, no trailing noise.
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct CsvWriter {
    std::ostringstream os;
    explicit CsvWriter(const std::vector<std::string>& header) {
        for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << "\n";
    }
};

FlowMode parse_mode(const std::string& mode) {
    if (mode == "corrected_truncated") return FlowMode::corrected_truncated;
    if (mode == "corrected_exact") return FlowMode::corrected_exact;
    if (mode == "uncorrected") return FlowMode::uncorrected;
    throw ConfigError("mode: unknown value '" + mode + "'");
}

json curve_json(const ErrorCurve& curve) {
    json j;
    j["epsilons"] = curve.epsilons;
    j["errors"] = curve.errors;
    try {
        const OrderFit fit = fit_order(curve);
        if (fit.exact) {
            j["exact"] = true;
        } else {
            j["slope"] = fit.slope;
            j["intercept"] = fit.intercept;
            j["r_squared"] = fit.r_squared;
        }
    } catch (const DegenerateFit& e) {
        j["fit_error"] = e.what();
    }
    return j;
}

void write_sweep_csv(CsvWriter& csv, const ErrorCurve& curve) {
    for (size_t i = 0; i < curve.epsilons.size(); ++i)
        csv.row({fmt(curve.epsilons[i]), fmt(curve.errors[i]), curve.experiment, curve.model,
                 curve.mode, fmt(curve.t), std::to_string(curve.N)});
}

const std::vector<std::string> kSweepHeader = {"epsilon", "error", "experiment",
                                               "model",   "mode",  "t",
                                               "N"};

} // namespace

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("config")) j = j.at("config"); // accept a manifest round-trip

    RunConfig c;
    if (!j.contains("experiment")) throw ConfigError("missing 'experiment'");
    c.experiment = j.at("experiment").get<std::string>();
    const auto keys_it = kKeys.find(c.experiment);
    if (keys_it == kKeys.end()) {
        std::string msg = "unknown experiment '" + c.experiment + "'; known:";
        for (const auto& e : kExperiments) msg += " " + e;
        throw ConfigError(msg);
    }
    const std::set<std::string> common = {"experiment", "model", "output", "threads"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!common.count(it.key()) && !keys_it->second.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' for experiment '" +
                              c.experiment + "'");

    if (!j.contains("model")) throw ConfigError("missing 'model'");
    c.model = parse_selector(j.at("model"), "model");
    {
        const auto names = model_names();
        if (std::find(names.begin(), names.end(), c.model.name) == names.end()) {
            std::string msg = "unknown model '" + c.model.name + "'; registry:";
            for (const auto& n : names) msg += " " + n;
            throw ConfigError(msg);
        }
    }

    if (j.contains("sweep")) c.sweep = parse_list(j.at("sweep"), "sweep");
    if (j.contains("epsilon")) {
        if (!c.sweep.empty()) throw ConfigError("give either 'epsilon' or 'sweep', not both");
        c.sweep = {j.at("epsilon").get<double>()};
    }
    for (double e : c.sweep)
        if (!(e > 0)) throw ConfigError("epsilon values must be positive");

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        for (auto it = g.begin(); it != g.end(); ++it)
            if (it.key() != "N" && it.key() != "x_min" && it.key() != "x_max")
                throw ConfigError("grid: unknown key '" + it.key() + "'");
        if (!g.contains("N")) throw ConfigError("grid: missing 'N'");
        c.N = g.at("N").get<int>();
        if (c.N < 2) throw ConfigError("grid.N must be at least 2");
        if (g.contains("x_min")) c.x_min = g.at("x_min").get<double>();
        if (g.contains("x_max")) c.x_max = g.at("x_max").get<double>();
        if (c.x_min != 0 || c.x_max != 0)
            if (!(c.x_min < c.x_max)) throw ConfigError("grid: need x_min < x_max");
    }

    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    if (c.mode != "corrected_truncated" && c.mode != "corrected_exact" &&
        c.mode != "uncorrected")
        throw ConfigError("mode: unknown value '" + c.mode + "'");
    if (j.contains("t")) c.t = j.at("t").get<double>();
    if (j.contains("T")) c.T = j.at("T").get<double>();

    if (j.contains("observable")) c.observable = parse_selector(j.at("observable"), "observable");
    if (j.contains("observable_b"))
        c.observable_b = parse_selector(j.at("observable_b"), "observable_b");
    if (j.contains("f")) c.f = parse_selector(j.at("f"), "f");
    if (j.contains("state")) c.state = parse_selector(j.at("state"), "state");

    if (j.contains("z0")) c.z0 = parse_list(j.at("z0"), "z0");
    if (j.contains("points")) {
        if (!j.at("points").is_array()) throw ConfigError("points: expected [[q, p], ...]");
        for (const auto& pt : j.at("points")) {
            const auto v = parse_list(pt, "points");
            if (v.size() != 2) throw ConfigError("points: each entry is [q, p]");
            c.points.push_back(v[0]);
            c.points.push_back(v[1]);
        }
    }

    if (j.contains("nodes")) c.nodes = j.at("nodes").get<int>();
    if (j.contains("nodes_t")) c.nodes_t = j.at("nodes_t").get<int>();
    if (j.contains("nodes_k")) c.nodes_k = j.at("nodes_k").get<int>();
    if (j.contains("b_field")) c.b_field = parse_list(j.at("b_field"), "b_field");

    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();

    // explicit resolution requirements: no hidden epsilon / grid defaults
    const bool sweep_exp = c.experiment == "egorov" || c.experiment == "equilibrium" ||
                           c.experiment == "wigner" || c.experiment == "projector" ||
                           c.experiment == "residual" || c.experiment == "moyal";
    if (sweep_exp) {
        if (c.sweep.empty()) throw ConfigError(c.experiment + ": 'sweep' or 'epsilon' required");
        if (c.N == 0) throw ConfigError(c.experiment + ": 'grid' with N required");
    }
    if ((c.experiment == "band-info" || c.experiment == "flow") && c.sweep.size() != 1)
        throw ConfigError(c.experiment + ": a single 'epsilon' is required");
    if (c.experiment == "flow" && c.z0.size() != 2)
        throw ConfigError("flow: 'z0' = [q, p] is required");
    if (c.experiment == "band-info" && c.points.empty())
        throw ConfigError("band-info: 'points' is required");
    if ((c.experiment == "egorov" || c.experiment == "equilibrium" ||
         c.experiment == "wigner" || c.experiment == "moyal") &&
        c.observable.name.empty())
        throw ConfigError(c.experiment + ": 'observable' is required");
    if (c.experiment == "moyal" && c.observable_b.name.empty())
        throw ConfigError("moyal: 'observable_b' is required");
    if (c.experiment == "equilibrium" && c.f.name.empty())
        throw ConfigError("equilibrium: 'f' is required");
    if (c.experiment == "wigner" && c.state.name.empty())
        throw ConfigError("wigner: 'state' is required");
    if (c.experiment == "pump" && c.nodes == 0)
        throw ConfigError("pump: 'nodes' is required");
    if (c.experiment == "chern" && (c.nodes_t == 0 || c.nodes_k == 0))
        throw ConfigError("chern: 'nodes_t' and 'nodes_k' are required");
    if (c.experiment == "piezo") {
        if (c.nodes == 0) throw ConfigError("piezo: 'nodes' is required");
        if (c.b_field.size() != 3) throw ConfigError("piezo: 'b_field' = [B1, B2, B3] required");
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

namespace {

json config_json(const RunConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["model"] = selector_json(c.model);
    j["output"] = c.output;
    if (c.threads > 0) j["threads"] = c.threads;
    const auto& keys = kKeys.at(c.experiment);
    if (keys.count("sweep") && c.sweep.size() > 1) j["sweep"] = c.sweep;
    if ((keys.count("sweep") || keys.count("epsilon")) && c.sweep.size() == 1)
        j["epsilon"] = c.sweep[0];
    if (keys.count("grid") && c.N > 0) {
        j["grid"]["N"] = c.N;
        if (c.x_min != 0 || c.x_max != 0) {
            j["grid"]["x_min"] = c.x_min;
            j["grid"]["x_max"] = c.x_max;
        }
    }
    if (keys.count("mode")) j["mode"] = c.mode;
    if (keys.count("t")) j["t"] = c.t;
    if (keys.count("T") && c.T > 0) j["T"] = c.T;
    if (keys.count("observable") && !c.observable.name.empty())
        j["observable"] = selector_json(c.observable);
    if (keys.count("observable_b") && !c.observable_b.name.empty())
        j["observable_b"] = selector_json(c.observable_b);
    if (keys.count("f") && !c.f.name.empty()) j["f"] = selector_json(c.f);
    if (keys.count("state") && !c.state.name.empty()) j["state"] = selector_json(c.state);
    if (keys.count("z0") && !c.z0.empty()) j["z0"] = c.z0;
    if (keys.count("points") && !c.points.empty()) {
        json pts = json::array();
        for (size_t i = 0; i + 1 < c.points.size(); i += 2)
            pts.push_back({c.points[i], c.points[i + 1]});
        j["points"] = pts;
    }
    if (keys.count("nodes") && c.nodes > 0) j["nodes"] = c.nodes;
    if (keys.count("nodes_t") && c.nodes_t > 0) j["nodes_t"] = c.nodes_t;
    if (keys.count("nodes_k") && c.nodes_k > 0) j["nodes_k"] = c.nodes_k;
    if (keys.count("b_field") && !c.b_field.empty()) j["b_field"] = c.b_field;
    return j;
}

double get_param(const Selector& s, const std::string& key, double dflt) {
    auto it = s.params.find(key);
    return it == s.params.end() ? dflt : it->second;
}

Grid make_grid(const RunConfig& c, const ModelInfo& mi, double eps) {
    Grid g;
    g.N = c.N;
    g.epsilon = eps;
    if (c.x_min != 0 || c.x_max != 0) {
        g.x_min = c.x_min;
        g.x_max = c.x_max;
    } else {
        g.x_min = mi.x_min;
        g.x_max = mi.x_max;
    }
    return g;
}

RealMat skew_from_dual(const std::vector<double>& b) {
    RealMat B = RealMat::Zero(3, 3);
    B(2, 1) = b[0];
    B(1, 2) = -b[0];
    B(0, 2) = b[1];
    B(2, 0) = -b[1];
    B(1, 0) = b[2];
    B(0, 1) = -b[2];
    return B;
}

ErrorCurve run_sweep(
    const RunConfig& c, const ModelInfo& mi,
    const std::function<double(const SymbolModel&, const GridPack&, double)>& body) {
    ErrorCurve curve;
    curve.experiment = c.experiment;
    curve.model = mi.name;
    curve.mode = c.mode;
    curve.t = c.t;
    curve.N = c.N;
    for (double eps : c.sweep) {
        const Grid g = make_grid(c, mi, eps);
        // quantization needs a symbol that is smooth on the grid torus;
        // confining models get the collar periodization (identity on the core
        // region where the dynamics lives)
        const SymbolModel qm = periodized_for_grid(mi.symbol, g);
        const GridPack pack = GridPack::build(qm, g);
        curve.epsilons.push_back(eps);
        curve.errors.push_back(body(qm, pack, eps));
    }
    return curve;
}

} // namespace

ScalarSymbol1 make_observable(const Selector& sel) {
    if (sel.name == "gaussian") {
        for (const auto& [k, v] : sel.params)
            if (k != "q0" && k != "p0" && k != "sigma")
                throw ConfigError("observable gaussian: unknown param '" + k + "'");
        const double q0 = get_param(sel, "q0", 0.0);
        const double p0 = get_param(sel, "p0", 0.0);
        const double s = get_param(sel, "sigma", 1.0);
        if (!(s > 0)) throw ConfigError("observable gaussian: sigma must be positive");
        const double w = 1.0 / (2.0 * s * s);
        ScalarSymbol1 a;
        a.value = [=](double q, double p) {
            return std::exp(-w * ((q - q0) * (q - q0) + (p - p0) * (p - p0)));
        };
        a.dq = [=, value = a.value](double q, double p) {
            return -2.0 * w * (q - q0) * value(q, p);
        };
        a.dp = [=, value = a.value](double q, double p) {
            return -2.0 * w * (p - p0) * value(q, p);
        };
        return a;
    }
    throw ConfigError("unknown observable '" + sel.name + "'; known: gaussian");
}

std::function<double(double)> make_energy_window(const Selector& sel) {
    if (sel.name == "bump") {
        for (const auto& [k, v] : sel.params)
            if (k != "center" && k != "width")
                throw ConfigError("f bump: unknown param '" + k + "'");
        const double c = get_param(sel, "center", 1.0);
        const double w = get_param(sel, "width", 1.0);
        if (!(w > 0)) throw ConfigError("f bump: width must be positive");
        return [=](double E) {
            const double tau = (E - c) / w;
            if (std::abs(tau) >= 1.0) return 0.0;
            return std::exp(1.0 - 1.0 / (1.0 - tau * tau));
        };
    }
    throw ConfigError("unknown energy window '" + sel.name + "'; known: bump");
}

namespace {

WaveFunction make_state(const Selector& sel, const SymbolModel& model, const Grid& grid) {
    if (sel.name == "band_packet") {
        for (const auto& [k, v] : sel.params)
            if (k != "q0" && k != "p0" && k != "sigma")
                throw ConfigError("state band_packet: unknown param '" + k + "'");
        const double q0 = get_param(sel, "q0", 0.0);
        const double p0 = get_param(sel, "p0", 0.0);
        const double s = get_param(sel, "sigma", 1.0);
        PhasePoint z = PhasePoint::make(q0, p0);
        const Matrix pi0 = spectral_band(model.H0(z), model.band_index,
                                         0.5 * model.gap_promise)
                               .pi0;
        Eigen::SelfAdjointEigenSolver<Matrix> es(pi0);
        // rank-1 projector: eigenvector of the eigenvalue ~1
        Eigen::VectorXcd spinor = es.eigenvectors().col(model.d - 1);
        // deterministic gauge: make the largest component real positive
        int imax = 0;
        spinor.cwiseAbs().maxCoeff(&imax);
        spinor *= std::abs(spinor[imax]) / spinor[imax];
        return gaussian_packet(grid, model.d, q0, p0, s, spinor);
    }
    throw ConfigError("unknown state '" + sel.name + "'; known: band_packet");
}

} // namespace

int run(const RunConfig& config) {
    openblas_set_num_threads(1); // parallelism lives in our own loops
    int threads = config.threads;
    if (threads <= 0)
        if (const char* env = std::getenv("ADIABATICA_THREADS")) threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);

    const auto t_start = std::chrono::steady_clock::now();
    json manifest;
    manifest["config"] = config_json(config);
    manifest["versions"] = {{"adiabatica", "1.0.0"},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)}};

    std::filesystem::create_directories(config.output);
    const auto finish = [&](CsvWriter& csv, int code) {
        const auto t_end = std::chrono::steady_clock::now();
        manifest["wall_time_s"] =
            std::chrono::duration<double>(t_end - t_start).count();
        if (code == 0) std::ofstream(config.output + "/results.csv") << csv.os.str();
        std::ofstream(config.output + "/manifest.json") << manifest.dump(2) << "\n";
        return code;
    };

    CsvWriter csv({"placeholder"});
    try {
        const ModelInfo mi = make_model(config.model.name, config.model.params);
        const auto& c = config;

        if (c.experiment == "band-info") {
            csv = CsvWriter({"q", "p", "epsilon", "e0", "gap", "e1", "M", "h", "density",
                             "Omega_qp"});
            const double eps = c.sweep[0];
            for (size_t i = 0; i + 1 < c.points.size(); i += 2) {
                PhasePoint z = PhasePoint::make(c.points[i], c.points[i + 1]);
                BandOptions opts;
                opts.gap_min = 0.5 * mi.symbol.gap_promise;
                const BandData bd = band_data(mi.symbol, z, eps, opts);
                csv.row({fmt(c.points[i]), fmt(c.points[i + 1]), fmt(eps), fmt(bd.e0),
                         fmt(bd.gap), fmt(bd.e1), fmt(bd.M), fmt(bd.h),
                         fmt(bd.liouville_density), fmt(bd.Omega(0, 1))});
            }
        } else if (c.experiment == "flow") {
            csv = CsvWriter({"time", "q", "p", "h", "density"});
            FlowConfig fc;
            fc.epsilon = c.sweep[0];
            fc.mode = parse_mode(c.mode);
            fc.gap_min = 0.5 * mi.symbol.gap_promise;
            RealVec z0(2);
            z0 << c.z0[0], c.z0[1];
            const Trajectory traj = integrate(mi.symbol, z0, 0.0, c.t, fc);
            for (size_t i = 0; i < traj.times.size(); ++i)
                csv.row({fmt(traj.times[i]), fmt(traj.points[i][0]), fmt(traj.points[i][1]),
                         fmt(traj.h_values[i]), fmt(traj.densities[i])});
            manifest["results"]["endpoint"] = {traj.points.back()[0], traj.points.back()[1]};
        } else if (c.experiment == "egorov") {
            csv = CsvWriter(kSweepHeader);
            const ScalarSymbol1 a = make_observable(c.observable);
            const FlowMode mode = parse_mode(c.mode);
            const ErrorCurve curve =
                run_sweep(c, mi, [&](const SymbolModel& qm, const GridPack& pack, double) {
                    return egorov_error(qm, a.value, c.t, mode, pack);
                });
            write_sweep_csv(csv, curve);
            manifest["results"] = curve_json(curve);
        } else if (c.experiment == "equilibrium") {
            csv = CsvWriter(kSweepHeader);
            const ScalarSymbol1 a = make_observable(c.observable);
            const auto f = make_energy_window(c.f);
            const bool corrections = c.mode != "uncorrected";
            const ErrorCurve curve =
                run_sweep(c, mi, [&](const SymbolModel& qm, const GridPack& pack, double) {
                    return equilibrium_error(qm, f, a.value, pack, corrections);
                });
            write_sweep_csv(csv, curve);
            manifest["results"] = curve_json(curve);
        } else if (c.experiment == "wigner") {
            csv = CsvWriter(kSweepHeader);
            const ScalarSymbol1 a = make_observable(c.observable);
            const ErrorCurve curve =
                run_sweep(c, mi, [&](const SymbolModel& qm, const GridPack& pack, double) {
                    const WaveFunction psi0 = make_state(c.state, qm, pack.grid);
                    FlowConfig fc;
                    fc.mode = parse_mode(c.mode);
                    return wigner_transport_error(qm, psi0, a.value, c.t, pack, fc);
                });
            write_sweep_csv(csv, curve);
            manifest["results"] = curve_json(curve);
        } else if (c.experiment == "projector") {
            csv = CsvWriter(kSweepHeader);
            const ErrorCurve curve =
                run_sweep(c, mi, [&](const SymbolModel&, const GridPack& pack, double) {
                    return projector_invariance(c.t, pack);
                });
            write_sweep_csv(csv, curve);
            manifest["results"] = curve_json(curve);
        } else if (c.experiment == "residual") {
            csv = CsvWriter(kSweepHeader);
            const bool include_M = c.mode != "uncorrected";
            const ErrorCurve curve =
                run_sweep(c, mi, [&](const SymbolModel& qm, const GridPack& pack, double) {
                    return effective_hamiltonian_residual(qm, pack, include_M);
                });
            write_sweep_csv(csv, curve);
            manifest["results"] = curve_json(curve);
        } else if (c.experiment == "moyal") {
            csv = CsvWriter(kSweepHeader);
            const ScalarSymbol1 a = make_observable(c.observable);
            const ScalarSymbol1 b = make_observable(c.observable_b);
            ErrorCurve curve;
            curve.experiment = c.experiment;
            curve.model = mi.name;
            curve.mode = c.mode;
            curve.t = 0;
            curve.N = c.N;
            for (double eps : c.sweep) {
                const Grid g = make_grid(c, mi, eps);
                curve.epsilons.push_back(eps);
                curve.errors.push_back(moyal_commutator_error(a, b, g));
            }
            write_sweep_csv(csv, curve);
            manifest["results"] = curve_json(curve);
        } else if (c.experiment == "pump") {
            csv = CsvWriter({"time", "current"});
            const double T = c.T > 0 ? c.T : mi.pump_period;
            for (int i = 0; i < c.nodes; ++i) {
                const double t = T * i / c.nodes;
                csv.row({fmt(t), fmt(pump_current(mi.symbol, t, c.nodes)[0])});
            }
            const RealVec Q = pumped_charge(mi.symbol, T, c.nodes);
            manifest["results"]["pumped_charge"] = Q[0];
        } else if (c.experiment == "chern") {
            csv = CsvWriter({"chern"});
            const double T = c.T > 0 ? c.T : mi.pump_period;
            const int ch = chern_number(mi.symbol, T, c.nodes_t, c.nodes_k);
            csv.row({std::to_string(ch)});
            manifest["results"]["chern"] = ch;
        } else if (c.experiment == "piezo") {
            csv = CsvWriter({"term1_1", "term1_2", "term1_3", "div_max"});
            const RealMat B = skew_from_dual(c.b_field);
            const PiezoResult pr = piezo_cancellation(mi.symbol, B, c.t, c.nodes);
            csv.row({fmt(pr.term1[0]), fmt(pr.term1[1]), fmt(pr.term1[2]), fmt(pr.div_max)});
            manifest["results"]["term1_norm"] = pr.term1.norm();
            manifest["results"]["div_max"] = pr.div_max;
        }
        return finish(csv, 0);
    } catch (const ConfigError& e) {
        manifest["guard_failure"] = {{"kind", "validation"}, {"message", e.what()}};
        std::fprintf(stderr, "config error: %s\n", e.what());
        return finish(csv, 2);
    } catch (const std::invalid_argument& e) {
        manifest["guard_failure"] = {{"kind", "validation"}, {"message", e.what()}};
        std::fprintf(stderr, "config error: %s\n", e.what());
        return finish(csv, 2);
    } catch (const NumericalGuardError& e) {
        manifest["guard_failure"] = {{"kind", "numerical_guard"}, {"message", e.what()}};
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return finish(csv, 3);
    }
}

std::vector<std::string> experiment_names() { return kExperiments; }

std::string describe_experiment(const std::string& name) {
    static const std::map<std::string, std::string> texts = {
        {"band-info",
         "Band data at phase-space points: e0, gap, subprincipal correction M,\n"
         "effective Hamiltonian h = e0 + eps*tr(H1 pi0) + eps*M, Berry curvature\n"
         "Omega_ab = -i tr(pi0 [d_a pi0, d_b pi0]) and the Liouville density\n"
         "rho_eps = 1 + i eps tr(pi0 {pi0, pi0})."},
        {"flow",
         "Integrates the eps-corrected classical equations of motion\n"
         "(Omega-corrected symplectic form, effective Hamiltonian h) and records\n"
         "the trajectory with h and the transported Liouville density."},
        {"egorov",
         "Transport order measurement: || pihat (U^-t Op(a) U^t - Op(a o phi^t)) pihat ||\n"
         "over a decreasing epsilon sweep. With the corrected flow phi^t the error\n"
         "is O(eps^2); with the uncorrected flow it degrades to O(eps)."},
        {"equilibrium",
         "Equilibrium expectation order: 2 pi eps Tr(pihat f(H) Op(a)) versus the\n"
         "phase-space integral of f(h) a rho_eps. All-corrections-on scales at\n"
         "O(eps^2); dropping M, the eps-term of h and the measure density costs an order."},
        {"wigner",
         "Wigner transport order: <psi(t), Op(a) psi(t)> versus the integral of\n"
         "(w_psi o phi^-t) a against the corrected Liouville measure; O(eps^2)\n"
         "for states in the almost-invariant band subspace."},
        {"projector",
         "Almost-invariance of the super-adiabatic subspace:\n"
         "|| [pihat, exp(-i H t / eps)] || over an epsilon sweep; order >= 2 for\n"
         "the first-order projector pi0 + eps*pi1."},
        {"residual",
         "Effective-Hamiltonian residual: || pihat (Op(h) - H) pihat || with\n"
         "h = e0 + eps e1 + eps M; O(eps^2) with M, O(eps) without."},
        {"moyal",
         "Scalar Moyal commutator remainder: || [Op(a), Op(b)] + i eps Op({a, b}) ||,\n"
         "claimed O(eps^3) for smooth localized symbols."},
        {"pump",
         "Adiabatic pump current j(t) = integral of Omega_pt over the kappa-torus\n"
         "with measure dk/(2 pi)^m; integrated over a period the charge is the\n"
         "(integer) Chern number of the band."},
        {"chern",
         "Chern number of the pump band over the (t, kappa) torus by the plaquette\n"
         "Berry-flux algorithm on projector Wilson loops."},
        {"piezo",
         "Cancellation identity behind the piezo current: the torus integral of\n"
         "Omega_vec . grad e0 vanishes because div Omega_vec = 0; reports both the\n"
         "B-contracted integral and the pointwise divergence max-norm."},
    };
    auto it = texts.find(name);
    if (it == texts.end()) throw ConfigError("unknown experiment '" + name + "'");
    return it->second;
}

} // namespace adiabatica
