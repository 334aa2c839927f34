#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adiabatica/experiments.hpp"

namespace adiabatica {

/// Config validation failure (maps to CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Named selector with a numeric parameter map: models, observables, energy
/// windows and initial states are all picked this way.
struct Selector {
    std::string name;
    std::map<std::string, double> params;
};

/// Fully resolved run description. Parsed from JSON with unknown keys
/// rejected; a written manifest embeds one of these under "config" and can be
/// fed back to run() unchanged.
struct RunConfig {
    std::string experiment;
    Selector model;

    std::vector<double> sweep; // "sweep" list or single "epsilon"
    int N = 0;
    double x_min = 0, x_max = 0; // grid experiments; 0/0 => model default
    std::string mode = "corrected_truncated";
    double t = 0;

    Selector observable, observable_b, f, state;

    std::vector<double> z0;      // flow starting point (q, p)
    std::vector<double> points;  // band-info sample points, flattened (q, p)

    int nodes = 0, nodes_t = 0, nodes_k = 0; // torus experiments
    double T = 0;                            // pump period; 0 => model default
    std::vector<double> b_field;             // dual vector of the skew field

    std::string output = ".";
    int threads = 0; // 0 => library/environment default
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const std::string& text);

/// Gaussian observables etc. by name; value plus analytic derivatives.
ScalarSymbol1 make_observable(const Selector& sel);

/// Smooth compactly supported energy windows by name.
std::function<double(double)> make_energy_window(const Selector& sel);

/// Executes the experiment and writes results.csv and manifest.json into
/// config.output. Returns 0 on success, 2 on validation failure, 3 when a
/// numerical guard (gap, cluster, plaquette, quadrature) trips; guard
/// failures still write a manifest recording the failure.
int run(const RunConfig& config);

std::string describe_experiment(const std::string& name);
std::vector<std::string> experiment_names();

} // namespace adiabatica
