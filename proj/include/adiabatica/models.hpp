#pragma once

#include <map>
#include <string>
#include <vector>

#include "adiabatica/symbols.hpp"
#include "adiabatica/twolevel.hpp"

namespace adiabatica {

/// A registry entry: the symbol model plus resolved parameters and the
/// recommended quantum-grid domain.
struct ModelInfo {
    std::string name;
    std::map<std::string, double> params;
    SymbolModel symbol;
    double x_min = -8.0, x_max = 8.0; // default grid domain
    double pump_period = 1.0;         // periodic drives only
    std::string description;
};

/// Build a registered model; unknown names or parameter keys throw
/// std::invalid_argument.
ModelInfo make_model(const std::string& name,
                     const std::map<std::string, double>& params = {});

std::vector<std::string> model_names();
std::map<std::string, double> model_defaults(const std::string& name);
std::string model_description(const std::string& name);

Matrix pauli(int k); // 0 => identity

} // namespace adiabatica
