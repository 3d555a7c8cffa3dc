#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "breather/errors.hpp"

namespace breather::lab {

/// Raised for malformed or inconsistent configuration documents. The message
/// names the offending key and line.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

enum class Experiment { residual, evolve, boost_check, quantize_scan, two_wall, torus, semiclassical, advect };

std::string_view to_string(Experiment e);
/// Throws ConfigError listing the known experiment names.
Experiment parse_experiment(std::string_view name);
const std::vector<Experiment>& all_experiments();

enum class ValueType { integer, real, boolean, string, integer_list, real_list };

using Value = std::variant<std::int64_t, double, bool, std::string, std::vector<std::int64_t>, std::vector<double>>;

struct ParamSpec {
    std::string key;
    ValueType type;
    /// Used when the key is absent; for required keys only an example value.
    bool required = false;
    Value fallback{};
    /// Allowed values for string keys; empty means any.
    std::vector<std::string> choices;
    std::string doc;
};

/// Parameter schema of one experiment, in documentation order.
const std::vector<ParamSpec>& schema(Experiment e);

struct ExperimentConfig {
    Experiment experiment = Experiment::residual;
    std::uint64_t seed = 1;
    std::map<std::string, Value> parameters;
    /// Keys filled from defaults, in schema order.
    std::vector<std::string> defaulted;

    std::int64_t integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool boolean(const std::string& key) const;
    const std::string& string(const std::string& key) const;
    const std::vector<std::int64_t>& integers(const std::string& key) const;
    const std::vector<double>& reals(const std::string& key) const;
};

/// Parses the sectioned key = value format:
///
///     # comment
///     [experiment]
///     name = residual
///     seed = 7
///
///     [parameters]
///     family = breather
///     levels = 17, 33, 65
///
/// Keys are checked against the experiment's schema: unknown, duplicate,
/// missing or mistyped keys raise ConfigError with line numbers.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Default configuration document for an experiment (every key spelled out).
std::string default_config_text(Experiment e);

std::string format_value(const Value& v);

}  // namespace breather::lab
