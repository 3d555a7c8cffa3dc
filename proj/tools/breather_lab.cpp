// breather-lab <experiment> --config <path> [--out <dir>] [--workers N]

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "breather/errors.hpp"
#include "breather/lab/config.hpp"
#include "breather/lab/experiments.hpp"
#include "breather/parallel.hpp"

namespace {

constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int workers_from_env() {
    const char* env = std::getenv("BREATHER_LAB_WORKERS");
    if (!env || !*env) return 0;
    try {
        std::size_t used = 0;
        const int n = std::stoi(env, &used);
        if (used != std::string(env).size() || n < 1) throw std::invalid_argument(env);
        return n;
    } catch (const std::exception&) {
        throw breather::lab::ConfigError("BREATHER_LAB_WORKERS must be a positive integer, got '" + std::string(env) + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    namespace lab = breather::lab;
    CLI::App app{"Breather verification laboratory"};
    app.set_version_flag("--version", lab::code_version());
    std::string experiment;
    std::string config_path;
    std::string out_dir = "out";
    int workers = 0;
    bool print_defaults = false;
    app.add_option("experiment", experiment, "residual | evolve | boost-check | quantize-scan | two-wall | torus | "
                                             "semiclassical | advect")
        ->required();
    auto* config_opt = app.add_option("--config", config_path, "configuration file");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--workers", workers, "cap on parallel workers (default: BREATHER_LAB_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--print-defaults", print_defaults, "print a complete default configuration and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version arrive here with code 0.
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        const auto kind = lab::parse_experiment(experiment);
        if (print_defaults) {
            std::cout << lab::default_config_text(kind);
            return 0;
        }
        if (config_opt->count() == 0) throw lab::ConfigError("--config is required");
        const auto cfg = lab::load_config(config_path);
        if (cfg.experiment != kind) {
            throw lab::ConfigError("config describes experiment '" + std::string(lab::to_string(cfg.experiment)) +
                                   "' but '" + experiment + "' was requested");
        }
        breather::set_workers(workers > 0 ? workers : workers_from_env());

        const auto result = lab::run_experiment(cfg, out_dir);
        for (const auto& a : result.assertions) {
            std::cout << (a.passed ? "ok   " : "FAIL ") << a.name << ": measured " << a.measured << ' '
                      << a.relation << ' ';
            if (a.relation == "within") std::cout << a.target << " +/- ";
            std::cout << a.threshold << '\n';
        }
        std::cout << "manifest: " << out_dir << "/manifest.json (" << result.wall_seconds << " s)\n";
        if (!result.passed()) {
            for (const auto& name : result.failures()) std::cerr << "assertion failed: " << name << '\n';
            return kExitAssertion;
        }
        return 0;
    } catch (const lab::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const breather::InvalidInput& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
