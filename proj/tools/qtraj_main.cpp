// qtraj — reproduce the dynamics and the emitted photon pulse shape of an
// initially excited two-level atom in a lossy cavity.  Subcommands emit CSV
// series plus a summary.json; see README.md for the configuration keys.

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtraj/cli.hpp"

namespace {

struct CommonOptions {
    std::optional<std::string> config_file;
    std::string out_dir;
    // Overrides are kept as raw strings and funneled through the same
    // key/value parser as the config file.
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_override_option(CLI::App* cmd, CommonOptions& opts, const std::string& flag,
                         const std::string& key, const std::string& help) {
    const auto setter = [&opts, key](const std::string& value) {
        opts.overrides.emplace_back(key, value);
    };
    cmd->add_option_function<std::string>(flag, setter, help);
}

void add_common_options(CLI::App* cmd, CommonOptions& opts, bool trajectories) {
    cmd->add_option("--config", opts.config_file, "key = value configuration file");
    cmd->add_option("--out-dir", opts.out_dir, "output directory")->required();
    add_override_option(cmd, opts, "--two-g-over-kappa", "two_g_over_kappa", "2g/kappa");
    add_override_option(cmd, opts, "--delta-over-kappa", "delta_over_kappa", "detuning/kappa");
    add_override_option(cmd, opts, "--kappa1-over-kappa", "kappa1_over_kappa",
                        "escape-rate share of kappa, in [0,1]");
    add_override_option(cmd, opts, "--gamma-over-kappa", "gamma_over_kappa",
                        "spontaneous emission rate/kappa");
    add_override_option(cmd, opts, "--mode", "mode", "continuous or truncated");
    add_override_option(cmd, opts, "--tau", "tau",
                        "kappa*tau, or half-rabi / full-rabi");
    add_override_option(cmd, opts, "--horizon", "horizon", "time horizon kappa*t");
    add_override_option(cmd, opts, "--grid-points", "grid_points", "time grid size");
    add_override_option(cmd, opts, "--threads", "threads", "worker threads");
    add_override_option(cmd, opts, "--eta", "eta", "detector efficiency");
    add_override_option(cmd, opts, "--detector-window", "detector_window",
                        "detector resolution kappa*T (click bin width)");
    add_override_option(cmd, opts, "--z-min", "z_min", "spatial window start, kappa z/c");
    add_override_option(cmd, opts, "--z-max", "z_max", "spatial window end, kappa z/c");
    add_override_option(cmd, opts, "--z-time", "z_time", "observation time for the z window");
    add_override_option(cmd, opts, "--compare-gamma0", "compare_gamma0",
                        "emit a gamma = 0 reference series (pulse)");
    add_override_option(cmd, opts, "--sweep-tau-max", "sweep_tau_max", "sweep upper kappa*tau");
    add_override_option(cmd, opts, "--sweep-tau-points", "sweep_tau_points", "sweep grid size");
    add_override_option(cmd, opts, "--oracle-step", "oracle_step", "RK4 step override");
    auto* seed = cmd->add_option_function<std::string>(
        "--seed", [&opts](const std::string& v) { opts.overrides.emplace_back("seed", v); },
        "master seed");
    auto* n = cmd->add_option_function<std::string>(
        "--n", [&opts](const std::string& v) { opts.overrides.emplace_back("n", v); },
        "ensemble size");
    if (trajectories) {
        seed->required();
        n->required();
    }
}

qtraj::ScenarioConfig build_config(const CommonOptions& opts) {
    qtraj::ScenarioConfig cfg;
    if (opts.config_file) cfg = qtraj::load_config(*opts.config_file);
    for (const auto& [key, value] : opts.overrides) {
        qtraj::apply_config_entry(cfg, key, value);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-level atom in a lossy cavity: dynamics and photon pulse shape"};
    app.require_subcommand(1);

    CommonOptions analytic_opts, traj_opts, oracle_opts, pulse_opts, sweep_opts;
    auto* analytic =
        app.add_subcommand("analytic", "closed-form populations and channel probabilities");
    add_common_options(analytic, analytic_opts, false);
    auto* trajectories =
        app.add_subcommand("trajectories", "Monte Carlo ensemble and click histograms");
    add_common_options(trajectories, traj_opts, true);
    auto* oracle =
        app.add_subcommand("oracle", "RK4 master-equation integration vs closed form");
    add_common_options(oracle, oracle_opts, false);
    auto* pulse = app.add_subcommand("pulse", "amplitude envelope of the extracted mode");
    add_common_options(pulse, pulse_opts, false);
    auto* sweep = app.add_subcommand("sweep-tau", "photon budget vs interaction time");
    add_common_options(sweep, sweep_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message; 0 for --help
        return code == 0 ? 0 : 1;      // anything malformed is a config error
    }

    const auto dispatch = [&]() -> int {
        if (analytic->parsed()) {
            return qtraj::run_analytic(build_config(analytic_opts), analytic_opts.out_dir);
        }
        if (trajectories->parsed()) {
            return qtraj::run_trajectories(build_config(traj_opts), traj_opts.out_dir);
        }
        if (oracle->parsed()) {
            return qtraj::run_oracle(build_config(oracle_opts), oracle_opts.out_dir);
        }
        if (pulse->parsed()) {
            return qtraj::run_pulse(build_config(pulse_opts), pulse_opts.out_dir);
        }
        return qtraj::run_sweep_tau(build_config(sweep_opts), sweep_opts.out_dir);
    };

    try {
        return dispatch();
    } catch (const qtraj::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qtraj::ValidationError& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
