// cli.hpp — scenario configuration, CSV/JSON emission and the subcommand
// runners behind the qtraj command-line tool.  Everything is expressed in
// units of kappa = 1, matching the dimensionless axes (kappa t, 2g/kappa)
// used throughout.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtraj/analytic.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

// A malformed or inconsistent configuration value.  what() names the field.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error("config error: field '" + field + "': " + message),
          field_(field) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

// A numerical validation failure (oracle deviation above threshold,
// integration cap reached, ...).
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunMode { Continuous, Truncated };

// Interaction cutoff: an absolute kappa*tau value or a symbolic multiple of
// the Rabi period, resolved through |Omega| at run time.
enum class TauKind { Absolute, HalfRabi, FullRabi };

struct TauSpec {
    TauKind kind = TauKind::Absolute;
    double value = 0.0;  // kappa*tau, used when kind == Absolute
};

struct DetectorSpec {
    double eta = 1.0;      // quantum efficiency in [0, 1]
    double window = 0.05;  // resolution time kappa*T, also the click bin width
};

// Spatial window for retarded-time profiles: emit epsilon(z, t) for
// kappa z / c in [z_min, z_max] at fixed observation time kappa t.
struct ZWindow {
    double z_min = 0.0;
    double z_max = 0.0;
    double t = 0.0;
};

struct ScenarioConfig {
    double two_g_over_kappa = 10.0;
    double delta_over_kappa = 0.1;
    double kappa1_over_kappa = 0.9;
    double gamma_over_kappa = 0.5;
    RunMode mode = RunMode::Continuous;
    TauSpec tau;
    double horizon = 7.0;          // kappa t
    std::size_t grid_points = 2000;
    std::size_t n = 10000;         // ensemble size
    std::uint64_t seed = 1;
    unsigned threads = 1;
    DetectorSpec detector;
    std::optional<ZWindow> z_window;
    bool compare_gamma0 = false;   // pulse: add a gamma = 0 reference series
    double sweep_tau_max = 2.5;    // sweep-tau: grid over [0, sweep_tau_max]
    std::size_t sweep_tau_points = 251;
    double oracle_step = 0.0;      // 0 = default RK4 step

    void validate() const;                 // throws ConfigError
    SystemParams params() const;           // kappa = 1 units
    SystemParams params_gamma0() const;    // same with gamma = 0
    double resolve_tau() const;            // absolute kappa*tau
    // Uniform grid over [0, horizon]; at least grid_points points and at
    // least 40 per Rabi period 2 pi / |Omega|.
    std::vector<double> time_grid() const;
};

// key = value file, '#' comments, unknown keys rejected by field name.
ScenarioConfig load_config(const std::filesystem::path& file);
// Parse a single key/value pair (CLI overrides reuse the same code path).
void apply_config_entry(ScenarioConfig& cfg, const std::string& key, const std::string& value);

// Subcommand runners.  Each writes its CSV series plus a summary.json into
// out_dir and returns 0 on success.  ConfigError maps to exit code 1 and
// ValidationError to exit code 2 in the CLI front end.
int run_analytic(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
int run_trajectories(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
int run_oracle(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
int run_pulse(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
int run_sweep_tau(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace qtraj
