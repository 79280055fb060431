#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iscc/comm_model.hpp"
#include "iscc/optimizer.hpp"
#include "iscc/sensing_model.hpp"
#include "iscc/signal_sim.hpp"

namespace iscc::experiment {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SweepAxis { f_edge, n_devices, p_static, t_sense_max, threshold_ratio, f_s };

SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis axis);

struct SweepSettings {
    SweepAxis axis = SweepAxis::f_edge;
    std::vector<double> grid;
    std::filesystem::path output = "sweep.csv";
};

struct ValidateSettings {
    std::vector<int> fs_grid = {50, 100, 200, 400, 800};
    int eta_points = 5;
    int trials = 100000;
    double tone_hz = 15.0;
    std::filesystem::path output = "validate.csv";
};

struct ExperimentConfig {
    sensing::SensingParams sensing;
    sensing::ClassSet classes;
    // Optional model-side stats for the validate report; lets a deliberate
    // mismatch against the generator be detected.
    std::optional<std::vector<sensing::ClassStats>> stats_override;
    sensing::AlphaModel alpha;
    comm::ScenarioParams scenario;
    int n_devices = 15;
    double radius_km = 0.3;
    std::vector<std::uint64_t> seeds = {1};
    int fs_step = 1;
    int m_segments = 8;
    std::vector<opt::Scheme> schemes;
    std::optional<SweepSettings> sweep;
    ValidateSettings validate;
    std::optional<double> explain_f_s;
};

// Eight synthetic recognition classes (static first) consistent with the
// default SensingParams noise floor.
sensing::ClassSet default_class_set();
ExperimentConfig default_config();

ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Simulated detector rates and band-power moments against the analytic
// model over the configured grid; writes a per-cell CSV and returns the
// validation exit code.
int cmd_validate(const ExperimentConfig& cfg, std::ostream& log);

// One CSV row per (sweep point, seed, scheme); byte-identical across runs
// with the same config.
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);

// Fits per-class statistics from an exported power-sample CSV; priors come
// from the per-class sample counts.
int cmd_fit(const ExperimentConfig& cfg, const std::filesystem::path& input_csv,
            const std::filesystem::path& output_json, std::ostream& log);

// Solves one scenario with every configured scheme and writes the plans.
int cmd_solve(const ExperimentConfig& cfg, const std::filesystem::path& output_json,
              std::ostream& log);

// Prints the gate-benefit condition and both saving branches at one rate.
int cmd_explain(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace iscc::experiment
