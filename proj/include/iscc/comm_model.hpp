#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"

namespace iscc::comm {

struct DeviceTask {
    double v_bits;        // task size
    double c_intensity;   // CPU cycles per bit
    double t_max;         // delay budget, s
};

struct Link {
    double bandwidth_hz = 4e6;
    double tx_power_dbm = 24.0;
    double noise_dbm_per_hz = -174.0;
    double pathloss_db = 0.0;
    double fading_gain = 1.0;  // small-scale power gain
};

struct Device {
    DeviceTask task;
    Link link;
    double rate_bps = 0.0;  // derived from the link at generation/load time
};

struct Scenario {
    std::vector<Device> devices;
    double f_edge_hz = 4e10;
    std::uint64_t seed = 0;
};

struct ScenarioParams {
    double bandwidth_hz = 4e6;
    double tx_power_dbm = 24.0;
    double noise_dbm_per_hz = -174.0;
    double f_edge_hz = 4e10;
    double t_max_s = 0.4;
    double v_bits_lo = 3e5;
    double v_bits_hi = 1e6;
    double c_lo = 400.0;
    double c_hi = 1000.0;
};

// Urban-macro distance law used by the scenario generator, d in km.
double pathloss_db_at(double d_km);

// Shannon rate from the link budget.
double data_rate(const Link& l);

// Transmission plus computation delay for one offloaded task; empty when an
// allocation is zero (the delay would be unbounded, not a number).
std::optional<double> task_delay(const DeviceTask& t, double tau_c, double f_n, double rate_bps);

// Devices dropped uniformly in a disc (1 m minimum distance), exponential
// unit-mean fading power, uniform task draws. Deterministic under seed, and
// the first k devices do not depend on n_devices.
Scenario generate_scenario(int n_devices, double radius_km, const ScenarioParams& params,
                           std::uint64_t seed);

void validate(const Scenario& s);

void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

}  // namespace iscc::comm
