#include "iscc/comm_model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "iscc/rng.hpp"

namespace iscc::comm {

namespace {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double pathloss_db_at(double d_km) {
    if (!(d_km > 0.0)) throw std::domain_error("pathloss_db_at: distance must be > 0");
    return 128.1 + 37.6 * std::log10(d_km);
}

double data_rate(const Link& l) {
    require(l.bandwidth_hz > 0.0, "Link: bandwidth must be > 0");
    require(l.fading_gain >= 0.0, "Link: fading gain must be >= 0");
    const double rx_w = dbm_to_watts(l.tx_power_dbm) * std::pow(10.0, -l.pathloss_db / 10.0) *
                        l.fading_gain;
    const double noise_w = dbm_to_watts(l.noise_dbm_per_hz) * l.bandwidth_hz;
    const double snr = rx_w / noise_w;
    return l.bandwidth_hz * std::log2(1.0 + snr);
}

std::optional<double> task_delay(const DeviceTask& t, double tau_c, double f_n, double rate_bps) {
    require(t.v_bits > 0.0 && t.c_intensity > 0.0 && t.t_max > 0.0,
            "DeviceTask: fields must be > 0");
    if (tau_c <= 0.0 || f_n <= 0.0 || rate_bps <= 0.0) return std::nullopt;
    return t.v_bits / (tau_c * rate_bps) + t.v_bits * t.c_intensity / f_n;
}

Scenario generate_scenario(int n_devices, double radius_km, const ScenarioParams& params,
                           std::uint64_t seed) {
    require(n_devices >= 1, "generate_scenario: n_devices must be >= 1");
    require(radius_km > 0.0, "generate_scenario: radius must be > 0");

    Scenario s;
    s.f_edge_hz = params.f_edge_hz;
    s.seed = seed;
    s.devices.reserve(static_cast<std::size_t>(n_devices));
    rng::Xoshiro256pp g(rng::derive_stream(seed, 0));
    for (int i = 0; i < n_devices; ++i) {
        Device d;
        const double u_r = g.uniform01();
        g.uniform01();  // bearing; the pathloss law only needs the distance
        const double d_km = std::max(1e-3, radius_km * std::sqrt(u_r));
        d.link.bandwidth_hz = params.bandwidth_hz;
        d.link.tx_power_dbm = params.tx_power_dbm;
        d.link.noise_dbm_per_hz = params.noise_dbm_per_hz;
        d.link.pathloss_db = pathloss_db_at(d_km);
        d.link.fading_gain = g.exponential();
        d.task.v_bits = g.uniform(params.v_bits_lo, params.v_bits_hi);
        d.task.c_intensity = g.uniform(params.c_lo, params.c_hi);
        d.task.t_max = params.t_max_s;
        d.rate_bps = data_rate(d.link);
        s.devices.push_back(d);
    }
    validate(s);
    return s;
}

void validate(const Scenario& s) {
    require(!s.devices.empty(), "Scenario: needs at least one device");
    require(s.f_edge_hz > 0.0, "Scenario: edge compute must be > 0");
    for (const auto& d : s.devices) {
        require(d.task.v_bits > 0.0 && d.task.c_intensity > 0.0 && d.task.t_max > 0.0,
                "Scenario: task fields must be > 0");
        require(d.rate_bps > 0.0, "Scenario: all rates must be > 0");
    }
}

void to_json(nlohmann::json& j, const Scenario& s) {
    nlohmann::json devices = nlohmann::json::array();
    for (const auto& d : s.devices) {
        devices.push_back({{"v_bits", d.task.v_bits},
                           {"c_intensity", d.task.c_intensity},
                           {"t_max", d.task.t_max},
                           {"link",
                            {{"bandwidth_hz", d.link.bandwidth_hz},
                             {"tx_power_dbm", d.link.tx_power_dbm},
                             {"noise_dbm_per_hz", d.link.noise_dbm_per_hz},
                             {"pathloss_db", d.link.pathloss_db},
                             {"fading_gain", d.link.fading_gain}}},
                           {"rate_bps", d.rate_bps}});
    }
    j = nlohmann::json{{"devices", devices}, {"f_edge_hz", s.f_edge_hz}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, Scenario& s) {
    s.devices.clear();
    s.f_edge_hz = j.at("f_edge_hz").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& dj : j.at("devices")) {
        Device d;
        d.task.v_bits = dj.at("v_bits").get<double>();
        d.task.c_intensity = dj.at("c_intensity").get<double>();
        d.task.t_max = dj.at("t_max").get<double>();
        const auto& lj = dj.at("link");
        d.link.bandwidth_hz = lj.at("bandwidth_hz").get<double>();
        d.link.tx_power_dbm = lj.at("tx_power_dbm").get<double>();
        d.link.noise_dbm_per_hz = lj.at("noise_dbm_per_hz").get<double>();
        d.link.pathloss_db = lj.at("pathloss_db").get<double>();
        d.link.fading_gain = lj.at("fading_gain").get<double>();
        d.rate_bps = dj.at("rate_bps").get<double>();
        s.devices.push_back(d);
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
    nlohmann::json j;
    in >> j;
    Scenario s = j.get<Scenario>();
    validate(s);
    return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    validate(s);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path.string());
    nlohmann::json j = s;
    out << j.dump(2) << '\n';
}

}  // namespace iscc::comm
