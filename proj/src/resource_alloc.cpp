#include "iscc/resource_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iscc/numerics.hpp"

namespace iscc::alloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_budget(const CommBudget& b) {
    if (!(b.sensing_fraction >= 0.0) || b.sensing_fraction >= 1.0)
        throw std::domain_error("CommBudget: sensing fraction must lie in [0, 1)");
}

double comm_margin(const comm::Scenario& s, const CommBudget& b) {
    double need = 0.0;
    for (const auto& d : s.devices) need += d.task.v_bits / (d.task.t_max * d.rate_bps);
    return 1.0 - b.sensing_fraction - need;
}

// Minimum compute keeping device d on deadline when it holds fraction tau of
// the frame; unbounded as tau approaches the transmission-only floor.
double tight_compute(const comm::Device& d, double tau) {
    const double slack = d.task.t_max - d.task.v_bits / (tau * d.rate_bps);
    if (!(slack > 0.0)) return kInf;
    return d.task.v_bits * d.task.c_intensity / slack;
}

}  // namespace

bool comm_feasible(const comm::Scenario& s, const CommBudget& budget) {
    comm::validate(s);
    check_budget(budget);
    return comm_margin(s, budget) > 0.0;
}

DeviceAllocation allocate(const comm::Scenario& s, const CommBudget& budget) {
    comm::validate(s);
    check_budget(budget);
    const double margin = comm_margin(s, budget);
    if (!(margin > 0.0))
        throw InfeasibleError(InfeasibleReason::comm_budget, -margin,
                              "allocate: communication frame cannot carry the tasks");

    double num = 0.0;
    for (const auto& d : s.devices)
        num += d.task.v_bits / d.task.t_max * std::sqrt(d.task.c_intensity / d.rate_bps);
    const double sqrt_mu = num / margin;

    DeviceAllocation out;
    out.mu_star = sqrt_mu * sqrt_mu;
    out.tau_c.reserve(s.devices.size());
    out.f_hz.reserve(s.devices.size());
    for (const auto& d : s.devices) {
        const double vt = d.task.v_bits / d.task.t_max;
        const double sq = std::sqrt(d.task.c_intensity / d.rate_bps);
        const double tau = vt * (1.0 / d.rate_bps + sq / sqrt_mu);
        const double f = vt * (d.task.c_intensity + sqrt_mu * sq);
        out.tau_c.push_back(tau);
        out.f_hz.push_back(f);
        out.total_f_hz += f;
    }
    return out;
}

DeviceAllocation oracle_allocate(const comm::Scenario& s, const CommBudget& budget,
                                 double grid_tol) {
    comm::validate(s);
    check_budget(budget);
    const std::size_t n = s.devices.size();
    if (n > 3) throw std::domain_error("oracle_allocate: only instances up to 3 devices");
    const double margin = comm_margin(s, budget);
    if (!(margin > 0.0))
        throw InfeasibleError(InfeasibleReason::comm_budget, -margin,
                              "oracle_allocate: communication frame cannot carry the tasks");

    const double share = 1.0 - budget.sensing_fraction;
    std::vector<double> floor_tau(n);
    for (std::size_t i = 0; i < n; ++i)
        floor_tau[i] = s.devices[i].task.v_bits / (s.devices[i].task.t_max * s.devices[i].rate_bps);

    const numerics::Tolerance tol{grid_tol * share, 400};
    std::vector<double> tau(n);
    if (n == 1) {
        tau[0] = share;
    } else if (n == 2) {
        const auto total = [&](double t0) {
            return tight_compute(s.devices[0], t0) + tight_compute(s.devices[1], share - t0);
        };
        const auto r = numerics::golden_section_max([&](double t0) { return -total(t0); },
                                                    floor_tau[0], share - floor_tau[1], tol);
        tau[0] = r.x;
        tau[1] = share - r.x;
    } else {
        const auto inner = [&](double t0, double* best_t1) {
            const double rem = share - t0;
            const auto tail = [&](double t1) {
                return tight_compute(s.devices[1], t1) + tight_compute(s.devices[2], rem - t1);
            };
            const auto r = numerics::golden_section_max([&](double t1) { return -tail(t1); },
                                                        floor_tau[1], rem - floor_tau[2], tol);
            if (best_t1) *best_t1 = r.x;
            return tight_compute(s.devices[0], t0) + tail(r.x);
        };
        const auto r = numerics::golden_section_max([&](double t0) { return -inner(t0, nullptr); },
                                                    floor_tau[0],
                                                    share - floor_tau[1] - floor_tau[2], tol);
        tau[0] = r.x;
        inner(r.x, &tau[1]);
        tau[2] = share - tau[0] - tau[1];
    }

    DeviceAllocation out;
    out.tau_c = tau;
    out.f_hz.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.f_hz[i] = tight_compute(s.devices[i], tau[i]);
        out.total_f_hz += out.f_hz[i];
    }
    const double ratio = out.f_hz[0] / tau[0];
    out.mu_star = ratio * ratio / (s.devices[0].rate_bps * s.devices[0].task.c_intensity);
    return out;
}

std::int64_t fs_upper_bound(const comm::Scenario& s, double tau_s) {
    comm::validate(s);
    if (!(tau_s > 0.0)) throw std::domain_error("fs_upper_bound: tau_s must be > 0");

    double min_v = kInf, min_c = kInf, max_t = 0.0, max_r = 0.0;
    for (const auto& d : s.devices) {
        min_v = std::min(min_v, d.task.v_bits);
        min_c = std::min(min_c, d.task.c_intensity);
        max_t = std::max(max_t, d.task.t_max);
        max_r = std::max(max_r, d.rate_bps);
    }
    const double n = static_cast<double>(s.devices.size());
    const double fe = s.f_edge_hz;
    const double denom = max_t * fe - n * min_v * min_c;
    if (!(denom > 0.0))
        throw InfeasibleError(InfeasibleReason::task_load, -denom,
                              "fs_upper_bound: edge compute cannot serve the tasks at all");
    const double comm_floor = n * min_v * fe / (max_r * denom);
    const double bound = (1.0 - comm_floor) / tau_s;
    if (!(bound > 0.0)) return 0;
    return static_cast<std::int64_t>(std::floor(bound));
}

}  // namespace iscc::alloc
