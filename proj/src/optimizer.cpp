#include "iscc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "iscc/parallel.hpp"

namespace iscc::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double tight_compute(const comm::Device& d, double tau) {
    const double slack = d.task.t_max - d.task.v_bits / (tau * d.rate_bps);
    if (!(slack > 0.0)) return kInf;
    return d.task.v_bits * d.task.c_intensity / slack;
}

// Picks the best plan from candidates evaluated in ascending f_s order:
// strictly-better accuracy wins, so ties settle on the smaller rate.
AllocationPlan reduce_best(std::vector<AllocationPlan>&& plans, const sensing::ClassSet& cs,
                           const std::string& scheme) {
    AllocationPlan best = infeasible_plan(cs, scheme);
    for (auto& p : plans) {
        if (!p.feasible) continue;
        if (!best.feasible || p.accuracy > best.accuracy) best = std::move(p);
    }
    return best;
}

// Fixed-rate solve with the sensing compute already decided (used by the
// equal-split benchmarks where the device shares are not Lagrangian).
AllocationPlan evaluate_with_fixed_compute(const sensing::SensingParams& sp,
                                           const sensing::ClassSet& cs,
                                           const sensing::AlphaModel& am, int f_s, double f_sense,
                                           const alloc::DeviceAllocation& da,
                                           const SolveOptions& opts, const std::string& scheme) {
    AllocationPlan plan = infeasible_plan(cs, scheme);
    plan.f_s = f_s;
    const auto profile = sensing::make_profile(cs, sp, am, f_s);
    const auto sol = thresh::select_threshold(profile, sp.t_sense_max, f_sense, opts.m_segments);
    if (!sol) return plan;
    plan.feasible = true;
    plan.eta = sol->eta_star;
    plan.f_sense = f_sense;
    plan.device_alloc = da;
    plan.accuracy = sol->accuracy;
    plan.sensing_delay = sol->delay;
    return plan;
}

}  // namespace

AllocationPlan infeasible_plan(const sensing::ClassSet& cs, const std::string& scheme) {
    AllocationPlan p;
    p.feasible = false;
    p.accuracy = 1.0 / static_cast<double>(cs.classes.size());
    p.scheme = scheme;
    return p;
}

AllocationPlan evaluate_fixed_fs(const comm::Scenario& s, const sensing::SensingParams& sp,
                                 const sensing::ClassSet& cs, const sensing::AlphaModel& am,
                                 int f_s, const SolveOptions& opts) {
    if (f_s < 1) throw std::domain_error("evaluate_fixed_fs: f_s must be a positive integer");
    AllocationPlan plan = infeasible_plan(cs, "proposed");
    plan.f_s = f_s;

    const alloc::CommBudget budget{sp.tau_s * f_s};
    if (budget.sensing_fraction >= 1.0 || !alloc::comm_feasible(s, budget)) return plan;
    const auto da = alloc::allocate(s, budget);
    const double f_sense = s.f_edge_hz - da.total_f_hz;
    if (!(f_sense > 0.0)) return plan;

    const auto profile = sensing::make_profile(cs, sp, am, f_s);
    if (opts.eta_ratio) {
        const double eta = *opts.eta_ratio * profile.eta_u;
        if (profile.delay(eta, f_sense) > sp.t_sense_max) return plan;
        plan.feasible = true;
        plan.eta = eta;
        plan.accuracy = profile.accuracy(eta);
        plan.sensing_delay = profile.delay(eta, f_sense);
    } else {
        const auto sol =
            thresh::select_threshold(profile, sp.t_sense_max, f_sense, opts.m_segments);
        if (!sol) return plan;
        plan.feasible = true;
        plan.eta = sol->eta_star;
        plan.accuracy = sol->accuracy;
        plan.sensing_delay = sol->delay;
    }
    plan.f_sense = f_sense;
    plan.device_alloc = da;
    return plan;
}

AllocationPlan solve_exhaustive(const comm::Scenario& s, const sensing::SensingParams& sp,
                                const sensing::ClassSet& cs, const sensing::AlphaModel& am,
                                const SolveOptions& opts) {
    if (opts.fs_step < 1) throw std::domain_error("solve_exhaustive: step must be >= 1");
    std::int64_t fu = 0;
    try {
        fu = alloc::fs_upper_bound(s, sp.tau_s);
    } catch (const alloc::InfeasibleError&) {
        return infeasible_plan(cs, "proposed");
    }
    std::vector<int> candidates;
    for (std::int64_t f = opts.fs_step; f <= fu; f += opts.fs_step)
        candidates.push_back(static_cast<int>(f));
    if (candidates.empty()) return infeasible_plan(cs, "proposed");

    std::vector<AllocationPlan> plans(candidates.size());
    par::parallel_for(candidates.size(), [&](std::size_t i) {
        plans[i] = evaluate_fixed_fs(s, sp, cs, am, candidates[i], opts);
    });
    return reduce_best(std::move(plans), cs, "proposed");
}

AllocationPlan solve_low_complexity(const comm::Scenario& s, const sensing::SensingParams& sp,
                                    const sensing::ClassSet& cs, const sensing::AlphaModel& am,
                                    const SolveOptions& opts) {
    SolveOptions lc = opts;
    lc.m_segments = 1;
    std::int64_t fu = 0;
    try {
        fu = alloc::fs_upper_bound(s, sp.tau_s);
    } catch (const alloc::InfeasibleError&) {
        return infeasible_plan(cs, "low_complexity");
    }
    std::int64_t lo = 1, hi = fu;
    AllocationPlan best = infeasible_plan(cs, "low_complexity");
    while (lo <= hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        AllocationPlan plan = evaluate_fixed_fs(s, sp, cs, am, static_cast<int>(mid), lc);
        if (plan.feasible) {
            plan.scheme = "low_complexity";
            best = std::move(plan);
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return best;
}

Scheme Scheme::parse(const std::string& text) {
    Scheme s;
    if (text == "proposed") {
        s.kind = Kind::proposed;
    } else if (text == "low_complexity") {
        s.kind = Kind::low_complexity;
    } else if (text == "conventional") {
        s.kind = Kind::conventional;
    } else if (text.rfind("fixed_threshold", 0) == 0) {
        s.kind = Kind::fixed_threshold;
        const auto colon = text.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("scheme: fixed_threshold needs a ratio, e.g. "
                                        "fixed_threshold:0.4");
        s.ratio = std::stod(text.substr(colon + 1));
        if (!(s.ratio >= 0.0 && s.ratio <= 1.0))
            throw std::invalid_argument("scheme: fixed_threshold ratio must be in [0, 1]");
    } else if (text == "avg_compute") {
        s.kind = Kind::avg_compute;
    } else if (text == "avg_comm") {
        s.kind = Kind::avg_comm;
    } else {
        throw std::invalid_argument("unknown scheme: " + text);
    }
    return s;
}

std::string Scheme::label() const {
    switch (kind) {
        case Kind::proposed: return "proposed";
        case Kind::low_complexity: return "low_complexity";
        case Kind::conventional: return "conventional";
        case Kind::avg_compute: return "avg_compute";
        case Kind::avg_comm: return "avg_comm";
        case Kind::fixed_threshold: {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "fixed_threshold:%g", ratio);
            return buf;
        }
    }
    return "unknown";
}

AllocationPlan run_benchmark(const Scheme& scheme, const comm::Scenario& s,
                             const sensing::SensingParams& sp, const sensing::ClassSet& cs,
                             const sensing::AlphaModel& am, const SolveOptions& opts) {
    const std::string label = scheme.label();
    switch (scheme.kind) {
        case Scheme::Kind::proposed: {
            auto p = solve_exhaustive(s, sp, cs, am, opts);
            p.scheme = label;
            return p;
        }
        case Scheme::Kind::low_complexity: {
            auto p = solve_low_complexity(s, sp, cs, am, opts);
            p.scheme = label;
            return p;
        }
        case Scheme::Kind::conventional:
        case Scheme::Kind::fixed_threshold: {
            SolveOptions forced = opts;
            forced.eta_ratio = scheme.kind == Scheme::Kind::conventional ? 0.0 : scheme.ratio;
            auto p = solve_exhaustive(s, sp, cs, am, forced);
            p.scheme = label;
            return p;
        }
        case Scheme::Kind::avg_compute: {
            const auto n = s.devices.size();
            const double f_each = s.f_edge_hz / static_cast<double>(n + 1);
            alloc::DeviceAllocation da;
            double sum_tau = 0.0;
            for (const auto& d : s.devices) {
                const double slack = d.task.t_max - d.task.v_bits * d.task.c_intensity / f_each;
                if (!(slack > 0.0)) return infeasible_plan(cs, label);
                const double tau = d.task.v_bits / (d.rate_bps * slack);
                da.tau_c.push_back(tau);
                da.f_hz.push_back(f_each);
                da.total_f_hz += f_each;
                sum_tau += tau;
            }
            const double left = 1.0 - sum_tau;
            const auto fmax = static_cast<std::int64_t>(std::floor(left / sp.tau_s));
            if (fmax < 1) return infeasible_plan(cs, label);
            std::vector<int> candidates;
            for (std::int64_t f = opts.fs_step; f <= fmax; f += opts.fs_step)
                candidates.push_back(static_cast<int>(f));
            if (candidates.empty()) return infeasible_plan(cs, label);
            std::vector<AllocationPlan> plans(candidates.size());
            par::parallel_for(candidates.size(), [&](std::size_t i) {
                plans[i] = evaluate_with_fixed_compute(sp, cs, am, candidates[i], f_each, da,
                                                       opts, label);
            });
            auto best = reduce_best(std::move(plans), cs, label);
            best.scheme = label;
            return best;
        }
        case Scheme::Kind::avg_comm: {
            const auto n = s.devices.size();
            const double tau = 1.0 / static_cast<double>(n + 1);
            const auto f_s =
                static_cast<std::int64_t>(std::floor(tau / sp.tau_s));
            if (f_s < 1) return infeasible_plan(cs, label);
            alloc::DeviceAllocation da;
            for (const auto& d : s.devices) {
                const double f = tight_compute(d, tau);
                if (!std::isfinite(f)) return infeasible_plan(cs, label);
                da.tau_c.push_back(tau);
                da.f_hz.push_back(f);
                da.total_f_hz += f;
            }
            const double f_sense = s.f_edge_hz - da.total_f_hz;
            if (!(f_sense > 0.0)) return infeasible_plan(cs, label);
            auto plan = evaluate_with_fixed_compute(sp, cs, am, static_cast<int>(f_s), f_sense,
                                                    da, opts, label);
            plan.scheme = label;
            return plan;
        }
    }
    return infeasible_plan(cs, label);
}

void to_json(nlohmann::json& j, const AllocationPlan& p) {
    j = nlohmann::json{{"scheme", p.scheme},
                       {"feasible", p.feasible},
                       {"f_s", p.f_s},
                       {"eta", p.eta},
                       {"f_sense", p.f_sense},
                       {"accuracy", p.accuracy},
                       {"sensing_delay", p.sensing_delay},
                       {"device_alloc",
                        {{"tau_c", p.device_alloc.tau_c},
                         {"f", p.device_alloc.f_hz},
                         {"mu_star", p.device_alloc.mu_star}}}};
}

void from_json(const nlohmann::json& j, AllocationPlan& p) {
    p.scheme = j.at("scheme").get<std::string>();
    p.feasible = j.at("feasible").get<bool>();
    p.f_s = j.at("f_s").get<double>();
    p.eta = j.at("eta").get<double>();
    p.f_sense = j.at("f_sense").get<double>();
    p.accuracy = j.at("accuracy").get<double>();
    p.sensing_delay = j.at("sensing_delay").get<double>();
    const auto& da = j.at("device_alloc");
    p.device_alloc.tau_c = da.at("tau_c").get<std::vector<double>>();
    p.device_alloc.f_hz = da.at("f").get<std::vector<double>>();
    p.device_alloc.mu_star = da.at("mu_star").get<double>();
    p.device_alloc.total_f_hz = 0.0;
    for (double f : p.device_alloc.f_hz) p.device_alloc.total_f_hz += f;
}

}  // namespace iscc::opt
