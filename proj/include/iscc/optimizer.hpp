#pragma once

#include <optional>
#include <string>

#include "iscc/comm_model.hpp"
#include "iscc/resource_alloc.hpp"
#include "iscc/sensing_model.hpp"
#include "iscc/threshold_opt.hpp"

namespace iscc::opt {

// One solved operating point. Infeasible plans report the random-guess
// accuracy floor 1/I.
struct AllocationPlan {
    bool feasible = false;
    double f_s = 0.0;
    double eta = 0.0;
    double f_sense = 0.0;
    alloc::DeviceAllocation device_alloc;
    double accuracy = 0.0;
    double sensing_delay = 0.0;
    std::string scheme = "proposed";
};

struct SolveOptions {
    int fs_step = 1;
    int m_segments = 8;
    // When set, the threshold is pinned to this fraction of eta_upper instead
    // of being optimized (0 reproduces the gate-less baseline).
    std::optional<double> eta_ratio;
};

AllocationPlan infeasible_plan(const sensing::ClassSet& cs, const std::string& scheme);

// Solves the fixed-rate subproblem: closed-form device allocation, leftover
// compute to sensing, then the threshold policy.
AllocationPlan evaluate_fixed_fs(const comm::Scenario& s, const sensing::SensingParams& sp,
                                 const sensing::ClassSet& cs, const sensing::AlphaModel& am,
                                 int f_s, const SolveOptions& opts = {});

// Scans every sampling rate up to the feasibility bound and keeps the most
// accurate plan; ties go to the smaller rate. Candidates are evaluated in
// parallel with an order-independent reduction.
AllocationPlan solve_exhaustive(const comm::Scenario& s, const sensing::SensingParams& sp,
                                const sensing::ClassSet& cs, const sensing::AlphaModel& am,
                                const SolveOptions& opts = {});

// Binary search for the largest feasible sampling rate, solved there with a
// single-segment threshold search.
AllocationPlan solve_low_complexity(const comm::Scenario& s, const sensing::SensingParams& sp,
                                    const sensing::ClassSet& cs, const sensing::AlphaModel& am,
                                    const SolveOptions& opts = {});

struct Scheme {
    enum class Kind {
        proposed,
        low_complexity,
        conventional,
        avg_compute,
        avg_comm,
        fixed_threshold
    };
    Kind kind = Kind::proposed;
    double ratio = 0.0;  // fixed_threshold only

    static Scheme parse(const std::string& text);
    std::string label() const;
};

AllocationPlan run_benchmark(const Scheme& scheme, const comm::Scenario& s,
                             const sensing::SensingParams& sp, const sensing::ClassSet& cs,
                             const sensing::AlphaModel& am, const SolveOptions& opts = {});

void to_json(nlohmann::json& j, const AllocationPlan& p);
void from_json(const nlohmann::json& j, AllocationPlan& p);

}  // namespace iscc::opt
