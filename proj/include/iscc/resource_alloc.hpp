#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "iscc/comm_model.hpp"

namespace iscc::alloc {

// Fraction of the communication frame consumed by sensing samples.
struct CommBudget {
    double sensing_fraction = 0.0;  // tau_s * F_s, must stay below 1
};

struct DeviceAllocation {
    std::vector<double> tau_c;  // per-device communication time fractions
    std::vector<double> f_hz;   // per-device edge compute
    double mu_star = 0.0;       // multiplier coupling the two resources
    double total_f_hz = 0.0;
};

enum class InfeasibleReason { comm_budget, compute_budget, sensing_delay, task_load };

struct InfeasibleError : std::runtime_error {
    InfeasibleReason reason;
    double deficit;  // how far the violated constraint is from holding

    InfeasibleError(InfeasibleReason r, double d, const std::string& msg)
        : std::runtime_error(msg), reason(r), deficit(d) {}
};

// True iff the communication frame can carry every task within its deadline
// (strict margin).
bool comm_feasible(const comm::Scenario& s, const CommBudget& budget);

// Closed-form minimum-compute allocation. Every device finishes exactly at
// its deadline and the communication frame is used up exactly.
DeviceAllocation allocate(const comm::Scenario& s, const CommBudget& budget);

// Brute-force reference for small instances (N <= 3): nested scalar searches
// over the time fractions, with compute pinned by delay tightness. Test-only.
DeviceAllocation oracle_allocate(const comm::Scenario& s, const CommBudget& budget,
                                 double grid_tol);

// Largest sampling rate that could possibly leave the tasks feasible, in
// integer Hz (0 when sensing cannot fit at all).
std::int64_t fs_upper_bound(const comm::Scenario& s, double tau_s);

}  // namespace iscc::alloc
