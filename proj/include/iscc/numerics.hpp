#pragma once

#include <functional>
#include <stdexcept>

namespace iscc::numerics {

struct Tolerance {
    double abs_tol = 1e-9;  // same units as the search variable
    int max_iter = 200;
};

// Thrown by bisect_monotone when [lo, hi] does not bracket the target.
struct BracketError : std::domain_error {
    using std::domain_error::domain_error;
};

struct SearchResult {
    double x;
    double fx;
    bool converged;  // false when max_iter ran out before the interval shrank
};

// Standard Gaussian upper-tail probability. Relative error below 1e-12 for
// |x| <= 8; saturates to {0, 1} beyond |x| = 38.
double q(double x);

// Maximizes a unimodal f on [lo, hi]; the final interval width is at most
// tol.abs_tol unless max_iter is exhausted first.
SearchResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                Tolerance tol);

// Solves f(x) = target for monotone f; (f(lo)-target) and (f(hi)-target) must
// differ in sign (or one be zero). Returns the midpoint of the final bracket.
double bisect_monotone(const std::function<double(double)>& f, double target, double lo, double hi,
                       Tolerance tol);

}  // namespace iscc::numerics
