#include "iscc/threshold_opt.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "iscc/numerics.hpp"

namespace iscc::thresh {

namespace {

using sensing::SensingProfile;

constexpr double kEtaTolRel = 1e-6;   // threshold search resolution, relative to eta_upper
constexpr double kDelayTolRel = 1e-9;

// Best threshold for the exact accuracy on [lo, hi]. Runs the per-segment
// chord-linearized search below the static mean, a single concave search
// above it, re-scores every candidate on the true accuracy, and polishes
// around the winner.
double accuracy_argmax(const SensingProfile& p, double lo, double hi, int m_segments) {
    if (m_segments < 1) throw std::invalid_argument("accuracy search: m_segments must be >= 1");
    const double scale = std::max(p.eta_u, 1e-300);
    const double tol = kEtaTolRel * scale;
    if (hi - lo <= tol) return std::clamp(hi, lo, hi);

    const numerics::Tolerance gtol{tol, 400};
    std::vector<double> candidates{lo, hi};

    const double split = std::clamp(p.power[0].mu, lo, hi);
    double seg_w = 0.0;
    if (split - lo > tol) {
        seg_w = (split - lo) / m_segments;
        for (int m = 0; m < m_segments; ++m) {
            const double a = lo + m * seg_w;
            const double b = (m + 1 == m_segments) ? split : a + seg_w;
            candidates.push_back(b);
            const double fpa = p.false_positive(a);
            const double fpb = p.false_positive(b);
            const auto surrogate = [&](double eta) {
                const double t = (eta - a) / (b - a);
                return p.accuracy_with_fp(eta, fpa + (fpb - fpa) * t);
            };
            candidates.push_back(numerics::golden_section_max(surrogate, a, b, gtol).x);
            candidates.push_back(
                numerics::golden_section_max([&](double e) { return p.accuracy(e); }, a, b, gtol)
                    .x);
        }
    }
    if (hi - split > tol) {
        candidates.push_back(
            numerics::golden_section_max([&](double e) { return p.accuracy(e); }, split, hi, gtol)
                .x);
    }

    double best_eta = lo;
    double best_acc = -1.0;
    for (double eta : candidates) {
        eta = std::clamp(eta, lo, hi);
        const double acc = p.accuracy(eta);
        if (acc > best_acc || (acc == best_acc && eta > best_eta)) {
            best_acc = acc;
            best_eta = eta;
        }
    }

    const double w = std::max(seg_w, (hi - split) * 0.25);
    if (w > tol) {
        const double a = std::max(lo, best_eta - w);
        const double b = std::min(hi, best_eta + w);
        if (b - a > tol) {
            const auto polish =
                numerics::golden_section_max([&](double e) { return p.accuracy(e); }, a, b, gtol);
            if (polish.fx > best_acc || (polish.fx == best_acc && polish.x > best_eta)) {
                best_acc = polish.fx;
                best_eta = polish.x;
            }
        }
    }
    return best_eta;
}

}  // namespace

std::optional<double> eta_delay_bound(const SensingProfile& p, double t_sense_max,
                                      double f_sense) {
    if (!(f_sense > 0.0)) throw std::domain_error("eta_delay_bound: f_sense must be > 0");
    if (p.delay(0.0, f_sense) <= t_sense_max) return 0.0;
    const double eu = p.eta_u;
    if (p.delay(eu, f_sense) > t_sense_max) return std::nullopt;
    // Bisection on the decreasing delay, keeping the feasible end.
    double lo = 0.0, hi = eu;
    for (int it = 0; it < 200 && hi - lo > kDelayTolRel * eu; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (p.delay(mid, f_sense) <= t_sense_max)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double eta_accuracy_max(const SensingProfile& p, int m_segments) {
    return accuracy_argmax(p, 0.0, p.eta_u, m_segments);
}

std::optional<ThresholdSolution> select_threshold(const SensingProfile& p, double t_sense_max,
                                                  double f_sense, int m_segments) {
    const auto eta_t = eta_delay_bound(p, t_sense_max, f_sense);
    if (!eta_t) return std::nullopt;

    ThresholdSolution sol;
    sol.eta_T = *eta_t;
    sol.eta_A = eta_accuracy_max(p, m_segments);
    sol.limited_by_delay = sol.eta_T > sol.eta_A;
    sol.eta_star =
        sol.limited_by_delay ? accuracy_argmax(p, sol.eta_T, p.eta_u, m_segments) : sol.eta_A;
    sol.accuracy = p.accuracy(sol.eta_star);
    sol.delay = p.delay(sol.eta_star, f_sense);
    return sol;
}

std::optional<double> eta_delay_bound(const sensing::ClassSet& cs, const sensing::SensingParams& sp,
                                      const sensing::AlphaModel& am, double f_s, double f_sense) {
    return eta_delay_bound(sensing::make_profile(cs, sp, am, f_s), sp.t_sense_max, f_sense);
}

double eta_accuracy_max(const sensing::ClassSet& cs, const sensing::SensingParams& sp,
                        const sensing::AlphaModel& am, double f_s, int m_segments) {
    return eta_accuracy_max(sensing::make_profile(cs, sp, am, f_s), m_segments);
}

std::optional<ThresholdSolution> select_threshold(const sensing::ClassSet& cs,
                                                  const sensing::SensingParams& sp,
                                                  const sensing::AlphaModel& am, double f_s,
                                                  double f_sense, int m_segments) {
    return select_threshold(sensing::make_profile(cs, sp, am, f_s), sp.t_sense_max, f_sense,
                            m_segments);
}

}  // namespace iscc::thresh
