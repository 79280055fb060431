#pragma once

#include <optional>

#include "iscc/sensing_model.hpp"

namespace iscc::thresh {

struct ThresholdSolution {
    double eta_star = 0.0;
    double eta_T = 0.0;        // smallest threshold meeting the delay budget
    double eta_A = 0.0;        // unconstrained accuracy maximizer
    double accuracy = 0.0;
    double delay = 0.0;
    bool limited_by_delay = false;
};

// Smallest threshold whose average sensing delay fits the budget: 0 when the
// budget already holds at 0, empty when even eta_upper cannot meet it.
std::optional<double> eta_delay_bound(const sensing::SensingProfile& p, double t_sense_max,
                                      double f_sense);
std::optional<double> eta_delay_bound(const sensing::ClassSet& cs, const sensing::SensingParams& sp,
                                      const sensing::AlphaModel& am, double f_s, double f_sense);

// Accuracy maximizer over [0, eta_upper]. Below the static power mean the
// false-positive term is replaced per segment by its chord so each piece is
// concave; candidates are re-scored on the exact accuracy, ties resolved
// toward the larger threshold.
double eta_accuracy_max(const sensing::SensingProfile& p, int m_segments);
double eta_accuracy_max(const sensing::ClassSet& cs, const sensing::SensingParams& sp,
                        const sensing::AlphaModel& am, double f_s, int m_segments);

// Joint policy: the accuracy maximizer when it meets the delay budget,
// otherwise the best threshold at or above the delay-tight one.
std::optional<ThresholdSolution> select_threshold(const sensing::SensingProfile& p,
                                                  double t_sense_max, double f_sense,
                                                  int m_segments);
std::optional<ThresholdSolution> select_threshold(const sensing::ClassSet& cs,
                                                  const sensing::SensingParams& sp,
                                                  const sensing::AlphaModel& am, double f_s,
                                                  double f_sense, int m_segments);

}  // namespace iscc::thresh
