#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

namespace iscc::sensing {

// Per-class band-power statistics. `lambda` is the in-band signal power,
// `r` the noise energy aggregated over the band bins (noise power times bin
// count), `sigma_d2` the instance-to-instance power variance, and `prior`
// the occurrence probability of the class.
struct ClassStats {
    double lambda = 0.0;
    double r = 0.0;
    double sigma_d2 = 0.0;
    double prior = 0.0;
};

// Index 0 is always the static class; the rest are action classes.
struct ClassSet {
    std::vector<ClassStats> classes;
};

struct SensingParams {
    double t_win = 3.0;          // CSI window length, s
    double f_lo = 10.0;          // high-frequency band lower edge, Hz
    double f_hi = 20.0;          // high-frequency band upper edge, Hz
    double sigma2 = 0.0125;      // estimation-noise variance entering the moment model
    int k_sub = 64;              // subcarrier count
    double c_s = 5.156e4;        // recognizer cost per input element, cycles
    double tau_s = 2.56e-4;      // slot + guard fraction consumed per sensing sample, s
    double t_sense_max = 0.5;    // sensing delay budget, s
};

// Recognizer accuracy vs sampling rate. Parametric saturating exponential by
// default; a monotone (f_s, accuracy) table takes over when provided.
struct AlphaModel {
    double a_max = 0.99;
    double kappa = 15.0;
    std::vector<std::pair<double, double>> table;
};

void validate(const ClassStats& c);
void validate(const ClassSet& cs);
void validate(const SensingParams& sp);
void validate(const AlphaModel& am);

struct PowerMoments {
    double mu;
    double sigma;
};

// Mean and standard deviation of the band power for one class at a sampling
// rate. Both shrink toward (lambda, sqrt(sigma_d2)) as f_s grows.
PowerMoments power_stats(const ClassStats& c, const SensingParams& sp, double f_s);

// Probability an action instance is gated as static. Increasing in eta.
double miss_rate(const ClassStats& action, const SensingParams& sp, double f_s, double eta);

// Probability a static instance passes through the gate. Decreasing in eta.
double false_positive_rate(const ClassStats& static_cls, const SensingParams& sp, double f_s,
                           double eta);

double cnn_accuracy(const AlphaModel& am, double f_s);

double overall_accuracy(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                        double f_s, double eta);

double cnn_pass_probability(const ClassSet& cs, const SensingParams& sp, double f_s, double eta);

double avg_sensing_delay(const ClassSet& cs, const SensingParams& sp, double f_s, double eta,
                         double f_sense);

// Smallest action-class power mean at f_s; the usable threshold range is
// [0, eta_upper].
double eta_upper(const ClassSet& cs, const SensingParams& sp, double f_s);

struct GainCondition {
    bool satisfied;
    double margin;  // positive iff the gate helps at eta -> 0+
    enum class Degenerate { none, static_prior_zero, cnn_saturated } degenerate =
        Degenerate::none;
};

// Whether gating beats running the recognizer on everything, at equal
// accuracy and delay targets.
GainCondition gain_condition(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                             double f_s);

struct GainBreakdown {
    double rho;                       // fraction of recognizer compute saved
    double branch_pass_cap;           // saving when the gate can run at eta_upper
    std::optional<double> branch_root;  // saving at the accuracy break-even threshold
    std::optional<double> eta_root;     // threshold where accuracy returns to the no-gate level
};

GainBreakdown performance_gain_detail(const ClassSet& cs, const SensingParams& sp,
                                      const AlphaModel& am, double f_s);
double performance_gain(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                        double f_s);

// Everything the threshold search needs at a fixed sampling rate, computed
// once.
struct SensingProfile {
    std::vector<PowerMoments> power;  // index 0 static
    std::vector<double> prior;
    double alpha = 0.0;
    double eta_u = 0.0;
    double cnn_cost = 0.0;  // cycles per instance reaching the recognizer

    std::size_t size() const { return power.size(); }
    double miss(std::size_t i, double eta) const;
    double false_positive(double eta) const;
    double accuracy(double eta) const;
    // Accuracy with the static false-positive term pinned to `fp`.
    double accuracy_with_fp(double eta, double fp) const;
    double pass_prob(double eta) const;
    double delay(double eta, double f_sense) const;
};

SensingProfile make_profile(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                            double f_s);

void to_json(nlohmann::json& j, const ClassStats& c);
void from_json(const nlohmann::json& j, ClassStats& c);
void to_json(nlohmann::json& j, const ClassSet& cs);
void from_json(const nlohmann::json& j, ClassSet& cs);
void to_json(nlohmann::json& j, const SensingParams& sp);
void from_json(const nlohmann::json& j, SensingParams& sp);
void to_json(nlohmann::json& j, const AlphaModel& am);
void from_json(const nlohmann::json& j, AlphaModel& am);

ClassSet load_class_set(const std::filesystem::path& path);
void save_class_set(const ClassSet& cs, const std::filesystem::path& path);

}  // namespace iscc::sensing
