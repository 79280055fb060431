#include "iscc/sensing_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "iscc/numerics.hpp"

namespace iscc::sensing {

namespace {

// Q(num / sigma), with the sigma = 0 limit treated as a hard threshold.
double q_scaled(double num, double sigma) {
    if (sigma > 0.0) return numerics::q(num / sigma);
    if (num > 0.0) return 0.0;
    if (num < 0.0) return 1.0;
    return 0.5;
}

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void validate(const ClassStats& c) {
    require(c.lambda >= 0.0, "ClassStats: lambda must be >= 0");
    require(c.r >= 0.0, "ClassStats: r must be >= 0");
    require(c.sigma_d2 >= 0.0, "ClassStats: sigma_d2 must be >= 0");
    require(c.prior >= 0.0 && c.prior <= 1.0, "ClassStats: prior must be within [0, 1]");
}

void validate(const ClassSet& cs) {
    require(cs.classes.size() >= 2, "ClassSet: needs the static class plus at least one action");
    double sum = 0.0;
    for (const auto& c : cs.classes) {
        validate(c);
        sum += c.prior;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "ClassSet: priors must sum to 1");
}

void validate(const SensingParams& sp) {
    require(sp.t_win > 0.0, "SensingParams: t_win must be > 0");
    require(sp.f_lo > 0.0 && sp.f_lo < sp.f_hi, "SensingParams: requires 0 < f_lo < f_hi");
    require(sp.sigma2 >= 0.0, "SensingParams: sigma2 must be >= 0");
    require(sp.k_sub > 0, "SensingParams: k_sub must be > 0");
    require(sp.c_s > 0.0, "SensingParams: c_s must be > 0");
    require(sp.tau_s > 0.0, "SensingParams: tau_s must be > 0");
    require(sp.t_sense_max > 0.0, "SensingParams: t_sense_max must be > 0");
}

void validate(const AlphaModel& am) {
    require(am.a_max > 0.0 && am.a_max <= 1.0, "AlphaModel: a_max must be in (0, 1]");
    require(am.kappa > 0.0, "AlphaModel: kappa must be > 0");
    if (!am.table.empty()) {
        require(am.table.size() >= 2, "AlphaModel: table needs at least two points");
        require(am.table.front().first == 0.0 && am.table.front().second == 0.0,
                "AlphaModel: table must start at (0, 0)");
        for (std::size_t i = 0; i < am.table.size(); ++i) {
            require(am.table[i].second >= 0.0 && am.table[i].second <= 1.0,
                    "AlphaModel: table accuracy must be within [0, 1]");
            if (i > 0) {
                require(am.table[i].first > am.table[i - 1].first,
                        "AlphaModel: table sampling rates must increase");
                require(am.table[i].second >= am.table[i - 1].second,
                        "AlphaModel: table accuracy must be non-decreasing");
            }
        }
    }
}

PowerMoments power_stats(const ClassStats& c, const SensingParams& sp, double f_s) {
    if (!(f_s > 0.0)) throw std::domain_error("power_stats: f_s must be > 0");
    const double tf = sp.t_win * f_s;
    const double mu = c.lambda + c.r / tf;
    const double var =
        4.0 * sp.sigma2 * c.lambda / tf + 2.0 * sp.sigma2 * c.r / (tf * tf) + c.sigma_d2;
    return {mu, std::sqrt(var)};
}

double miss_rate(const ClassStats& action, const SensingParams& sp, double f_s, double eta) {
    const auto m = power_stats(action, sp, f_s);
    return q_scaled(m.mu - eta, m.sigma);
}

double false_positive_rate(const ClassStats& static_cls, const SensingParams& sp, double f_s,
                           double eta) {
    const auto m = power_stats(static_cls, sp, f_s);
    return q_scaled(eta - m.mu, m.sigma);
}

double cnn_accuracy(const AlphaModel& am, double f_s) {
    if (!(f_s >= 0.0)) throw std::domain_error("cnn_accuracy: f_s must be >= 0");
    if (!am.table.empty()) {
        if (f_s <= am.table.front().first) return am.table.front().second;
        if (f_s >= am.table.back().first) return am.table.back().second;
        for (std::size_t i = 1; i < am.table.size(); ++i) {
            if (f_s <= am.table[i].first) {
                const auto [f0, a0] = am.table[i - 1];
                const auto [f1, a1] = am.table[i];
                return a0 + (a1 - a0) * (f_s - f0) / (f1 - f0);
            }
        }
        return am.table.back().second;
    }
    return am.a_max * (1.0 - std::exp(-f_s / am.kappa));
}

double SensingProfile::miss(std::size_t i, double eta) const {
    return q_scaled(power[i].mu - eta, power[i].sigma);
}

double SensingProfile::false_positive(double eta) const {
    return q_scaled(eta - power[0].mu, power[0].sigma);
}

double SensingProfile::accuracy_with_fp(double eta, double fp) const {
    double acc = prior[0] * ((1.0 - fp) + fp * alpha);
    for (std::size_t i = 1; i < power.size(); ++i)
        acc += prior[i] * (1.0 - miss(i, eta)) * alpha;
    return acc;
}

double SensingProfile::accuracy(double eta) const {
    return accuracy_with_fp(eta, false_positive(eta));
}

double SensingProfile::pass_prob(double eta) const {
    double p = prior[0] * false_positive(eta);
    for (std::size_t i = 1; i < power.size(); ++i) p += prior[i] * (1.0 - miss(i, eta));
    return p;
}

double SensingProfile::delay(double eta, double f_sense) const {
    if (!(f_sense > 0.0)) throw std::domain_error("sensing delay: f_sense must be > 0");
    return pass_prob(eta) * cnn_cost / f_sense;
}

SensingProfile make_profile(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                            double f_s) {
    validate(cs);
    SensingProfile p;
    p.power.reserve(cs.classes.size());
    p.prior.reserve(cs.classes.size());
    for (const auto& c : cs.classes) {
        p.power.push_back(power_stats(c, sp, f_s));
        p.prior.push_back(c.prior);
    }
    p.alpha = cnn_accuracy(am, f_s);
    p.eta_u = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < p.power.size(); ++i) p.eta_u = std::min(p.eta_u, p.power[i].mu);
    p.cnn_cost = sp.c_s * sp.k_sub * sp.t_win * f_s;
    return p;
}

double overall_accuracy(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                        double f_s, double eta) {
    return make_profile(cs, sp, am, f_s).accuracy(eta);
}

double cnn_pass_probability(const ClassSet& cs, const SensingParams& sp, double f_s, double eta) {
    validate(cs);
    double p = false_positive_rate(cs.classes[0], sp, f_s, eta) * cs.classes[0].prior;
    for (std::size_t i = 1; i < cs.classes.size(); ++i)
        p += cs.classes[i].prior * (1.0 - miss_rate(cs.classes[i], sp, f_s, eta));
    return p;
}

double avg_sensing_delay(const ClassSet& cs, const SensingParams& sp, double f_s, double eta,
                         double f_sense) {
    if (!(f_sense > 0.0)) throw std::domain_error("avg_sensing_delay: f_sense must be > 0");
    const double cost = sp.c_s * sp.k_sub * sp.t_win * f_s;
    return cnn_pass_probability(cs, sp, f_s, eta) * cost / f_sense;
}

double eta_upper(const ClassSet& cs, const SensingParams& sp, double f_s) {
    if (cs.classes.size() < 2) throw std::domain_error("eta_upper: no action classes");
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < cs.classes.size(); ++i)
        m = std::min(m, power_stats(cs.classes[i], sp, f_s).mu);
    return m;
}

GainCondition gain_condition(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                             double f_s) {
    validate(cs);
    const double alpha = cnn_accuracy(am, f_s);
    const double p1 = cs.classes[0].prior;
    if (p1 <= 0.0) return {false, -std::numeric_limits<double>::infinity(),
                           GainCondition::Degenerate::static_prior_zero};
    if (alpha >= 1.0) return {false, -std::numeric_limits<double>::infinity(),
                              GainCondition::Degenerate::cnn_saturated};

    const auto s0 = power_stats(cs.classes[0], sp, f_s);
    double sum = 0.0;
    for (std::size_t i = 1; i < cs.classes.size(); ++i) {
        const auto si = power_stats(cs.classes[i], sp, f_s);
        if (si.sigma == 0.0) continue;  // perfectly separable class never costs accuracy at 0+
        if (s0.sigma == 0.0) {
            // The static density collapses; a positive static mean makes the
            // comparison term blow up, a zero mean removes it.
            if (s0.mu > 0.0) {
                sum = std::numeric_limits<double>::infinity();
                break;
            }
            continue;
        }
        const double expo = s0.mu * s0.mu / (2.0 * s0.sigma * s0.sigma) -
                            si.mu * si.mu / (2.0 * si.sigma * si.sigma);
        sum += cs.classes[i].prior * alpha * s0.sigma / (p1 * (1.0 - alpha) * si.sigma) *
               std::exp(expo);
    }
    const double margin = 1.0 - sum;
    return {margin > 0.0, margin, GainCondition::Degenerate::none};
}

GainBreakdown performance_gain_detail(const ClassSet& cs, const SensingParams& sp,
                                      const AlphaModel& am, double f_s) {
    const auto cond = gain_condition(cs, sp, am, f_s);
    if (!cond.satisfied) throw std::domain_error("performance_gain: no gain regime");

    const auto prof = make_profile(cs, sp, am, f_s);
    const double eu = prof.eta_u;
    GainBreakdown out;
    out.branch_pass_cap = 1.0 - prof.pass_prob(eu);
    out.rho = out.branch_pass_cap;

    // Locate the threshold where accuracy falls back to the no-gate level.
    // The accuracy rises above alpha just past zero, so scan down from
    // eta_upper for the last crossing and bisect inside that cell.
    const auto g = [&](double eta) { return prof.accuracy(eta) - prof.alpha; };
    if (g(eu) < 0.0) {
        constexpr int kGrid = 256;
        double hi = eu;
        bool bracketed = false;
        double lo = 0.0;
        for (int k = kGrid - 1; k >= 1; --k) {
            const double eta = eu * k / kGrid;
            if (g(eta) > 0.0) {
                lo = eta;
                bracketed = true;
                break;
            }
            hi = eta;
        }
        if (!bracketed) {
            // The rise can sit arbitrarily close to zero; probe geometrically.
            for (double eta = eu / (2.0 * kGrid); eta > eu * 1e-12; eta /= 2.0) {
                if (g(eta) > 0.0) {
                    lo = eta;
                    bracketed = true;
                    break;
                }
                hi = eta;
            }
        }
        if (bracketed) {
            const double root = numerics::bisect_monotone(g, 0.0, lo, hi,
                                                          {std::max(1e-12 * eu, 1e-300), 200});
            out.eta_root = root;
            const double acc = prof.accuracy(root);
            out.branch_root = prof.prior[0] * (1.0 - prof.false_positive(root)) / acc;
            out.rho = std::min(out.branch_pass_cap, *out.branch_root);
        }
    }
    out.rho = std::clamp(out.rho, 0.0, 1.0 - 1e-15);
    return out;
}

double performance_gain(const ClassSet& cs, const SensingParams& sp, const AlphaModel& am,
                        double f_s) {
    return performance_gain_detail(cs, sp, am, f_s).rho;
}

void to_json(nlohmann::json& j, const ClassStats& c) {
    j = nlohmann::json{{"lambda_i", c.lambda},
                       {"r_i", c.r},
                       {"sigma_d2_i", c.sigma_d2},
                       {"prior_i", c.prior}};
}

void from_json(const nlohmann::json& j, ClassStats& c) {
    c.lambda = j.at("lambda_i").get<double>();
    c.r = j.at("r_i").get<double>();
    c.sigma_d2 = j.at("sigma_d2_i").get<double>();
    c.prior = j.at("prior_i").get<double>();
}

void to_json(nlohmann::json& j, const ClassSet& cs) { j = nlohmann::json{{"classes", cs.classes}}; }

void from_json(const nlohmann::json& j, ClassSet& cs) {
    cs.classes = j.at("classes").get<std::vector<ClassStats>>();
}

void to_json(nlohmann::json& j, const SensingParams& sp) {
    j = nlohmann::json{{"t_win", sp.t_win},   {"f_lo", sp.f_lo},
                       {"f_hi", sp.f_hi},     {"sigma2", sp.sigma2},
                       {"k_sub", sp.k_sub},   {"c_s", sp.c_s},
                       {"tau_s", sp.tau_s},   {"t_sense_max", sp.t_sense_max}};
}

void from_json(const nlohmann::json& j, SensingParams& sp) {
    sp.t_win = j.at("t_win").get<double>();
    sp.f_lo = j.at("f_lo").get<double>();
    sp.f_hi = j.at("f_hi").get<double>();
    sp.sigma2 = j.at("sigma2").get<double>();
    sp.k_sub = j.at("k_sub").get<int>();
    sp.c_s = j.at("c_s").get<double>();
    sp.tau_s = j.at("tau_s").get<double>();
    sp.t_sense_max = j.at("t_sense_max").get<double>();
}

void to_json(nlohmann::json& j, const AlphaModel& am) {
    j = nlohmann::json{{"a_max", am.a_max}, {"kappa", am.kappa}};
    if (!am.table.empty()) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& [f, a] : am.table) t.push_back({f, a});
        j["table"] = t;
    }
}

void from_json(const nlohmann::json& j, AlphaModel& am) {
    am.a_max = j.value("a_max", 0.99);
    am.kappa = j.value("kappa", 15.0);
    am.table.clear();
    if (j.contains("table")) {
        for (const auto& row : j.at("table"))
            am.table.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    }
}

ClassSet load_class_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open class set file: " + path.string());
    nlohmann::json j;
    in >> j;
    ClassSet cs = j.get<ClassSet>();
    validate(cs);
    return cs;
}

void save_class_set(const ClassSet& cs, const std::filesystem::path& path) {
    validate(cs);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write class set file: " + path.string());
    nlohmann::json j = cs;
    out << j.dump(2) << '\n';
}

}  // namespace iscc::sensing
