#include "iscc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "iscc/parallel.hpp"
#include "iscc/rng.hpp"
#include "iscc/threshold_opt.hpp"

namespace iscc::experiment {

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct MomentSummary {
    double mean;
    double var;
    double se_mean;
    double se_var;
};

MomentSummary summarize(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double var = m2 / (n - 1.0);
    m4 /= n;
    const double se_var = std::sqrt(std::max(m4 - var * var * (n - 3.0) / (n - 1.0), 0.0) / n);
    return {mean, var, std::sqrt(var / n), se_var};
}

sensing::ClassSet with_static_prior(const sensing::ClassSet& base, double p_static) {
    if (!(p_static > 0.0 && p_static < 1.0))
        throw ConfigError("p_static sweep values must lie in (0, 1)");
    sensing::ClassSet out = base;
    double action_sum = 0.0;
    for (std::size_t i = 1; i < out.classes.size(); ++i) action_sum += out.classes[i].prior;
    out.classes[0].prior = p_static;
    for (std::size_t i = 1; i < out.classes.size(); ++i)
        out.classes[i].prior *= (1.0 - p_static) / action_sum;
    return out;
}

opt::AllocationPlan run_job(const ExperimentConfig& cfg, SweepAxis axis, double value,
                            std::uint64_t seed, const opt::Scheme& scheme) {
    sensing::SensingParams sp = cfg.sensing;
    sensing::ClassSet cs = cfg.classes;
    comm::ScenarioParams params = cfg.scenario;
    int n_devices = cfg.n_devices;
    opt::Scheme sch = scheme;
    std::optional<int> fixed_fs;

    switch (axis) {
        case SweepAxis::f_edge:
            params.f_edge_hz = value;
            break;
        case SweepAxis::n_devices:
            n_devices = static_cast<int>(value);
            if (n_devices < 1 || static_cast<double>(n_devices) != value)
                throw ConfigError("n_devices sweep values must be positive integers");
            break;
        case SweepAxis::p_static:
            cs = with_static_prior(cs, value);
            break;
        case SweepAxis::t_sense_max:
            sp.t_sense_max = value;
            break;
        case SweepAxis::threshold_ratio:
            if (!(value >= 0.0 && value <= 1.0))
                throw ConfigError("threshold_ratio sweep values must lie in [0, 1]");
            if (sch.kind == opt::Scheme::Kind::fixed_threshold) sch.ratio = value;
            break;
        case SweepAxis::f_s:
            fixed_fs = static_cast<int>(value);
            if (*fixed_fs < 1 || static_cast<double>(*fixed_fs) != value)
                throw ConfigError("f_s sweep values must be positive integers");
            break;
    }

    const auto scenario = comm::generate_scenario(n_devices, cfg.radius_km, params, seed);
    opt::SolveOptions opts;
    opts.fs_step = cfg.fs_step;
    opts.m_segments = cfg.m_segments;

    if (fixed_fs) {
        // Rate pinned by the sweep: solve the fixed-rate subproblem under each
        // scheme's threshold rule; the equal-split schemes keep their own rate
        // policy and simply ignore the axis.
        switch (sch.kind) {
            case opt::Scheme::Kind::proposed: {
                auto p = opt::evaluate_fixed_fs(scenario, sp, cs, cfg.alpha, *fixed_fs, opts);
                p.scheme = sch.label();
                return p;
            }
            case opt::Scheme::Kind::low_complexity: {
                opt::SolveOptions lc = opts;
                lc.m_segments = 1;
                auto p = opt::evaluate_fixed_fs(scenario, sp, cs, cfg.alpha, *fixed_fs, lc);
                p.scheme = sch.label();
                return p;
            }
            case opt::Scheme::Kind::conventional:
            case opt::Scheme::Kind::fixed_threshold: {
                opt::SolveOptions forced = opts;
                forced.eta_ratio =
                    sch.kind == opt::Scheme::Kind::conventional ? 0.0 : sch.ratio;
                auto p = opt::evaluate_fixed_fs(scenario, sp, cs, cfg.alpha, *fixed_fs, forced);
                p.scheme = sch.label();
                return p;
            }
            default:
                return opt::run_benchmark(sch, scenario, sp, cs, cfg.alpha, opts);
        }
    }
    return opt::run_benchmark(sch, scenario, sp, cs, cfg.alpha, opts);
}

}  // namespace

SweepAxis parse_axis(const std::string& name) {
    if (name == "f_edge") return SweepAxis::f_edge;
    if (name == "n_devices") return SweepAxis::n_devices;
    if (name == "p_static") return SweepAxis::p_static;
    if (name == "t_sense_max") return SweepAxis::t_sense_max;
    if (name == "threshold_ratio") return SweepAxis::threshold_ratio;
    if (name == "f_s") return SweepAxis::f_s;
    throw ConfigError("unknown sweep axis: " + name);
}

std::string axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::f_edge: return "f_edge";
        case SweepAxis::n_devices: return "n_devices";
        case SweepAxis::p_static: return "p_static";
        case SweepAxis::t_sense_max: return "t_sense_max";
        case SweepAxis::threshold_ratio: return "threshold_ratio";
        case SweepAxis::f_s: return "f_s";
    }
    return "unknown";
}

sensing::ClassSet default_class_set() {
    sensing::ClassSet cs;
    sensing::ClassStats stat;
    const double r = 0.775;  // noise power 0.025 over the 31 default band bins
    stat.lambda = 0.3;
    stat.r = r;
    stat.sigma_d2 = 1e-4;
    stat.prior = 0.5;
    cs.classes.push_back(stat);
    const double lambdas[] = {0.9, 1.1, 1.3, 1.5, 1.7, 1.9, 2.1};
    for (double lambda : lambdas) {
        sensing::ClassStats c;
        c.lambda = lambda;
        c.r = r;
        c.sigma_d2 = 9e-4 * lambda * lambda;
        c.prior = 0.5 / 7.0;
        cs.classes.push_back(c);
    }
    return cs;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.classes = default_class_set();
    cfg.schemes = {opt::Scheme::parse("proposed"), opt::Scheme::parse("conventional")};
    return cfg;
}

ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg = default_config();
    try {
        if (j.contains("sensing")) cfg.sensing = j.at("sensing").get<sensing::SensingParams>();
        sensing::validate(cfg.sensing);

        if (j.contains("classes") && j.contains("classes_file"))
            throw ConfigError("give either classes or classes_file, not both");
        if (j.contains("classes")) {
            cfg.classes = j.at("classes").get<sensing::ClassSet>();
        } else if (j.contains("classes_file")) {
            const auto rel = j.at("classes_file").get<std::string>();
            const auto path = base_dir / rel;
            if (!std::filesystem::exists(path))
                throw ConfigError("classes_file does not exist: " + path.string());
            cfg.classes = sensing::load_class_set(path);
        }
        sensing::validate(cfg.classes);

        if (j.contains("stats_override")) {
            auto v = j.at("stats_override").get<std::vector<sensing::ClassStats>>();
            if (v.size() != cfg.classes.classes.size())
                throw ConfigError("stats_override must list one entry per class");
            cfg.stats_override = std::move(v);
        }

        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<sensing::AlphaModel>();
        sensing::validate(cfg.alpha);

        if (j.contains("scenario")) {
            const auto& sj = j.at("scenario");
            cfg.n_devices = sj.value("n_devices", cfg.n_devices);
            cfg.radius_km = sj.value("radius_km", cfg.radius_km);
            cfg.scenario.f_edge_hz = sj.value("f_edge_hz", cfg.scenario.f_edge_hz);
            cfg.scenario.bandwidth_hz = sj.value("bandwidth_hz", cfg.scenario.bandwidth_hz);
            cfg.scenario.tx_power_dbm = sj.value("tx_power_dbm", cfg.scenario.tx_power_dbm);
            cfg.scenario.noise_dbm_per_hz =
                sj.value("noise_dbm_per_hz", cfg.scenario.noise_dbm_per_hz);
            cfg.scenario.t_max_s = sj.value("t_max_s", cfg.scenario.t_max_s);
            if (sj.contains("v_bits")) {
                cfg.scenario.v_bits_lo = sj.at("v_bits").at(0).get<double>();
                cfg.scenario.v_bits_hi = sj.at("v_bits").at(1).get<double>();
            }
            if (sj.contains("c_cycles_per_bit")) {
                cfg.scenario.c_lo = sj.at("c_cycles_per_bit").at(0).get<double>();
                cfg.scenario.c_hi = sj.at("c_cycles_per_bit").at(1).get<double>();
            }
            if (cfg.n_devices < 1) throw ConfigError("scenario.n_devices must be >= 1");
            if (!(cfg.radius_km > 0.0)) throw ConfigError("scenario.radius_km must be > 0");
        }

        if (j.contains("seeds")) {
            cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
            if (cfg.seeds.empty()) throw ConfigError("seeds must be nonempty");
        }
        cfg.fs_step = j.value("fs_step", cfg.fs_step);
        if (cfg.fs_step < 1) throw ConfigError("fs_step must be >= 1");
        cfg.m_segments = j.value("m_segments", cfg.m_segments);
        if (cfg.m_segments < 1) throw ConfigError("m_segments must be >= 1");

        if (j.contains("schemes")) {
            cfg.schemes.clear();
            for (const auto& sj : j.at("schemes"))
                cfg.schemes.push_back(opt::Scheme::parse(sj.get<std::string>()));
            if (cfg.schemes.empty()) throw ConfigError("schemes must be nonempty");
        }

        if (j.contains("sweep")) {
            SweepSettings sw;
            const auto& swj = j.at("sweep");
            sw.axis = parse_axis(swj.at("axis").get<std::string>());
            sw.grid = swj.at("grid").get<std::vector<double>>();
            if (sw.grid.empty()) throw ConfigError("sweep.grid must be nonempty");
            if (swj.contains("output")) sw.output = base_dir / swj.at("output").get<std::string>();
            else sw.output = base_dir / "sweep.csv";
            cfg.sweep = sw;
        }

        if (j.contains("validate")) {
            const auto& vj = j.at("validate");
            if (vj.contains("fs_grid")) cfg.validate.fs_grid = vj.at("fs_grid").get<std::vector<int>>();
            if (cfg.validate.fs_grid.empty()) throw ConfigError("validate.fs_grid must be nonempty");
            cfg.validate.eta_points = vj.value("eta_points", cfg.validate.eta_points);
            if (cfg.validate.eta_points < 1) throw ConfigError("validate.eta_points must be >= 1");
            cfg.validate.trials = vj.value("trials", cfg.validate.trials);
            if (cfg.validate.trials < 100) throw ConfigError("validate.trials must be >= 100");
            cfg.validate.tone_hz = vj.value("tone_hz", cfg.validate.tone_hz);
            if (vj.contains("output"))
                cfg.validate.output = base_dir / vj.at("output").get<std::string>();
            else
                cfg.validate.output = base_dir / "validate.csv";
        } else {
            cfg.validate.output = base_dir / "validate.csv";
        }

        if (j.contains("explain")) cfg.explain_f_s = j.at("explain").at("f_s").get<double>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

int cmd_validate(const ExperimentConfig& cfg, std::ostream& log) {
    const auto& sp = cfg.sensing;
    const auto& truth = cfg.classes.classes;
    const auto& model = cfg.stats_override ? *cfg.stats_override : truth;
    const std::uint64_t seed0 = cfg.seeds.front();
    if (cfg.validate.trials < 10000)
        log << "warning: " << cfg.validate.trials
            << " trials gives wide standard errors; the pass verdicts carry little weight\n";

    std::string csv = "# isccsim validate v1\nkind,class,f_s,eta,predicted,empirical,stderr,pass\n";
    bool all_pass = true;
    int cells = 0, failed = 0;

    for (std::size_t fi = 0; fi < cfg.validate.fs_grid.size(); ++fi) {
        const double f_s = cfg.validate.fs_grid[fi];
        // Threshold grid spans the informative range between the static mean
        // and the smallest action mean, per the model-side stats.
        const auto m0 = sensing::power_stats(model[0], sp, f_s);
        double eta_u = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < model.size(); ++i)
            eta_u = std::min(eta_u, sensing::power_stats(model[i], sp, f_s).mu);
        std::vector<double> etas;
        const double eta_lo = 0.2 * m0.mu;
        for (int k = 0; k < cfg.validate.eta_points; ++k) {
            const double t = cfg.validate.eta_points == 1
                                 ? 0.0
                                 : static_cast<double>(k) / (cfg.validate.eta_points - 1);
            etas.push_back(eta_lo + (eta_u - eta_lo) * t);
        }

        for (std::size_t ci = 0; ci < truth.size(); ++ci) {
            const bool is_action = ci > 0;
            const auto spec = sim::matched_spec(truth[ci], sp, cfg.validate.tone_hz, is_action);
            const auto samples = sim::sample_band_powers(
                spec, sp, f_s, cfg.validate.trials, rng::derive_stream(seed0, ci * 1024 + fi));
            const auto mom = summarize(samples);
            const auto pred = sensing::power_stats(model[ci], sp, f_s);

            const bool mean_ok = std::abs(mom.mean - pred.mu) <= 3.0 * mom.se_mean;
            const bool var_ok =
                std::abs(mom.var - pred.sigma * pred.sigma) <= 3.0 * mom.se_var;
            csv += "mean," + std::to_string(ci) + ',' + fmt(f_s) + ",," + fmt(pred.mu) + ',' +
                   fmt(mom.mean) + ',' + fmt(mom.se_mean) + ',' + (mean_ok ? "1" : "0") + '\n';
            csv += "var," + std::to_string(ci) + ',' + fmt(f_s) + ",," +
                   fmt(pred.sigma * pred.sigma) + ',' + fmt(mom.var) + ',' + fmt(mom.se_var) +
                   ',' + (var_ok ? "1" : "0") + '\n';
            cells += 2;
            failed += !mean_ok + !var_ok;
            all_pass = all_pass && mean_ok && var_ok;

            for (double eta : etas) {
                double predicted, empirical;
                std::size_t wrong = 0;
                if (is_action) {
                    predicted = sensing::miss_rate(model[ci], sp, f_s, eta);
                    for (double p : samples) wrong += !sim::detect_action(p, eta);
                } else {
                    predicted = sensing::false_positive_rate(model[ci], sp, f_s, eta);
                    for (double p : samples) wrong += sim::detect_action(p, eta);
                }
                empirical = static_cast<double>(wrong) / samples.size();
                const double se =
                    std::sqrt(std::max(empirical * (1.0 - empirical), 0.0) / samples.size());
                const bool ok = std::abs(empirical - predicted) <= std::max(3.0 * se, 0.01);
                csv += "rate," + std::to_string(ci) + ',' + fmt(f_s) + ',' + fmt(eta) + ',' +
                       fmt(predicted) + ',' + fmt(empirical) + ',' + fmt(se) + ',' +
                       (ok ? "1" : "0") + '\n';
                ++cells;
                failed += !ok;
                all_pass = all_pass && ok;
            }
        }
    }

    std::ofstream out(cfg.validate.output);
    if (!out) {
        log << "cannot write " << cfg.validate.output.string() << '\n';
        return kExitError;
    }
    out << csv;
    log << "validate: " << (cells - failed) << '/' << cells << " cells pass -> "
        << cfg.validate.output.string() << '\n';
    return all_pass ? kExitOk : kExitValidation;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
    if (!cfg.sweep) throw ConfigError("sweep requested but no sweep block configured");
    const auto& sw = *cfg.sweep;

    struct Job {
        double value;
        std::uint64_t seed;
        std::size_t scheme;
    };
    std::vector<Job> jobs;
    for (double value : sw.grid)
        for (std::uint64_t seed : cfg.seeds)
            for (std::size_t si = 0; si < cfg.schemes.size(); ++si)
                jobs.push_back({value, seed, si});

    std::vector<std::string> lines(jobs.size());
    par::parallel_for(jobs.size(), [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto plan = run_job(cfg, sw.axis, job.value, job.seed, cfg.schemes[job.scheme]);
        std::string line = axis_name(sw.axis);
        line += ',';
        line += fmt(job.value);
        line += ',';
        line += std::to_string(job.seed);
        line += ',';
        line += plan.scheme;
        line += ',';
        line += plan.feasible ? '1' : '0';
        line += ',';
        line += fmt(plan.f_s);
        line += ',';
        line += fmt(plan.eta);
        line += ',';
        line += fmt(plan.f_sense);
        line += ',';
        line += fmt(plan.accuracy);
        line += ',';
        line += fmt(plan.sensing_delay);
        line += '\n';
        lines[i] = std::move(line);
    });

    std::ofstream out(sw.output);
    if (!out) {
        log << "cannot write " << sw.output.string() << '\n';
        return kExitError;
    }
    out << "# isccsim sweep v1\naxis,value,seed,scheme,feasible,f_s,eta,f_sense,accuracy,"
           "sensing_delay\n";
    for (const auto& line : lines) out << line;
    log << "sweep: " << jobs.size() << " rows -> " << sw.output.string() << '\n';
    return kExitOk;
}

int cmd_fit(const ExperimentConfig& cfg, const std::filesystem::path& input_csv,
            const std::filesystem::path& output_json, std::ostream& log) {
    const auto rows = sim::read_power_csv(input_csv);
    if (rows.empty()) throw ConfigError("fit: no samples in " + input_csv.string());

    std::map<int, std::map<double, std::vector<double>>> by_class;
    for (const auto& row : rows) by_class[row.class_index][row.f_s].push_back(row.p);
    if (by_class.begin()->first != 0)
        throw ConfigError("fit: class indices must start at 0 (the static class)");

    sensing::ClassSet cs;
    const double total = static_cast<double>(rows.size());
    int expected = 0;
    for (const auto& [ci, groups] : by_class) {
        if (ci != expected++)
            throw ConfigError("fit: class indices must be contiguous from 0");
        std::vector<sim::PowerGroup> gs;
        double count = 0.0;
        for (const auto& [f_s, values] : groups) {
            gs.push_back({f_s, values});
            count += static_cast<double>(values.size());
        }
        auto stats = sim::fit_class_stats(gs, cfg.sensing);
        stats.prior = count / total;
        cs.classes.push_back(stats);
    }
    sensing::validate(cs);
    sensing::save_class_set(cs, output_json);
    log << "fit: " << cs.classes.size() << " classes -> " << output_json.string() << '\n';
    return kExitOk;
}

int cmd_solve(const ExperimentConfig& cfg, const std::filesystem::path& output_json,
              std::ostream& log) {
    const auto scenario =
        comm::generate_scenario(cfg.n_devices, cfg.radius_km, cfg.scenario, cfg.seeds.front());
    opt::SolveOptions opts;
    opts.fs_step = cfg.fs_step;
    opts.m_segments = cfg.m_segments;

    nlohmann::json plans = nlohmann::json::array();
    for (const auto& scheme : cfg.schemes) {
        const auto plan = opt::run_benchmark(scheme, scenario, cfg.sensing, cfg.classes, cfg.alpha, opts);
        log << plan.scheme << ": feasible=" << (plan.feasible ? 1 : 0) << " f_s=" << plan.f_s
            << " eta=" << plan.eta << " accuracy=" << plan.accuracy << '\n';
        plans.push_back(plan);
    }
    std::ofstream out(output_json);
    if (!out) {
        log << "cannot write " << output_json.string() << '\n';
        return kExitError;
    }
    out << plans.dump(2) << '\n';
    return kExitOk;
}

int cmd_explain(const ExperimentConfig& cfg, std::ostream& out) {
    const double f_s = cfg.explain_f_s.value_or(200.0);
    const auto cond = sensing::gain_condition(cfg.classes, cfg.sensing, cfg.alpha, f_s);
    out << "sampling rate: " << fmt(f_s) << " Hz\n";
    out << "recognizer accuracy: " << fmt(sensing::cnn_accuracy(cfg.alpha, f_s)) << '\n';
    out << "threshold ceiling: " << fmt(sensing::eta_upper(cfg.classes, cfg.sensing, f_s)) << '\n';
    out << "gate benefit margin: " << fmt(cond.margin) << " ("
        << (cond.satisfied ? "satisfied" : "not satisfied") << ")\n";
    if (!cond.satisfied) {
        out << "no computation saving available in this regime\n";
        return kExitOk;
    }
    const auto gain = sensing::performance_gain_detail(cfg.classes, cfg.sensing, cfg.alpha, f_s);
    out << "saving with the gate at its ceiling: " << fmt(gain.branch_pass_cap) << '\n';
    if (gain.eta_root) {
        out << "accuracy break-even threshold: " << fmt(*gain.eta_root) << '\n';
        out << "saving at the break-even threshold: " << fmt(*gain.branch_root) << '\n';
    } else {
        out << "accuracy stays above the gate-less level over the whole threshold range\n";
    }
    out << "computation saving: " << fmt(gain.rho) << '\n';
    return kExitOk;
}

}  // namespace iscc::experiment
