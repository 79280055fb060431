#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "iscc/experiment.hpp"

using namespace iscc::experiment;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Small scenario so sweeps stay quick.
std::string small_config_json(const std::string& extra = "") {
    return R"({
        "scenario": {"n_devices": 4, "radius_km": 0.25, "f_edge_hz": 1.2e10},
        "seeds": [1, 2],
        "fs_step": 20,
        "schemes": ["proposed", "conventional"])" +
           extra + "\n}";
}

}  // namespace

TEST_CASE("default config carries eight classes that sum to one") {
    const auto cfg = default_config();
    CHECK(cfg.classes.classes.size() == 8);
    double sum = 0.0;
    for (const auto& c : cfg.classes.classes) sum += c.prior;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(iscc::sensing::validate(cfg.classes));
}

TEST_CASE("config loading reports malformed json as a config error") {
    const auto dir = fresh_dir("iscc_exp_badjson");
    const auto path = dir / "broken.json";
    write_file(path, "{ not json");
    CHECK_THROWS_AS(load_config(path), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("config loading names the offending field") {
    const auto dir = fresh_dir("iscc_exp_badfield");
    const auto path = dir / "bad.json";
    write_file(path, R"({"fs_step": 0})");
    try {
        load_config(path);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("fs_step") != std::string::npos);
    }

    write_file(path, R"({"schemes": ["bogus"]})");
    CHECK_THROWS_AS(load_config(path), ConfigError);

    write_file(path, R"({"sweep": {"axis": "sideways", "grid": [1]}})");
    CHECK_THROWS_AS(load_config(path), ConfigError);

    write_file(path, R"({"classes_file": "nowhere.json"})");
    CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("class files referenced by the config are loaded and validated") {
    const auto dir = fresh_dir("iscc_exp_classfile");
    iscc::sensing::save_class_set(default_class_set(), dir / "classes.json");
    write_file(dir / "cfg.json", R"({"classes_file": "classes.json"})");
    const auto cfg = load_config(dir / "cfg.json");
    CHECK(cfg.classes.classes.size() == 8);
}

TEST_CASE("validate passes on matched statistics and flags a broken variance model") {
    const auto dir = fresh_dir("iscc_exp_validate");
    ExperimentConfig cfg = default_config();
    cfg.validate.fs_grid = {50, 100};
    cfg.validate.eta_points = 3;
    cfg.validate.trials = 20000;
    cfg.validate.tone_hz = 15.0;
    cfg.validate.output = dir / "validate.csv";
    cfg.seeds = {9};

    std::ostringstream log;
    CHECK(cmd_validate(cfg, log) == kExitOk);
    const auto report = read_file(dir / "validate.csv");
    CHECK(report.find("kind,class,f_s,eta,predicted,empirical,stderr,pass") != std::string::npos);
    CHECK(report.find(",0\n") == std::string::npos);  // no failing cells

    // Same config bytes, same report bytes.
    CHECK(cmd_validate(cfg, log) == kExitOk);
    CHECK(read_file(dir / "validate.csv") == report);

    // Misconfigure the model-side variances tenfold; the generator stays put.
    auto wrong = cfg.classes.classes;
    for (auto& c : wrong) c.sigma_d2 *= 10.0;
    cfg.stats_override = wrong;
    cfg.validate.output = dir / "validate_bad.csv";
    std::ostringstream log2;
    CHECK(cmd_validate(cfg, log2) == kExitValidation);
    const auto bad_report = read_file(dir / "validate_bad.csv");
    bool var_failure = false;
    std::istringstream lines(bad_report);
    std::string line;
    while (std::getline(lines, line))
        if (line.rfind("var,", 0) == 0 && line.size() >= 2 &&
            line.compare(line.size() - 2, 2, ",0") == 0)
            var_failure = true;
    CHECK(var_failure);
}

TEST_CASE("validate warns when trials are too thin to conclude anything") {
    const auto dir = fresh_dir("iscc_exp_validate_thin");
    ExperimentConfig cfg = default_config();
    cfg.validate.fs_grid = {50};
    cfg.validate.eta_points = 2;
    cfg.validate.trials = 100;
    cfg.validate.output = dir / "validate.csv";
    std::ostringstream log;
    cmd_validate(cfg, log);
    CHECK(log.str().find("warning") != std::string::npos);
}

TEST_CASE("sweep output is byte-identical across runs and dominance holds row-wise") {
    const auto dir = fresh_dir("iscc_exp_sweep");
    ExperimentConfig cfg = default_config();
    cfg.n_devices = 4;
    cfg.radius_km = 0.25;
    cfg.fs_step = 20;
    cfg.seeds = {1, 2};
    cfg.schemes = {iscc::opt::Scheme::parse("proposed"), iscc::opt::Scheme::parse("conventional")};
    SweepSettings sw;
    sw.axis = SweepAxis::f_edge;
    sw.grid = {8e9, 1.6e10, 2.4e10};
    sw.output = dir / "sweep.csv";
    cfg.sweep = sw;

    std::ostringstream log;
    REQUIRE(cmd_sweep(cfg, log) == kExitOk);
    const auto first = read_file(sw.output);
    REQUIRE(cmd_sweep(cfg, log) == kExitOk);
    const auto second = read_file(sw.output);
    CHECK(first == second);
    CHECK(first.find("# isccsim sweep v1") == 0);

    // Per (point, seed): the optimized threshold beats the gate-less runs.
    std::istringstream lines(first);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);  // header rows
    double proposed_acc = -1.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 10);
        const double acc = std::stod(fields[8]);
        if (fields[3] == "proposed")
            proposed_acc = acc;
        else
            CHECK(proposed_acc >= acc - 1e-6);
        ++rows;
    }
    CHECK(rows == 12);
}

TEST_CASE("sweep can pin the sampling rate axis") {
    const auto dir = fresh_dir("iscc_exp_sweep_fs");
    ExperimentConfig cfg = default_config();
    cfg.n_devices = 3;
    cfg.seeds = {4};
    cfg.schemes = {iscc::opt::Scheme::parse("proposed")};
    SweepSettings sw;
    sw.axis = SweepAxis::f_s;
    sw.grid = {50, 200, 400};
    sw.output = dir / "fs.csv";
    cfg.sweep = sw;
    std::ostringstream log;
    REQUIRE(cmd_sweep(cfg, log) == kExitOk);
    const auto text = read_file(sw.output);
    CHECK(text.find("f_s,50,") != std::string::npos);
    CHECK(text.find("f_s,400,") != std::string::npos);
}

TEST_CASE("fit command round-trips through the csv schema") {
    const auto dir = fresh_dir("iscc_exp_fit");
    ExperimentConfig cfg = default_config();
    cfg.sensing.t_win = 0.32;
    cfg.sensing.sigma2 = 0.02;  // 5 band bins -> r = 0.2

    iscc::sensing::ClassStats stat{0.4, 0.2, 1e-4, 0.0};
    iscc::sensing::ClassStats act{1.2, 0.2, 4e-3, 0.0};
    const auto spec0 = iscc::sim::matched_spec(stat, cfg.sensing, 12.5, false);
    const auto spec1 = iscc::sim::matched_spec(act, cfg.sensing, 12.5, true);

    std::vector<iscc::sim::PowerSample> rows;
    int trial = 0;
    for (double f_s : {50.0, 100.0, 200.0}) {
        for (double p :
             iscc::sim::sample_band_powers(spec0, cfg.sensing, f_s, 4000, 100 + trial))
            rows.push_back({0, f_s, trial++, p});
        for (double p :
             iscc::sim::sample_band_powers(spec1, cfg.sensing, f_s, 4000, 500 + trial))
            rows.push_back({1, f_s, trial++, p});
    }
    const auto csv = dir / "samples.csv";
    iscc::sim::write_power_csv(rows, csv);

    std::ostringstream log;
    const auto out = dir / "fitted.json";
    REQUIRE(cmd_fit(cfg, csv, out, log) == kExitOk);
    const auto fitted = iscc::sensing::load_class_set(out);
    REQUIRE(fitted.classes.size() == 2);
    CHECK(fitted.classes[0].prior == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fitted.classes[0].lambda == doctest::Approx(0.4).epsilon(0.05));
    CHECK(fitted.classes[1].lambda == doctest::Approx(1.2).epsilon(0.05));
}

TEST_CASE("solve command writes one plan per scheme") {
    const auto dir = fresh_dir("iscc_exp_solve");
    ExperimentConfig cfg = default_config();
    cfg.n_devices = 4;
    cfg.fs_step = 20;
    cfg.seeds = {12};
    cfg.schemes = {iscc::opt::Scheme::parse("proposed"), iscc::opt::Scheme::parse("avg_comm")};
    std::ostringstream log;
    const auto out = dir / "plans.json";
    REQUIRE(cmd_solve(cfg, out, log) == kExitOk);

    std::ifstream in(out);
    nlohmann::json j;
    in >> j;
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j.at(0).at("scheme").get<std::string>() == "proposed");
    CHECK(j.at(1).at("scheme").get<std::string>() == "avg_comm");
    CHECK(log.str().find("proposed") != std::string::npos);
}

TEST_CASE("explain prints the condition and the saving breakdown") {
    ExperimentConfig cfg = default_config();
    cfg.explain_f_s = 200.0;
    std::ostringstream out;
    REQUIRE(cmd_explain(cfg, out) == kExitOk);
    const auto text = out.str();
    CHECK(text.find("gate benefit margin") != std::string::npos);
    CHECK(text.find("computation saving") != std::string::npos);
}

#ifdef ISCCSIM_TOOL_PATH
TEST_CASE("command-line tool end to end") {
    const auto dir = fresh_dir("iscc_exp_tool");
    write_file(dir / "cfg.json", small_config_json(R"(,
        "sweep": {"axis": "f_edge", "grid": [1.2e10, 2.4e10], "output": "tool_sweep.csv"})"));

    const std::string base = std::string(ISCCSIM_TOOL_PATH);
    const std::string cmd = base + " sweep --config " + (dir / "cfg.json").string() +
                            " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(dir / "tool_sweep.csv"));

    write_file(dir / "bad.json", "{ nope");
    const std::string bad_cmd =
        base + " sweep --config " + (dir / "bad.json").string() + " > /dev/null 2>&1";
    const int rc2 = std::system(bad_cmd.c_str());
    REQUIRE(WIFEXITED(rc2));
    CHECK(WEXITSTATUS(rc2) == 2);
}
#endif
