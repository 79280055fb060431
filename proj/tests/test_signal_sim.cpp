#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "iscc/numerics.hpp"
#include "iscc/rng.hpp"
#include "iscc/signal_sim.hpp"

using namespace iscc::sim;
using iscc::sensing::ClassStats;
using iscc::sensing::SensingParams;

namespace {

using cd = std::complex<double>;

// Quadratic-time reference transform, same unitary scaling.
std::vector<cd> naive_dft(const std::vector<cd>& x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    for (std::size_t l = 0; l < n; ++l) {
        cd acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(l) *
                               static_cast<double>(m) / static_cast<double>(n);
            acc += x[m] * cd{std::cos(ang), std::sin(ang)};
        }
        out[l] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

double naive_band_power(const CsiWindow& w, double f_lo, double f_hi) {
    const auto spec = naive_dft(w.samples);
    const int lo = band_bin_lo(f_lo, w.t_win);
    const int hi = band_bin_hi(f_hi, w.t_win);
    double e = 0.0;
    for (int l = lo; l <= hi; ++l) e += std::norm(spec[static_cast<std::size_t>(l)]);
    return e / static_cast<double>(w.samples.size());
}

SensingParams fit_params() {
    SensingParams sp;
    sp.t_win = 0.32;
    sp.f_lo = 10.0;
    sp.f_hi = 20.0;
    sp.sigma2 = 0.02;  // 5 band bins, so r = 0.2
    return sp;
}

}  // namespace

TEST_CASE("static window is the dc baseline") {
    SyntheticClassSpec spec;
    spec.dc = {1.0, 0.0};
    const auto w = generate_csi(spec, 100.0, 3.0, 7);
    REQUIRE(w.samples.size() == 300);
    for (const auto& s : w.samples) {
        CHECK(s.real() == 1.0);
        CHECK(s.imag() == 0.0);
    }
}

TEST_CASE("windows are bit-identical under the same seed") {
    SyntheticClassSpec spec;
    spec.tones = {{20.0, 1.3}};
    spec.amp_jitter = 0.05;
    spec.noise_sigma2 = 0.02;
    spec.is_action = true;
    const auto a = generate_csi(spec, 100.0, 3.0, 1234);
    const auto b = generate_csi(spec, 100.0, 3.0, 1234);
    const auto c = generate_csi(spec, 100.0, 3.0, 1235);
    REQUIRE(a.samples.size() == b.samples.size());
    bool identical = true, differs = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        identical = identical && a.samples[i] == b.samples[i];
        differs = differs || a.samples[i] != c.samples[i];
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("tone lands on its DFT bin") {
    SyntheticClassSpec spec;
    spec.tones = {{20.0, 1.0}};
    spec.is_action = true;
    const auto w = generate_csi(spec, 100.0, 3.0, 99);
    REQUIRE(w.samples.size() == 300);
    const auto spectrum = naive_dft(w.samples);
    std::size_t peak = 0;
    for (std::size_t l = 1; l < spectrum.size(); ++l)
        if (std::norm(spectrum[l]) > std::norm(spectrum[peak])) peak = l;
    CHECK(peak == 60);  // 20 Hz * 3 s
}

TEST_CASE("tones at or above the Nyquist rate are rejected") {
    SyntheticClassSpec spec;
    spec.tones = {{50.0, 1.0}};
    CHECK_THROWS_AS(generate_csi(spec, 100.0, 3.0, 1), std::domain_error);
    spec.tones = {{60.0, 1.0}};
    CHECK_THROWS_AS(generate_csi(spec, 100.0, 3.0, 1), std::domain_error);
}

TEST_CASE("band power of an all-zero window is zero") {
    CsiWindow w;
    w.f_s = 100.0;
    w.t_win = 3.0;
    w.samples.assign(300, cd{0.0, 0.0});
    CHECK(highfreq_power(w, 10.0, 20.0) == 0.0);
}

TEST_CASE("band power matches the quadratic-time reference") {
    SyntheticClassSpec spec;
    spec.tones = {{15.0, 0.8}};
    spec.noise_sigma2 = 0.05;
    spec.amp_jitter = 0.04;
    spec.dc = {0.3, -0.1};
    spec.is_action = true;
    // Radix-2 path (N = 256) and the general-length path (N = 300).
    for (double t_win : {2.56, 3.0}) {
        const auto w = generate_csi(spec, 100.0, t_win, 31);
        const double fast = highfreq_power(w, 10.0, 20.0);
        const double slow = naive_band_power(w, 10.0, 20.0);
        CHECK(std::abs(fast - slow) <= 1e-10 * std::max(slow, 1e-30));
    }
}

TEST_CASE("on-bin unit tone carries its squared amplitude into the band power") {
    SyntheticClassSpec spec;
    spec.tones = {{15.0, 1.0}};
    spec.is_action = true;
    const auto w = generate_csi(spec, 100.0, 3.0, 5);
    CHECK(highfreq_power(w, 10.0, 20.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unitary transform preserves energy") {
    iscc::rng::Xoshiro256pp g(77);
    for (std::size_t n : {std::size_t{256}, std::size_t{300}, std::size_t{97}}) {
        std::vector<cd> x(n);
        double time_energy = 0.0;
        for (auto& v : x) {
            v = {g.normal(), g.normal()};
            time_energy += std::norm(v);
        }
        const auto spec = dft_normalized(x);
        double freq_energy = 0.0;
        for (const auto& v : spec) freq_energy += std::norm(v);
        CHECK(std::abs(freq_energy - time_energy) <= 1e-9 * time_energy);
    }
}

TEST_CASE("band edges above Nyquist are rejected") {
    SyntheticClassSpec spec;
    spec.dc = {1.0, 0.0};
    const auto w = generate_csi(spec, 100.0, 3.0, 5);
    CHECK_THROWS_AS(highfreq_power(w, 10.0, 50.0), std::domain_error);
    CHECK_THROWS_AS(highfreq_power(w, 30.0, 20.0), std::domain_error);
}

TEST_CASE("detector verdicts and ties") {
    CHECK_FALSE(detect_action(0.5, 1.0));
    CHECK(detect_action(1.5, 1.0));
    CHECK_FALSE(detect_action(1.0, 1.0));
}

TEST_CASE("noise-only band power has the predicted mean") {
    SensingParams sp;
    sp.t_win = 3.0;
    sp.f_lo = 10.0;
    sp.f_hi = 20.0;  // 31 bins
    SyntheticClassSpec spec;
    spec.noise_sigma2 = 0.01;
    const int trials = 100000;
    const auto powers = sample_band_powers(spec, sp, 50.0, trials, 4242);
    double mean = 0.0;
    for (double p : powers) mean += p;
    mean /= trials;
    double var = 0.0;
    for (double p : powers) var += (p - mean) * (p - mean);
    var /= trials - 1;
    const double expected = 0.01 * 31.0 / 150.0;  // r / (t_win * f_s)
    const double se = std::sqrt(var / trials);
    CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("noiseless static spec never trips the detector") {
    SensingParams sp = fit_params();
    SyntheticClassSpec spec;
    spec.dc = {1.0, 0.0};
    const auto r = monte_carlo_rates(spec, sp, 50.0, 1e-9, 500, 9);
    CHECK(r.rate == 0.0);
}

TEST_CASE("strictly positive band power never misses at threshold zero") {
    SensingParams sp = fit_params();
    SyntheticClassSpec spec;
    spec.tones = {{12.5, 1.0}};
    spec.noise_sigma2 = 0.04;
    spec.is_action = true;
    const auto r = monte_carlo_rates(spec, sp, 50.0, 0.0, 500, 10);
    CHECK(r.rate == 0.0);
}

TEST_CASE("matched action spec brackets the analytic miss rate") {
    // Target power moments (mu, sigma) = (2, 0.2) at 400 Hz; a threshold two
    // sigma below the mean pins the miss rate at the q(2) tail.
    SensingParams sp;
    sp.t_win = 2.56;
    sp.f_lo = 10.0;
    sp.f_hi = 20.0;  // bins 25..52
    sp.sigma2 = 3.3;
    const double tf = sp.t_win * 400.0;
    ClassStats target;
    target.r = 2.0 * sp.sigma2 * 28.0;
    target.lambda = 2.0 - target.r / tf;
    const double noise_var =
        4.0 * sp.sigma2 * target.lambda / tf + 2.0 * sp.sigma2 * target.r / (tf * tf);
    target.sigma_d2 = 0.04 - noise_var;
    target.prior = 1.0;
    REQUIRE(target.sigma_d2 > 0.0);
    REQUIRE(target.lambda > 0.0);

    const auto spec = matched_spec(target, sp, 12.5, true);
    const auto stats = iscc::sensing::power_stats(target, sp, 400.0);
    CHECK(stats.mu == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(stats.sigma == doctest::Approx(0.2).epsilon(1e-12));

    const double eta = 2.0 - 2.0 * 0.2;
    const auto mc = monte_carlo_rates(spec, sp, 400.0, eta, 100000, 2030);
    const double predicted = iscc::numerics::q(2.0);
    CHECK(std::abs(mc.rate - predicted) <= std::max(3.0 * mc.stderr_, 0.01));
    CHECK(std::abs(mc.rate - 0.0228) <= 0.011);
}

TEST_CASE("matched static spec brackets the analytic false-positive rate") {
    SensingParams sp = fit_params();
    ClassStats target;
    target.lambda = 0.5;
    target.r = 0.2;
    target.sigma_d2 = 2e-4;
    target.prior = 1.0;
    const auto spec = matched_spec(target, sp, 12.5, false);
    const auto stats = iscc::sensing::power_stats(target, sp, 100.0);
    const double eta = stats.mu + 1.5 * stats.sigma;
    const auto mc = monte_carlo_rates(spec, sp, 100.0, eta, 50000, 88);
    const double predicted = iscc::numerics::q(1.5);
    CHECK(std::abs(mc.rate - predicted) <= std::max(3.0 * mc.stderr_, 0.01));
}

TEST_CASE("matched spec validations") {
    SensingParams sp = fit_params();
    ClassStats ok{1.0, 0.2, 0.01, 1.0};
    CHECK_NOTHROW(matched_spec(ok, sp, 12.5, true));
    // Off-bin tone.
    CHECK_THROWS_AS(matched_spec(ok, sp, 12.7, true), std::domain_error);
    // Tone outside the band.
    CHECK_THROWS_AS(matched_spec(ok, sp, 6.25, true), std::domain_error);
    // Noise energy inconsistent with the model noise floor.
    ClassStats bad_r{1.0, 0.3, 0.01, 1.0};
    CHECK_THROWS_AS(matched_spec(bad_r, sp, 12.5, true), std::domain_error);
    // Instance diversity with nothing to ride on.
    ClassStats bad_jitter{0.0, 0.2, 0.01, 1.0};
    CHECK_THROWS_AS(matched_spec(bad_jitter, sp, 12.5, false), std::domain_error);
}

TEST_CASE("fitting recovers the generator statistics") {
    SensingParams sp = fit_params();
    ClassStats truth{1.0, 0.2, 0.01, 1.0};
    const auto spec = matched_spec(truth, sp, 12.5, true);

    std::vector<PowerGroup> groups;
    for (double f_s : {50.0, 100.0, 200.0, 400.0}) {
        PowerGroup g;
        g.f_s = f_s;
        g.values = sample_band_powers(spec, sp, f_s, 100000,
                                      iscc::rng::derive_stream(555, static_cast<int>(f_s)));
        groups.push_back(std::move(g));
    }
    const auto fitted = fit_class_stats(groups, sp);
    CHECK(fitted.lambda == doctest::Approx(truth.lambda).epsilon(0.05));
    CHECK(fitted.r == doctest::Approx(truth.r).epsilon(0.05));
    CHECK(fitted.sigma_d2 == doctest::Approx(truth.sigma_d2).epsilon(0.05));
}

TEST_CASE("fitting degenerate inputs") {
    SensingParams sp = fit_params();

    // Rate-independent means leave no room for the noise-energy term.
    std::vector<PowerGroup> flat;
    for (double f_s : {50.0, 100.0, 200.0}) {
        PowerGroup g;
        g.f_s = f_s;
        iscc::rng::Xoshiro256pp rg(17);
        for (int i = 0; i < 200; ++i) g.values.push_back(1.0 + 0.01 * rg.normal());
        flat.push_back(std::move(g));
    }
    const auto fitted = fit_class_stats(flat, sp);
    CHECK(fitted.r <= 1e-6);

    // Zero-variance samples mean zero instance diversity.
    std::vector<PowerGroup> constant;
    for (double f_s : {50.0, 100.0}) {
        PowerGroup g;
        g.f_s = f_s;
        g.values.assign(100, 1.0 + 0.2 / (sp.t_win * f_s));
        constant.push_back(std::move(g));
    }
    const auto fit2 = fit_class_stats(constant, sp);
    CHECK(fit2.sigma_d2 == 0.0);

    std::vector<PowerGroup> one_rate;
    one_rate.push_back({100.0, std::vector<double>(100, 1.0)});
    CHECK_THROWS_AS(fit_class_stats(one_rate, sp), std::invalid_argument);

    std::vector<PowerGroup> short_groups;
    short_groups.push_back({100.0, std::vector<double>(10, 1.0)});
    short_groups.push_back({200.0, std::vector<double>(10, 1.0)});
    CHECK_THROWS_AS(fit_class_stats(short_groups, sp), std::invalid_argument);
}

TEST_CASE("power sample csv round trip and diagnostics") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "iscc_signal_csv";
    fs::create_directories(dir);
    const auto path = dir / "powers.csv";

    std::vector<PowerSample> rows = {
        {0, 50.0, 0, 0.312}, {0, 50.0, 1, 0.287}, {1, 100.0, 0, 1.509}};
    write_power_csv(rows, path);
    const auto back = read_power_csv(path);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].class_index == rows[i].class_index);
        CHECK(back[i].f_s == rows[i].f_s);
        CHECK(back[i].trial == rows[i].trial);
        CHECK(back[i].p == rows[i].p);
    }

    const auto bad = dir / "bad.csv";
    std::ofstream out(bad);
    out << "# isccsim power-samples v1\nclass,f_s,trial,P\n0,50,0,0.3\n1,oops,0,0.5\n";
    out.close();
    try {
        read_power_csv(bad);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("window csv export") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "iscc_signal_csv";
    fs::create_directories(dir);
    SyntheticClassSpec spec;
    spec.dc = {0.5, -0.25};
    const auto w = generate_csi(spec, 50.0, 0.32, 3);
    const auto path = dir / "window.csv";
    write_window_csv(w, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# isccsim csi-window v1");
    std::getline(in, line);
    CHECK(line == "m,re,im");
    std::getline(in, line);
    CHECK(line == "0,0.5,-0.25");
}
