#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "iscc/sensing_model.hpp"

namespace iscc::sim {

// One subcarrier's CSI samples over a collection window.
struct CsiWindow {
    std::vector<std::complex<double>> samples;
    double f_s = 0.0;
    double t_win = 0.0;
};

struct Tone {
    double freq_hz;
    double amp;
};

// Generator recipe for one recognition class. `amp_jitter` is the log-space
// standard deviation of a per-window amplitude gain (unit mean power), and
// `noise_sigma2` the total per-sample noise power, split evenly over the two
// quadratures.
struct SyntheticClassSpec {
    std::vector<Tone> tones;
    double amp_jitter = 0.0;
    std::complex<double> dc = {0.0, 0.0};
    double noise_sigma2 = 0.0;
    bool is_action = false;
};

// Deterministic window synthesis: dc + gain * tones + circular Gaussian noise.
CsiWindow generate_csi(const SyntheticClassSpec& spec, double f_s, double t_win,
                       std::uint64_t seed);

// Unitary DFT (1/sqrt(N) scaling); Parseval holds exactly under it.
std::vector<std::complex<double>> dft_normalized(std::span<const std::complex<double>> x);

// Band power over positive-frequency bins floor(f_lo*t_win)..ceil(f_hi*t_win).
double highfreq_power(const CsiWindow& w, double f_lo, double f_hi);

// Reusable band-power pipeline for repeated windows at a fixed rate. Not
// thread-safe; give each worker its own meter.
class BandPowerMeter {
public:
    BandPowerMeter(double f_s, double t_win, double f_lo, double f_hi);
    std::size_t window_length() const { return n_; }
    double power(std::span<const std::complex<double>> samples) const;

private:
    std::size_t n_;
    int l_lo_;
    int l_hi_;
    mutable std::vector<std::complex<double>> spectrum_;
    struct Plan;
    std::shared_ptr<const Plan> plan_;
};

// Action verdict: strictly above threshold. Ties count as static.
inline bool detect_action(double p, double eta) { return p > eta; }

// Band-power samples for `trials` independent windows. Trials fan out over
// cores using per-trial derived seeds, so results are schedule-independent.
std::vector<double> sample_band_powers(const SyntheticClassSpec& spec,
                                       const sensing::SensingParams& sp, double f_s, int trials,
                                       std::uint64_t seed);

struct McRate {
    double rate;
    double stderr_;
};

// Empirical detector error rate: miss rate for action specs, false-positive
// rate for static specs, with the binomial standard error.
McRate monte_carlo_rates(const SyntheticClassSpec& spec, const sensing::SensingParams& sp,
                         double f_s, double eta, int trials, std::uint64_t seed);

struct PowerGroup {
    double f_s;
    std::vector<double> values;
};

// Least-squares recovery of (lambda, r) from group means over 1/(t_win*f_s),
// then sigma_d2 from the residual variances. Needs at least two distinct
// rates and 30 samples per group. The returned prior is left at zero.
sensing::ClassStats fit_class_stats(const std::vector<PowerGroup>& groups,
                                    const sensing::SensingParams& sp);

int band_bin_lo(double f_lo, double t_win);
int band_bin_hi(double f_hi, double t_win);
int band_bin_count(const sensing::SensingParams& sp);

// Builds a generator spec whose band-power statistics realize `target` at any
// sampling rate: one on-bin tone carries lambda, log-normal gain jitter
// carries sigma_d2, and the noise floor carries r. Requires the model noise
// to satisfy r = 2 * sigma2 * band_bin_count.
SyntheticClassSpec matched_spec(const sensing::ClassStats& target,
                                const sensing::SensingParams& sp, double tone_hz, bool is_action);

struct PowerSample {
    int class_index;
    double f_s;
    int trial;
    double p;
};

void write_power_csv(const std::vector<PowerSample>& rows, const std::filesystem::path& path);
std::vector<PowerSample> read_power_csv(const std::filesystem::path& path);
void write_window_csv(const CsiWindow& w, const std::filesystem::path& path);

}  // namespace iscc::sim
