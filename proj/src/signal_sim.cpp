#include "iscc/signal_sim.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "iscc/parallel.hpp"
#include "iscc/rng.hpp"

namespace iscc::sim {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 FFT, in place, unnormalized.
class Fft2 {
public:
    explicit Fft2(std::size_t n) : n_(n) {
        rev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
        tw_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
            tw_[k] = {std::cos(ang), std::sin(ang)};
        }
    }

    void forward(cd* x) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (rev_[i] > i) std::swap(x[i], x[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n_ / len;
            for (std::size_t blk = 0; blk < n_; blk += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    const cd w = tw_[j * step];
                    const cd u = x[blk + j];
                    const cd v = x[blk + j + half] * w;
                    x[blk + j] = u + v;
                    x[blk + j + half] = u - v;
                }
            }
        }
    }

private:
    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<cd> tw_;
};

// Chirp phase exp(-i*pi*t^2/n) with the square reduced mod 2n to keep the
// argument small.
cd chirp(std::uint64_t t, std::uint64_t n) {
    const std::uint64_t m = (t * t) % (2 * n);
    const double ang = -kPi * static_cast<double>(m) / static_cast<double>(n);
    return {std::cos(ang), std::sin(ang)};
}

// Unnormalized DFT of arbitrary length: radix-2 when possible, Bluestein
// otherwise.
class Dft {
public:
    explicit Dft(std::size_t n) : n_(n) {
        if (n_ < 1) throw std::invalid_argument("Dft: empty transform");
        if (is_pow2(n_)) {
            fft_ = std::make_unique<Fft2>(n_);
            return;
        }
        m_ = 1;
        while (m_ < 2 * n_ - 1) m_ <<= 1;
        mfft_ = std::make_unique<Fft2>(m_);
        chirp_.resize(n_);
        for (std::size_t t = 0; t < n_; ++t) chirp_[t] = chirp(t, n_);
        std::vector<cd> b(m_, cd{0.0, 0.0});
        b[0] = std::conj(chirp_[0]);
        for (std::size_t t = 1; t < n_; ++t) b[t] = b[m_ - t] = std::conj(chirp_[t]);
        mfft_->forward(b.data());
        bfft_ = std::move(b);
        work_.resize(m_);
    }

    void forward(const cd* in, cd* out) const {
        if (fft_) {
            std::copy(in, in + n_, out);
            fft_->forward(out);
            return;
        }
        std::fill(work_.begin(), work_.end(), cd{0.0, 0.0});
        for (std::size_t t = 0; t < n_; ++t) work_[t] = in[t] * chirp_[t];
        mfft_->forward(work_.data());
        for (std::size_t k = 0; k < m_; ++k) work_[k] = std::conj(work_[k] * bfft_[k]);
        mfft_->forward(work_.data());
        const double inv_m = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = chirp_[k] * std::conj(work_[k]) * inv_m;
    }

private:
    std::size_t n_;
    std::unique_ptr<Fft2> fft_;
    std::size_t m_ = 0;
    std::unique_ptr<Fft2> mfft_;
    std::vector<cd> chirp_;
    std::vector<cd> bfft_;
    mutable std::vector<cd> work_;
};

std::size_t window_sample_count(double f_s, double t_win) {
    if (!(f_s > 0.0) || !(t_win > 0.0))
        throw std::domain_error("csi window: f_s and t_win must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(t_win * f_s));
    if (n < 2) throw std::domain_error("csi window: needs at least 2 samples");
    return n;
}

void generate_into(std::vector<cd>& buf, const SyntheticClassSpec& spec, double f_s, double t_win,
                   std::uint64_t seed) {
    const std::size_t n = window_sample_count(f_s, t_win);
    for (const auto& tone : spec.tones) {
        if (!(tone.freq_hz > 0.0) || tone.freq_hz >= f_s / 2.0)
            throw std::domain_error("generate_csi: tone at or above the Nyquist rate");
    }
    if (spec.noise_sigma2 < 0.0) throw std::domain_error("generate_csi: negative noise power");

    buf.assign(n, spec.dc);
    rng::Xoshiro256pp g(seed);

    const double z = g.normal();
    const double gain =
        spec.amp_jitter > 0.0 ? std::exp(spec.amp_jitter * z - spec.amp_jitter * spec.amp_jitter)
                              : 1.0;

    for (const auto& tone : spec.tones) {
        const double phi = 2.0 * kPi * g.uniform01();
        const double dphi = 2.0 * kPi * tone.freq_hz / f_s;
        cd cur{std::cos(phi), std::sin(phi)};
        const cd rot{std::cos(dphi), std::sin(dphi)};
        const double a = gain * tone.amp;
        for (std::size_t m = 0; m < n; ++m) {
            buf[m] += a * cur;
            cur *= rot;
        }
    }

    if (spec.noise_sigma2 > 0.0) {
        const double s = std::sqrt(spec.noise_sigma2 / 2.0);
        for (std::size_t m = 0; m < n; ++m) buf[m] += cd{s * g.normal(), s * g.normal()};
    }
}

void check_band(double f_lo, double f_hi, double f_s) {
    if (!(f_lo > 0.0) || !(f_lo < f_hi))
        throw std::domain_error("band power: requires 0 < f_lo < f_hi");
    if (!(f_hi < f_s / 2.0)) throw std::domain_error("band power: band exceeds the Nyquist rate");
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

CsiWindow generate_csi(const SyntheticClassSpec& spec, double f_s, double t_win,
                       std::uint64_t seed) {
    CsiWindow w;
    w.f_s = f_s;
    w.t_win = t_win;
    generate_into(w.samples, spec, f_s, t_win, seed);
    return w;
}

std::vector<cd> dft_normalized(std::span<const cd> x) {
    if (x.empty()) throw std::domain_error("dft_normalized: empty input");
    Dft plan(x.size());
    std::vector<cd> out(x.size());
    plan.forward(x.data(), out.data());
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : out) v *= s;
    return out;
}

struct BandPowerMeter::Plan {
    Dft dft;
    explicit Plan(std::size_t n) : dft(n) {}
};

BandPowerMeter::BandPowerMeter(double f_s, double t_win, double f_lo, double f_hi)
    : n_(window_sample_count(f_s, t_win)),
      l_lo_(band_bin_lo(f_lo, t_win)),
      l_hi_(band_bin_hi(f_hi, t_win)),
      spectrum_(n_),
      plan_(std::make_shared<Plan>(n_)) {
    check_band(f_lo, f_hi, f_s);
}

double BandPowerMeter::power(std::span<const cd> samples) const {
    if (samples.size() != n_) throw std::invalid_argument("BandPowerMeter: window length mismatch");
    plan_->dft.forward(samples.data(), spectrum_.data());
    double e = 0.0;
    for (int l = l_lo_; l <= l_hi_; ++l) e += std::norm(spectrum_[static_cast<std::size_t>(l)]);
    const double n = static_cast<double>(n_);
    return e / (n * n);  // the 1/sqrt(N) DFT scaling plus the 1/N power average
}

double highfreq_power(const CsiWindow& w, double f_lo, double f_hi) {
    check_band(f_lo, f_hi, w.f_s);
    BandPowerMeter meter(w.f_s, w.t_win, f_lo, f_hi);
    return meter.power(w.samples);
}

std::vector<double> sample_band_powers(const SyntheticClassSpec& spec,
                                       const sensing::SensingParams& sp, double f_s, int trials,
                                       std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("sample_band_powers: trials must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(trials));
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t shards = std::min<std::size_t>(static_cast<std::size_t>(trials), 4 * hw);
    par::parallel_for(shards, [&](std::size_t shard) {
        BandPowerMeter meter(f_s, sp.t_win, sp.f_lo, sp.f_hi);
        std::vector<cd> buf;
        for (std::size_t t = shard; t < static_cast<std::size_t>(trials); t += shards) {
            generate_into(buf, spec, f_s, sp.t_win, rng::derive_stream(seed, t));
            out[t] = meter.power(buf);
        }
    });
    return out;
}

McRate monte_carlo_rates(const SyntheticClassSpec& spec, const sensing::SensingParams& sp,
                         double f_s, double eta, int trials, std::uint64_t seed) {
    if (trials < 100) throw std::invalid_argument("monte_carlo_rates: trials must be >= 100");
    const auto powers = sample_band_powers(spec, sp, f_s, trials, seed);
    std::size_t wrong = 0;
    for (double p : powers) {
        const bool verdict = detect_action(p, eta);
        if (verdict != spec.is_action) ++wrong;
    }
    const double rate = static_cast<double>(wrong) / static_cast<double>(trials);
    const double se = std::sqrt(std::max(rate * (1.0 - rate), 0.0) / static_cast<double>(trials));
    return {rate, se};
}

sensing::ClassStats fit_class_stats(const std::vector<PowerGroup>& groups,
                                    const sensing::SensingParams& sp) {
    std::vector<double> rates;
    for (const auto& g : groups) {
        if (g.values.size() < 30)
            throw std::invalid_argument("fit_class_stats: needs at least 30 samples per rate");
        if (std::find(rates.begin(), rates.end(), g.f_s) == rates.end()) rates.push_back(g.f_s);
    }
    if (rates.size() < 2)
        throw std::invalid_argument("fit_class_stats: needs at least two distinct sampling rates");

    // Mean model is linear in x = 1/(t_win * f_s): mu = lambda + r * x.
    double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    const double m = static_cast<double>(groups.size());
    std::vector<double> xs(groups.size()), means(groups.size()), vars(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        const double x = 1.0 / (sp.t_win * g.f_s);
        double mu = 0.0;
        for (double v : g.values) mu += v;
        mu /= static_cast<double>(g.values.size());
        double var = 0.0;
        for (double v : g.values) var += (v - mu) * (v - mu);
        var /= static_cast<double>(g.values.size() - 1);
        xs[i] = x;
        means[i] = mu;
        vars[i] = var;
        sx += x;
        sxx += x * x;
        sy += mu;
        sxy += x * mu;
    }
    const double det = m * sxx - sx * sx;
    double r = det != 0.0 ? (m * sxy - sx * sy) / det : 0.0;
    double lambda = (sy - r * sx) / m;
    if (r < 0.0) {
        r = 0.0;
        lambda = sy / m;
    }
    if (lambda < 0.0) {
        lambda = 0.0;
        r = sxx != 0.0 ? sxy / sxx : 0.0;
        r = std::max(r, 0.0);
    }

    double sd2 = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double noise_var = 4.0 * sp.sigma2 * lambda * xs[i] + 2.0 * sp.sigma2 * r * xs[i] * xs[i];
        sd2 += vars[i] - noise_var;
    }
    sd2 = std::max(sd2 / m, 0.0);

    sensing::ClassStats out;
    out.lambda = lambda;
    out.r = r;
    out.sigma_d2 = sd2;
    out.prior = 0.0;
    return out;
}

int band_bin_lo(double f_lo, double t_win) { return static_cast<int>(std::floor(f_lo * t_win)); }

int band_bin_hi(double f_hi, double t_win) { return static_cast<int>(std::ceil(f_hi * t_win)); }

int band_bin_count(const sensing::SensingParams& sp) {
    return band_bin_hi(sp.f_hi, sp.t_win) - band_bin_lo(sp.f_lo, sp.t_win) + 1;
}

SyntheticClassSpec matched_spec(const sensing::ClassStats& target,
                                const sensing::SensingParams& sp, double tone_hz, bool is_action) {
    sensing::validate(target);
    const int n_bins = band_bin_count(sp);
    const double expected_r = 2.0 * sp.sigma2 * n_bins;
    if (std::abs(target.r - expected_r) > 1e-9 * std::max(1.0, expected_r))
        throw std::domain_error(
            "matched_spec: target r must equal 2 * sigma2 * band bin count for this band");

    SyntheticClassSpec spec;
    spec.is_action = is_action;
    spec.noise_sigma2 = target.r / n_bins;
    if (target.lambda > 0.0) {
        const double bin = tone_hz * sp.t_win;
        if (std::abs(bin - std::round(bin)) > 1e-9)
            throw std::domain_error("matched_spec: tone must land on a DFT bin");
        if (tone_hz < sp.f_lo || tone_hz > sp.f_hi)
            throw std::domain_error("matched_spec: tone must lie inside the band");
        spec.tones.push_back({tone_hz, std::sqrt(target.lambda)});
        if (target.sigma_d2 > 0.0) {
            const double ratio = target.sigma_d2 / (target.lambda * target.lambda);
            spec.amp_jitter = 0.5 * std::sqrt(std::log1p(ratio));
        }
    } else if (target.sigma_d2 > 0.0) {
        throw std::domain_error("matched_spec: sigma_d2 needs a nonzero lambda to ride on");
    }
    return spec;
}

void write_power_csv(const std::vector<PowerSample>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write power csv: " + path.string());
    std::string text = "# isccsim power-samples v1\nclass,f_s,trial,P\n";
    for (const auto& row : rows) {
        text += std::to_string(row.class_index);
        text += ',';
        append_double(text, row.f_s);
        text += ',';
        text += std::to_string(row.trial);
        text += ',';
        append_double(text, row.p);
        text += '\n';
    }
    out << text;
}

std::vector<PowerSample> read_power_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open power csv: " + path.string());
    std::vector<PowerSample> rows;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "class,f_s,trial,P")
                throw std::runtime_error("power csv line " + std::to_string(line_no) +
                                         ": unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        PowerSample s{};
        std::istringstream ss(line);
        std::string field;
        try {
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("class");
            s.class_index = std::stoi(field);
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("f_s");
            s.f_s = std::stod(field);
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("trial");
            s.trial = std::stoi(field);
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("P");
            s.p = std::stod(field);
        } catch (const std::exception&) {
            throw std::runtime_error("power csv line " + std::to_string(line_no) +
                                     ": malformed row '" + line + "'");
        }
        rows.push_back(s);
    }
    if (!header_seen) throw std::runtime_error("power csv: missing header row");
    return rows;
}

void write_window_csv(const CsiWindow& w, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write window csv: " + path.string());
    std::string text = "# isccsim csi-window v1\nm,re,im\n";
    for (std::size_t m = 0; m < w.samples.size(); ++m) {
        text += std::to_string(m);
        text += ',';
        append_double(text, w.samples[m].real());
        text += ',';
        append_double(text, w.samples[m].imag());
        text += '\n';
    }
    out << text;
}

}  // namespace iscc::sim
