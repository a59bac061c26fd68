#include "qfdr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "qfdr/rng.hpp"

namespace qfdr {

namespace {

double sample_stddev(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (values.size() - 1));
}

struct Resample {
    double q = 0.0;
    double beta = 0.0;
};

Resample one_resample(const BootstrapRequest& req, std::uint64_t index) {
    Xoshiro256 rng = Xoshiro256::substream(req.seed, index);
    std::uint64_t excited = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t run = 0; run < req.runs; ++run) {
        long total = 0;
        for (int step = 0; step < req.n_steps; ++step) {
            const bool e = rng.bernoulli(req.excited_population);
            const bool flipped = rng.bernoulli(req.flip_probability);
            excited += e ? 1 : 0;
            if (flipped) total += e ? -1 : 1;
        }
        sum += static_cast<double>(total);
        sum_sq += static_cast<double>(total) * static_cast<double>(total);
    }
    const double m = static_cast<double>(req.runs);
    const double mean = sum / m;
    const double var = req.runs > 1 ? (sum_sq - m * mean * mean) / (m - 1.0) : 0.0;
    const double p_hat = static_cast<double>(excited) / (m * req.n_steps);
    const double beta = population_to_beta(p_hat);
    return {0.5 * beta * var - mean, beta};
}

}  // namespace

double binomial_error(double p_hat, std::uint64_t trials) {
    if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw std::domain_error("p_hat must lie in [0, 1]");
    if (trials < 1) throw std::domain_error("trials must be positive");
    return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

double beta_error(double p_hat, std::uint64_t trials) {
    if (!(p_hat > 0.0 && p_hat < 0.5)) {
        throw std::domain_error("beta_error requires 0 < p_hat < 1/2");
    }
    return binomial_error(p_hat, trials) / (p_hat * (1.0 - p_hat));
}

BootstrapReport bootstrap_q(const BootstrapRequest& req) {
    if (req.resamples < 2) throw std::invalid_argument("bootstrap needs at least 2 resamples");
    if (req.runs < 1 || req.n_steps < 1) throw std::invalid_argument("empty bootstrap data set");

    std::vector<Resample> results(req.resamples);
    const unsigned workers =
        static_cast<unsigned>(std::clamp<std::size_t>(req.workers, 1, req.resamples));
    auto work = [&](unsigned w) {
        for (std::size_t r = req.resamples * w / workers; r < req.resamples * (w + 1) / workers; ++r) {
            results[r] = one_resample(req, r);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    BootstrapReport report;
    report.resamples = req.resamples;
    report.n_steps = req.n_steps;
    report.rescale = req.n_steps / (std::sqrt(2.0) / 2.0);
    for (const auto& r : results) {
        report.q_values.push_back(r.q);
        report.beta_values.push_back(r.beta);
    }
    report.mean_q = std::accumulate(report.q_values.begin(), report.q_values.end(), 0.0) /
                    static_cast<double>(report.resamples);
    report.sigma_q = sample_stddev(report.q_values);
    report.sigma_beta = sample_stddev(report.beta_values);
    return report;
}

BootstrapReport bootstrap_q(const ThermalSpec& thermal, int n_steps, std::size_t runs,
                            std::size_t resamples, std::uint64_t seed, unsigned workers) {
    BootstrapRequest req;
    req.excited_population = thermal.excited_population();
    req.flip_probability = ideal_flip_probability(n_steps);
    req.n_steps = n_steps;
    req.runs = runs;
    req.resamples = resamples;
    req.seed = seed;
    req.workers = workers;
    return bootstrap_q(req);
}

SigmaDistance sigma_distance(const SweepPoint& point, double sigma_stat, double reference_value,
                             ReferenceKind reference) {
    if (!(sigma_stat > 0.0)) throw std::domain_error("sigma_stat must be positive");
    SigmaDistance d;
    d.point = point;
    d.reference = reference;
    d.reference_value = reference_value;
    d.sigma_stat = sigma_stat;
    d.distance_sigma = (point.rescaled_q - reference_value) / sigma_stat;
    return d;
}

DriftReport drift_scan(std::span<const std::uint8_t> outcomes, std::size_t bin_size,
                       double threshold) {
    if (bin_size < 1 || outcomes.size() < 2 * bin_size) {
        throw std::domain_error("drift_scan needs at least two full bins");
    }
    DriftReport report;
    report.bin_size = bin_size;
    report.bins = outcomes.size() / bin_size;
    std::vector<double> freq(report.bins);
    for (std::size_t b = 0; b < report.bins; ++b) {
        const auto first = outcomes.begin() + static_cast<std::ptrdiff_t>(b * bin_size);
        const auto hits = std::count_if(first, first + static_cast<std::ptrdiff_t>(bin_size),
                                        [](std::uint8_t v) { return v != 0; });
        freq[b] = static_cast<double>(hits) / static_cast<double>(bin_size);
    }
    report.mean_frequency = std::accumulate(freq.begin(), freq.end(), 0.0) / report.bins;
    report.observed_spread = sample_stddev(freq);
    report.binomial_spread = binomial_error(report.mean_frequency, bin_size);
    const double excess_sq = report.observed_spread * report.observed_spread -
                             report.binomial_spread * report.binomial_spread;
    report.excess_spread = std::sqrt(std::max(0.0, excess_sq));
    report.drift_detected = report.excess_spread >= threshold;
    return report;
}

CalibrationResult calibrate_rotation_time(std::span<const CalibrationSample> samples,
                                          double target_theta, double max_window) {
    if (samples.size() < 2) throw FitError("calibration needs at least two samples");
    const auto [lo, hi] = std::minmax_element(
        samples.begin(), samples.end(),
        [](const auto& a, const auto& b) { return a.duration < b.duration; });
    if (hi->duration - lo->duration > max_window * (1.0 + 1e-9)) {
        throw std::domain_error("calibration window exceeds the linearised regime");
    }
    const double n = static_cast<double>(samples.size());
    double x_mean = 0.0;
    double y_mean = 0.0;
    for (const auto& s : samples) {
        x_mean += s.duration;
        y_mean += s.bright_probability;
    }
    x_mean /= n;
    y_mean /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : samples) {
        sxx += (s.duration - x_mean) * (s.duration - x_mean);
        sxy += (s.duration - x_mean) * (s.bright_probability - y_mean);
    }
    if (sxx <= 0.0) throw FitError("all calibration durations are equal");
    CalibrationResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    if (fit.slope == 0.0) throw FitError("fitted slope is zero");

    const double half = std::sin(0.5 * target_theta);
    const double target = half * half;
    fit.duration = x_mean + (target - y_mean) / fit.slope;

    // Delta-method error of the crossing point, per-sample variance from the
    // shot count when known and from the residuals otherwise.
    const bool known_shots = std::all_of(samples.begin(), samples.end(),
                                         [](const auto& s) { return s.shots > 0; });
    double residual_var = 0.0;
    if (!known_shots && samples.size() > 2) {
        double rss = 0.0;
        for (const auto& s : samples) {
            const double r = s.bright_probability - (fit.intercept + fit.slope * s.duration);
            rss += r * r;
        }
        residual_var = rss / (n - 2.0);
    }
    double var_t = 0.0;
    for (const auto& s : samples) {
        double var_y = residual_var;
        if (known_shots) {
            const double pred = std::clamp(fit.intercept + fit.slope * s.duration, 0.0, 1.0);
            var_y = pred * (1.0 - pred) / static_cast<double>(s.shots);
        }
        const double c = (s.duration - x_mean) / sxx;
        const double g = -1.0 / (n * fit.slope) - (fit.duration - x_mean) * c / fit.slope;
        var_t += g * g * var_y;
    }
    fit.standard_error = std::sqrt(var_t);
    return fit;
}

std::vector<CalibrationSample> synthetic_calibration_scan(double rabi_frequency, double centre,
                                                          double window, int points,
                                                          std::uint64_t shots,
                                                          std::uint64_t seed) {
    if (points < 2) throw std::invalid_argument("a scan needs at least two points");
    std::vector<CalibrationSample> scan;
    scan.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double t = centre - 0.5 * window + window * i / (points - 1);
        const double s = std::sin(0.5 * rabi_frequency * t);
        const double truth = s * s;
        double estimate = truth;
        if (shots > 0) {
            Xoshiro256 rng = Xoshiro256::substream(seed, static_cast<std::uint64_t>(i));
            std::uint64_t bright = 0;
            for (std::uint64_t k = 0; k < shots; ++k) bright += rng.bernoulli(truth) ? 1 : 0;
            estimate = static_cast<double>(bright) / static_cast<double>(shots);
        }
        scan.push_back({t, estimate, shots});
    }
    return scan;
}

}  // namespace qfdr
