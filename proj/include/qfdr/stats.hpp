/**
 * Error analysis: binomial parameter errors, parametric bootstrap of Q,
 * sigma distances to classical reference regions, drift binning, and
 * rotation-time calibration by linear regression.
 */

#ifndef QFDR_STATS_HPP
#define QFDR_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "qfdr/analytics.hpp"

namespace qfdr {

/// sqrt(p (1 - p) / trials).
double binomial_error(double p_hat, std::uint64_t trials);

/// |d beta / d p| * binomial_error = binomial_error / (p (1 - p)).
double beta_error(double p_hat, std::uint64_t trials);

struct BootstrapRequest {
    double excited_population = 0.0;
    double flip_probability = 0.0;
    int n_steps = 1;
    std::size_t runs = 8000;
    std::size_t resamples = 200;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct BootstrapReport {
    std::size_t resamples = 0;
    int n_steps = 0;
    /// One Q per synthetic data set, in resample order.
    std::vector<double> q_values;
    std::vector<double> beta_values;
    double mean_q = 0.0;
    double sigma_q = 0.0;
    double sigma_beta = 0.0;
    /// N / ||dH|| of the coherent protocol.
    double rescale = 0.0;

    double sigma_rescaled() const { return sigma_q * rescale; }
    double mean_rescaled() const { return mean_q * rescale; }
};

/// Generates `resamples` data sets of N*M independent TPMs (first readout
/// excited with probability p, flipped with probability p_f), groups them
/// into M runs, and re-evaluates beta, <W>, Var(W) and Q on each. Resample r
/// uses the substream (seed, r).
BootstrapReport bootstrap_q(const BootstrapRequest& request);

/// Coherent protocol at the ideal flip probability sin^2(pi/(4N)).
BootstrapReport bootstrap_q(const ThermalSpec& thermal, int n_steps, std::size_t runs,
                            std::size_t resamples, std::uint64_t seed, unsigned workers = 1);

enum class ReferenceKind { incoherent_boundary, spam_boundary };

struct SigmaDistance {
    SweepPoint point;
    ReferenceKind reference = ReferenceKind::incoherent_boundary;
    double reference_value = 0.0;
    double sigma_stat = 0.0;
    double distance_sigma = 0.0;

    bool certified(double threshold = 10.0) const { return distance_sigma >= threshold; }
};

/// (point.rescaled_q - reference_value) / sigma_stat; throws
/// std::domain_error unless sigma_stat > 0.
SigmaDistance sigma_distance(const SweepPoint& point, double sigma_stat, double reference_value,
                             ReferenceKind reference = ReferenceKind::incoherent_boundary);

struct DriftReport {
    std::size_t bins = 0;
    std::size_t bin_size = 0;
    double mean_frequency = 0.0;
    double observed_spread = 0.0;  // sample std-dev of per-bin frequencies
    double binomial_spread = 0.0;  // expected from counting statistics alone
    double excess_spread = 0.0;    // sqrt(max(0, observed^2 - binomial^2))
    bool drift_detected = false;
};

/// Bins a 0/1 outcome sequence into floor(len/K) bins of size K and compares
/// the spread of per-bin frequencies to the binomial expectation.
/// Throws std::domain_error if the sequence is shorter than 2K.
DriftReport drift_scan(std::span<const std::uint8_t> outcomes, std::size_t bin_size,
                       double threshold = 0.01);

struct CalibrationSample {
    double duration = 0.0;
    double bright_probability = 0.0;
    /// Shots behind bright_probability; 0 means unknown (residual-based errors).
    std::uint64_t shots = 0;
};

struct CalibrationResult {
    double duration = 0.0;
    double standard_error = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares line through (duration, P_bright) and the duration at which
/// it reaches sin^2(target_theta / 2). Samples must span at most
/// `max_window` in duration (the linearised regime); a degenerate design
/// throws FitError.
CalibrationResult calibrate_rotation_time(std::span<const CalibrationSample> samples,
                                          double target_theta, double max_window = 0.2);

/// Synthetic Rabi-flop scan: `points` equally spaced durations across
/// [centre - window/2, centre + window/2], each estimated from `shots`
/// binomial draws of sin^2(rabi t / 2). shots = 0 gives noiseless samples.
std::vector<CalibrationSample> synthetic_calibration_scan(double rabi_frequency, double centre,
                                                          double window, int points,
                                                          std::uint64_t shots,
                                                          std::uint64_t seed);

}  // namespace qfdr

#endif  // QFDR_STATS_HPP
