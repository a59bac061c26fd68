/**
 * Closed-form work cumulants and corrections to the classical work
 * fluctuation-dissipation relation (beta/2) Var(W) = <W> - dF.
 *
 * Q = (beta/2) Var(W) - (<W> - dF) measures the excess fluctuations; every
 * quantity is also reported rescaled as N Q / ||dH|| against the inverse
 * driving speed N / ||dH||.
 */

#ifndef QFDR_ANALYTICS_HPP
#define QFDR_ANALYTICS_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qfdr/protocol.hpp"

namespace qfdr {

enum class EstimateSource { analytic, monte_carlo };

const char* to_string(EstimateSource source);

struct FdrEstimate {
    int n_steps = 0;
    double norm_delta_h = 0.0;
    double mean_work = 0.0;
    double var_work = 0.0;
    double beta = 0.0;
    double delta_f = 0.0;
    double q_value = 0.0;
    double rescaled_q = 0.0;
    EstimateSource source = EstimateSource::analytic;

    /// q_value and rescaled_q are derived from the moments, so the FDR
    /// decomposition holds exactly among the stored fields.
    static FdrEstimate from_moments(int n_steps, double norm_delta_h, double mean_work,
                                    double var_work, double beta, double delta_f,
                                    EstimateSource source);

    double inverse_speed() const { return n_steps / norm_delta_h; }
    double dissipated_work() const { return mean_work - delta_f; }
};

enum class Provenance { experiment, coherent_theory, incoherent_sim, spam_bound };

const char* to_string(Provenance provenance);
std::optional<Provenance> provenance_from_string(std::string_view name);

struct SweepPoint {
    double inverse_speed = 0.0;
    double rescaled_q = 0.0;
    Provenance provenance = Provenance::coherent_theory;
};

struct WorkCumulants {
    double mean = 0.0;
    double variance = 0.0;
};

WorkCumulants coherent_cumulants(const ProtocolSpec& spec);

/// Zero for coherent protocols; -(1/beta) ln[cosh(beta w_f/2)/cosh(beta w_0/2)]
/// for incoherent ones, with the beta -> 0 limit taken as 0.
double delta_free_energy(const ProtocolSpec& spec);

FdrEstimate quantum_correction(const ProtocolSpec& spec);

/// Sum of the exact per-step moments along the gap ramp.
FdrEstimate incoherent_correction(const ProtocolSpec& spec);

/// Worst-case spurious correction from readout errors alone (no rotation),
/// using the coherent ||dH|| for the rescaling.
FdrEstimate spam_correction(const ThermalSpec& thermal, const SpamModel& spam, int n_steps);

/// N -> infinity limit of N Q / ||dH|| for the coherent protocol,
/// (pi^2/16) (beta/2 - tanh(beta/2)) sqrt(2).
double coherent_slow_driving_limit(double beta);

std::vector<FdrEstimate> temperature_profile(int n_steps, std::span<const double> betas);

/// Estimate from sampled totals. For coherent samples beta is re-estimated
/// from the first-readout excitation frequency; incoherent samples use the
/// protocol's beta and exact dF.
FdrEstimate monte_carlo_estimate(const WorkSampleSet& samples);

struct SweepOptions {
    double omega_start = 1.0;
    double bin_width = 0.05;
    unsigned workers = 1;
};

struct IncoherentSweep {
    std::vector<SweepPoint> points;
    std::size_t excluded = 0;  // grid entries with ||dH|| = 0
    double bin_width = 0.05;
    /// Supremum of the rescaled correction per inverse-speed bin
    /// [k w, (k+1) w), keyed by k.
    std::map<long, double> boundary;

    /// Supremum in the bin containing `inverse_speed`, if that bin is populated.
    std::optional<double> boundary_at(double inverse_speed) const;
    /// Boundary as plot points at bin centres.
    std::vector<SweepPoint> boundary_points() const;
};

IncoherentSweep incoherent_region_sweep(double beta, std::span<const double> omega_f_grid,
                                        std::span<const int> n_grid,
                                        const SweepOptions& options = {});

/// 200 log-spaced final gaps in [0.05, 20].
std::vector<double> default_omega_f_grid();
/// N = 1..200.
std::vector<int> default_n_grid();

}  // namespace qfdr

#endif  // QFDR_ANALYTICS_HPP
