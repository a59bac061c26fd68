/**
 * Two-point-measurement work statistics for discrete driving protocols.
 *
 * A coherent protocol rotates the Hamiltonian eigenbasis from -sigma_z/2 to
 * sigma_y/2 in N equal steps; each step is thermalize -> measure -> re-prepare
 * -> rotate by pi/(2N) -> measure, and contributes w = e' - e.
 *
 * An incoherent protocol keeps the eigenbasis fixed and ramps the gap
 * linearly from omega_start to omega_end. Each step thermalizes at gap
 * omega_j and then quenches to omega_{j+1}, so the work is +delta/2 from the
 * excited level and -delta/2 from the ground level.
 */

#ifndef QFDR_PROTOCOL_HPP
#define QFDR_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "qfdr/quantum_kernel.hpp"

namespace qfdr {

enum class ProtocolKind { coherent, incoherent };

const char* to_string(ProtocolKind kind);

class ProtocolSpec {
public:
    static ProtocolSpec coherent(int n_steps, const ThermalSpec& thermal);
    /// Gaps are in units of the bare qubit gap and must be positive.
    static ProtocolSpec incoherent(int n_steps, const ThermalSpec& thermal, double omega_start,
                                   double omega_end);

    ProtocolKind kind() const { return kind_; }
    int n_steps() const { return n_steps_; }
    const ThermalSpec& thermal() const { return thermal_; }

    /// Coherent only: total_angle() / n_steps().
    double step_angle() const;
    static constexpr double total_angle() { return 1.5707963267948966; }

    double omega_start() const { return omega_start_; }
    double omega_end() const { return omega_end_; }
    /// Gap before step j (incoherent); omega_start at j = 0, omega_end at j = N.
    double gap_at(int j) const;

    /// Operator norm of H_final - H_initial.
    double norm_delta_h() const;
    double speed() const { return norm_delta_h() / n_steps_; }
    double inverse_speed() const { return n_steps_ / norm_delta_h(); }

private:
    ProtocolSpec(ProtocolKind kind, int n_steps, const ThermalSpec& thermal, double omega_start,
                 double omega_end)
        : kind_(kind), n_steps_(n_steps), thermal_(thermal), omega_start_(omega_start),
          omega_end_(omega_end) {}

    ProtocolKind kind_;
    int n_steps_;
    ThermalSpec thermal_;
    double omega_start_;
    double omega_end_;
};

/// Conditional readout error rates of the second measurement of each TPM.
class SpamModel {
public:
    SpamModel(double p_bright_given_0, double p_dark_given_1);
    static SpamModel ideal() { return {0.0, 0.0}; }

    double p_bright_given_0() const { return p_b0_; }
    double p_dark_given_1() const { return p_d1_; }
    bool is_ideal() const { return p_b0_ == 0.0 && p_d1_ == 0.0; }

private:
    double p_b0_;
    double p_d1_;
};

struct WorkOutcome {
    double work;
    double probability;
};

/// Exact outcome table of a single TPM step.
class StepWorkDistribution {
public:
    enum class Support { coherent, incoherent };

    /// Throws std::domain_error on negative entries or if the probabilities
    /// do not sum to one within 1e-12.
    StepWorkDistribution(Support support, std::vector<WorkOutcome> outcomes);

    Support support_kind() const { return support_; }
    const std::vector<WorkOutcome>& outcomes() const { return outcomes_; }
    /// Total probability mass at work value `w` (exact match).
    double probability_of(double w) const;
    double mean() const;
    double variance() const;

private:
    Support support_;
    std::vector<WorkOutcome> outcomes_;
};

/// sin^2(pi/(4N)): excitation probability of one rotation step from |0>.
double ideal_flip_probability(int n_steps);

/// Table {+1: (1-p) p_f, -1: p p_f, 0: rest} for thermal population p.
StepWorkDistribution tpm_step_distribution(double excited_population, double flip_probability);

StepWorkDistribution coherent_step_distribution(const ProtocolSpec& spec);

/// Throws std::out_of_range unless 0 <= step_index < N.
StepWorkDistribution incoherent_step_distribution(const ProtocolSpec& spec, int step_index);

/// Readout errors mixed into a coherent table using the total P(0) weight:
/// P'(+1) = (1-p_d1) P(+1) + p_b0 P(0), P'(-1) = (1-p_b0) P(-1) + p_d1 P(0).
/// Throws std::invalid_argument for incoherent supports.
StepWorkDistribution apply_spam(const StepWorkDistribution& dist, const SpamModel& spam);

/// Readout errors applied to the second readout conditioned on the first
/// outcome: e = 0 misread as bright with p_b0, e = 1 misread as dark with
/// p_d1. At zero flip probability its cumulants reproduce the closed-form
/// worst-case SPAM correction.
StepWorkDistribution apply_spam_conditioned(double excited_population, double flip_probability,
                                            const SpamModel& spam);

enum class SpamConvention { marginal, conditioned };

/// Aggregate per-step tallies over all N*M TPMs of a sample set.
struct StepCounts {
    std::uint64_t steps = 0;
    std::uint64_t excited_first = 0;  // first readout gave |1>
    std::uint64_t positive = 0;       // w > 0
    std::uint64_t negative = 0;       // w < 0

    std::uint64_t flips() const { return positive + negative; }
    StepCounts& operator+=(const StepCounts& other);
    friend bool operator==(const StepCounts&, const StepCounts&) = default;
};

struct WorkSampleSet {
    ProtocolSpec spec;
    std::optional<SpamModel> spam;
    SpamConvention convention = SpamConvention::marginal;
    /// Coherent: nominal per-step flip probability. Incoherent: unused (0).
    double flip_probability = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> totals;
    StepCounts counts;

    std::size_t runs() const { return totals.size(); }
};

struct SamplingOptions {
    unsigned workers = 1;
    SpamConvention convention = SpamConvention::marginal;
};

/// Draws `runs` independent trajectories. Run r uses the substream
/// (seed, r), so the output is bit-identical for any worker count.
WorkSampleSet sample_work(const ProtocolSpec& spec, const std::optional<SpamModel>& spam,
                          std::size_t runs, std::uint64_t seed,
                          const SamplingOptions& options = {});

/// Coherent-protocol sampling with an explicit per-step flip probability
/// (0 gives the rotation-free readout-only protocol).
WorkSampleSet sample_tpm_work(const ProtocolSpec& spec, double flip_probability,
                              const std::optional<SpamModel>& spam, std::size_t runs,
                              std::uint64_t seed, const SamplingOptions& options = {});

}  // namespace qfdr

#endif  // QFDR_PROTOCOL_HPP
