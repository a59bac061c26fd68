#include "qfdr/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "qfdr/rng.hpp"

namespace qfdr {

namespace {

constexpr double kNormalizationTolerance = 1e-12;

double excited_population_at_gap(double beta, double gap) {
    const double boltzmann = std::exp(-beta * gap);
    return boltzmann / (1.0 + boltzmann);
}

void require_probability(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in [0, 1]");
    }
}

// One step of a trajectory, flattened for sampling: a uniform u picks +, -
// or the zero-work branch; the first-readout level is then fixed by the
// branch, or drawn with `excited_given_zero` on the zero branch.
struct StepSampler {
    double work_plus = 0.0;
    double work_minus = 0.0;
    double p_plus = 0.0;
    double p_minus = 0.0;
    bool excited_on_plus = false;
    bool excited_on_minus = true;
    double excited_given_zero = 0.0;
};

StepSampler coherent_sampler(double p, const StepWorkDistribution& table, bool conditioned,
                             const SpamModel& spam, double flip) {
    StepSampler s;
    s.work_plus = 1.0;
    s.work_minus = -1.0;
    s.p_plus = table.probability_of(1.0);
    s.p_minus = table.probability_of(-1.0);
    s.excited_on_plus = false;
    s.excited_on_minus = true;
    const double p_zero = table.probability_of(0.0);
    if (p_zero <= 0.0) {
        s.excited_given_zero = 0.0;
    } else if (conditioned) {
        const double reads_bright_from_excited =
            1.0 - ((1.0 - spam.p_bright_given_0()) * flip + spam.p_dark_given_1() * (1.0 - flip));
        s.excited_given_zero = std::clamp(p * reads_bright_from_excited / p_zero, 0.0, 1.0);
    } else {
        // Keeps the first-readout marginal at p whenever the table allows it.
        s.excited_given_zero = std::clamp((p - s.p_minus) / p_zero, 0.0, 1.0);
    }
    return s;
}

std::vector<StepSampler> build_samplers(const ProtocolSpec& spec, double flip,
                                        const std::optional<SpamModel>& spam,
                                        SpamConvention convention) {
    std::vector<StepSampler> samplers;
    if (spec.kind() == ProtocolKind::coherent) {
        const double p = spec.thermal().excited_population();
        const SpamModel model = spam.value_or(SpamModel::ideal());
        const bool conditioned = convention == SpamConvention::conditioned;
        StepWorkDistribution table = tpm_step_distribution(p, flip);
        if (spam) {
            table = conditioned ? apply_spam_conditioned(p, flip, model) : apply_spam(table, model);
        }
        samplers.push_back(coherent_sampler(p, table, conditioned, model, flip));
        return samplers;
    }
    if (spam) {
        throw std::invalid_argument("readout errors are only modelled for coherent protocols");
    }
    const double delta = (spec.omega_end() - spec.omega_start()) / spec.n_steps();
    samplers.reserve(static_cast<std::size_t>(spec.n_steps()));
    for (int j = 0; j < spec.n_steps(); ++j) {
        const double pj = excited_population_at_gap(spec.thermal().beta(), spec.gap_at(j));
        StepSampler s;
        if (delta == 0.0) {
            s.excited_given_zero = pj;
        } else {
            s.work_plus = 0.5 * delta;
            s.work_minus = -0.5 * delta;
            s.excited_on_plus = delta > 0.0;
            s.excited_on_minus = delta < 0.0;
            // Branch "+" is the excited level when delta > 0.
            s.p_plus = delta > 0.0 ? pj : 1.0 - pj;
            s.p_minus = 1.0 - s.p_plus;
        }
        samplers.push_back(s);
    }
    return samplers;
}

struct RunResult {
    double total = 0.0;
    StepCounts counts;
};

RunResult simulate_run(const std::vector<StepSampler>& samplers, int n_steps, std::uint64_t seed,
                       std::uint64_t run_index) {
    Xoshiro256 rng = Xoshiro256::substream(seed, run_index);
    RunResult result;
    result.counts.steps = static_cast<std::uint64_t>(n_steps);
    for (int j = 0; j < n_steps; ++j) {
        const StepSampler& s = samplers.size() == 1 ? samplers.front() : samplers[j];
        const double u = rng.uniform();
        bool excited;
        if (u < s.p_plus) {
            result.total += s.work_plus;
            excited = s.excited_on_plus;
            ++(s.work_plus > 0.0 ? result.counts.positive : result.counts.negative);
        } else if (u < s.p_plus + s.p_minus) {
            result.total += s.work_minus;
            excited = s.excited_on_minus;
            ++(s.work_minus > 0.0 ? result.counts.positive : result.counts.negative);
        } else {
            excited = rng.bernoulli(s.excited_given_zero);
        }
        if (excited) ++result.counts.excited_first;
    }
    return result;
}

WorkSampleSet run_sampling(const ProtocolSpec& spec, double flip,
                           const std::optional<SpamModel>& spam, std::size_t runs,
                           std::uint64_t seed, const SamplingOptions& options) {
    if (runs < 1) throw std::invalid_argument("at least one run is required");
    const auto samplers = build_samplers(spec, flip, spam, options.convention);

    WorkSampleSet out{spec, spam, options.convention, flip, seed, {}, {}};
    out.totals.assign(runs, 0.0);

    const unsigned workers =
        static_cast<unsigned>(std::clamp<std::size_t>(options.workers, 1, runs));
    std::vector<StepCounts> partial(workers);
    auto work = [&](unsigned w) {
        const std::size_t begin = runs * w / workers;
        const std::size_t end = runs * (w + 1) / workers;
        for (std::size_t r = begin; r < end; ++r) {
            const RunResult run = simulate_run(samplers, spec.n_steps(), seed, r);
            out.totals[r] = run.total;
            partial[w] += run.counts;
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (const auto& c : partial) out.counts += c;
    return out;
}

}  // namespace

const char* to_string(ProtocolKind kind) {
    return kind == ProtocolKind::coherent ? "coherent" : "incoherent";
}

// ---------------------------------------------------------------------------
// ProtocolSpec
// ---------------------------------------------------------------------------

ProtocolSpec ProtocolSpec::coherent(int n_steps, const ThermalSpec& thermal) {
    if (n_steps < 1) throw std::domain_error("n_steps must be positive");
    return ProtocolSpec(ProtocolKind::coherent, n_steps, thermal, 1.0, 1.0);
}

ProtocolSpec ProtocolSpec::incoherent(int n_steps, const ThermalSpec& thermal,
                                      double omega_start, double omega_end) {
    if (n_steps < 1) throw std::domain_error("n_steps must be positive");
    if (!(std::isfinite(omega_start) && omega_start > 0.0) ||
        !(std::isfinite(omega_end) && omega_end > 0.0)) {
        throw std::domain_error("gaps must be finite and positive");
    }
    return ProtocolSpec(ProtocolKind::incoherent, n_steps, thermal, omega_start, omega_end);
}

double ProtocolSpec::step_angle() const {
    if (kind_ != ProtocolKind::coherent) {
        throw std::domain_error("step_angle is defined for coherent protocols only");
    }
    return total_angle() / n_steps_;
}

double ProtocolSpec::gap_at(int j) const {
    if (j < 0 || j > n_steps_) throw std::out_of_range("gap index out of range");
    if (j == n_steps_) return omega_end_;
    return omega_start_ + (omega_end_ - omega_start_) * j / n_steps_;
}

double ProtocolSpec::norm_delta_h() const {
    if (kind_ == ProtocolKind::coherent) return std::numbers::sqrt2 / 2.0;
    return 0.5 * std::abs(omega_end_ - omega_start_);
}

// ---------------------------------------------------------------------------
// SpamModel / StepWorkDistribution
// ---------------------------------------------------------------------------

SpamModel::SpamModel(double p_bright_given_0, double p_dark_given_1)
    : p_b0_(p_bright_given_0), p_d1_(p_dark_given_1) {
    if (!(p_b0_ >= 0.0 && p_b0_ < 0.5)) {
        throw std::domain_error("p_bright_given_0 must lie in [0, 0.5)");
    }
    if (!(p_d1_ >= 0.0 && p_d1_ < 0.5)) {
        throw std::domain_error("p_dark_given_1 must lie in [0, 0.5)");
    }
}

StepCounts& StepCounts::operator+=(const StepCounts& other) {
    steps += other.steps;
    excited_first += other.excited_first;
    positive += other.positive;
    negative += other.negative;
    return *this;
}

StepWorkDistribution::StepWorkDistribution(Support support, std::vector<WorkOutcome> outcomes)
    : support_(support), outcomes_(std::move(outcomes)) {
    double total = 0.0;
    for (const auto& o : outcomes_) {
        if (!std::isfinite(o.work) || !(o.probability >= 0.0)) {
            throw std::domain_error("invalid work outcome");
        }
        total += o.probability;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
        throw std::domain_error("step work probabilities do not sum to 1");
    }
}

double StepWorkDistribution::probability_of(double w) const {
    double mass = 0.0;
    for (const auto& o : outcomes_) {
        if (o.work == w) mass += o.probability;
    }
    return mass;
}

double StepWorkDistribution::mean() const {
    double m = 0.0;
    for (const auto& o : outcomes_) m += o.probability * o.work;
    return m;
}

double StepWorkDistribution::variance() const {
    const double m = mean();
    double v = 0.0;
    for (const auto& o : outcomes_) v += o.probability * (o.work - m) * (o.work - m);
    return v;
}

// ---------------------------------------------------------------------------
// Distribution builders
// ---------------------------------------------------------------------------

double ideal_flip_probability(int n_steps) {
    if (n_steps < 1) throw std::domain_error("n_steps must be positive");
    const double s = std::sin(std::numbers::pi / (4.0 * n_steps));
    return s * s;
}

StepWorkDistribution tpm_step_distribution(double excited_population, double flip_probability) {
    require_probability(excited_population, "excited population");
    require_probability(flip_probability, "flip probability");
    const double up = (1.0 - excited_population) * flip_probability;
    const double down = excited_population * flip_probability;
    return StepWorkDistribution(StepWorkDistribution::Support::coherent,
                                {{-1.0, down}, {0.0, 1.0 - flip_probability}, {1.0, up}});
}

StepWorkDistribution coherent_step_distribution(const ProtocolSpec& spec) {
    if (spec.kind() != ProtocolKind::coherent) {
        throw std::domain_error("coherent_step_distribution needs a coherent protocol");
    }
    return tpm_step_distribution(spec.thermal().excited_population(),
                                 ideal_flip_probability(spec.n_steps()));
}

StepWorkDistribution incoherent_step_distribution(const ProtocolSpec& spec, int step_index) {
    if (spec.kind() != ProtocolKind::incoherent) {
        throw std::domain_error("incoherent_step_distribution needs an incoherent protocol");
    }
    if (step_index < 0 || step_index >= spec.n_steps()) {
        throw std::out_of_range("step index " + std::to_string(step_index) + " outside [0, " +
                                std::to_string(spec.n_steps()) + ")");
    }
    const double delta = (spec.omega_end() - spec.omega_start()) / spec.n_steps();
    if (delta == 0.0) {
        return StepWorkDistribution(StepWorkDistribution::Support::incoherent, {{0.0, 1.0}});
    }
    const double pj = excited_population_at_gap(spec.thermal().beta(), spec.gap_at(step_index));
    return StepWorkDistribution(StepWorkDistribution::Support::incoherent,
                                {{-0.5 * delta, 1.0 - pj}, {0.5 * delta, pj}});
}

StepWorkDistribution apply_spam(const StepWorkDistribution& dist, const SpamModel& spam) {
    if (dist.support_kind() != StepWorkDistribution::Support::coherent) {
        throw std::invalid_argument("apply_spam supports coherent {-1, 0, +1} tables only");
    }
    const double up = dist.probability_of(1.0);
    const double down = dist.probability_of(-1.0);
    const double zero = dist.probability_of(0.0);
    const double pb = spam.p_bright_given_0();
    const double pd = spam.p_dark_given_1();
    const double up_new = (1.0 - pd) * up + pb * zero;
    const double down_new = (1.0 - pb) * down + pd * zero;
    return StepWorkDistribution(StepWorkDistribution::Support::coherent,
                                {{-1.0, down_new},
                                 {0.0, std::max(0.0, 1.0 - up_new - down_new)},
                                 {1.0, up_new}});
}

StepWorkDistribution apply_spam_conditioned(double excited_population, double flip_probability,
                                            const SpamModel& spam) {
    require_probability(excited_population, "excited population");
    require_probability(flip_probability, "flip probability");
    const double pb = spam.p_bright_given_0();
    const double pd = spam.p_dark_given_1();
    const double up = (1.0 - excited_population) *
                      ((1.0 - pd) * flip_probability + pb * (1.0 - flip_probability));
    const double down =
        excited_population * ((1.0 - pb) * flip_probability + pd * (1.0 - flip_probability));
    return StepWorkDistribution(
        StepWorkDistribution::Support::coherent,
        {{-1.0, down}, {0.0, std::max(0.0, 1.0 - up - down)}, {1.0, up}});
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

WorkSampleSet sample_work(const ProtocolSpec& spec, const std::optional<SpamModel>& spam,
                          std::size_t runs, std::uint64_t seed, const SamplingOptions& options) {
    const double flip =
        spec.kind() == ProtocolKind::coherent ? ideal_flip_probability(spec.n_steps()) : 0.0;
    return run_sampling(spec, flip, spam, runs, seed, options);
}

WorkSampleSet sample_tpm_work(const ProtocolSpec& spec, double flip_probability,
                              const std::optional<SpamModel>& spam, std::size_t runs,
                              std::uint64_t seed, const SamplingOptions& options) {
    if (spec.kind() != ProtocolKind::coherent) {
        throw std::domain_error("sample_tpm_work needs a coherent protocol");
    }
    require_probability(flip_probability, "flip probability");
    return run_sampling(spec, flip_probability, spam, runs, seed, options);
}

}  // namespace qfdr
