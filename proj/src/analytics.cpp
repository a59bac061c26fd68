#include "qfdr/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace qfdr {

namespace {

// ln cosh(x) without overflow for large |x| or cancellation for small |x|.
double log_cosh(double x) {
    x = std::abs(x);
    if (x < 0.5) {
        const double s = std::sinh(0.5 * x);
        return std::log1p(2.0 * s * s);
    }
    return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
}

double excited_population_at_gap(double beta, double gap) {
    const double boltzmann = std::exp(-beta * gap);
    return boltzmann / (1.0 + boltzmann);
}

void require_kind(const ProtocolSpec& spec, ProtocolKind kind, const char* what) {
    if (spec.kind() != kind) {
        throw std::domain_error(std::string(what) + " needs a " + to_string(kind) + " protocol");
    }
}

}  // namespace

const char* to_string(EstimateSource source) {
    return source == EstimateSource::analytic ? "analytic" : "monte_carlo";
}

const char* to_string(Provenance provenance) {
    switch (provenance) {
        case Provenance::experiment: return "experiment";
        case Provenance::coherent_theory: return "coherent_theory";
        case Provenance::incoherent_sim: return "incoherent_sim";
        case Provenance::spam_bound: return "spam_bound";
    }
    return "unknown";
}

std::optional<Provenance> provenance_from_string(std::string_view name) {
    for (auto p : {Provenance::experiment, Provenance::coherent_theory,
                   Provenance::incoherent_sim, Provenance::spam_bound}) {
        if (name == to_string(p)) return p;
    }
    return std::nullopt;
}

FdrEstimate FdrEstimate::from_moments(int n_steps, double norm_delta_h, double mean_work,
                                      double var_work, double beta, double delta_f,
                                      EstimateSource source) {
    FdrEstimate e;
    e.n_steps = n_steps;
    e.norm_delta_h = norm_delta_h;
    e.mean_work = mean_work;
    e.var_work = var_work;
    e.beta = beta;
    e.delta_f = delta_f;
    e.q_value = 0.5 * beta * var_work - (mean_work - delta_f);
    e.rescaled_q = norm_delta_h > 0.0 ? n_steps * e.q_value / norm_delta_h : 0.0;
    e.source = source;
    return e;
}

WorkCumulants coherent_cumulants(const ProtocolSpec& spec) {
    require_kind(spec, ProtocolKind::coherent, "coherent_cumulants");
    const double n = spec.n_steps();
    const double flip = ideal_flip_probability(spec.n_steps());
    const double polarization = spec.thermal().polarization();
    return {n * polarization * flip,
            n * flip * (1.0 - flip * polarization * polarization)};
}

double delta_free_energy(const ProtocolSpec& spec) {
    if (spec.kind() == ProtocolKind::coherent) return 0.0;
    const double beta = spec.thermal().beta();
    if (beta == 0.0) return 0.0;
    return -(log_cosh(0.5 * beta * spec.omega_end()) - log_cosh(0.5 * beta * spec.omega_start())) /
           beta;
}

FdrEstimate quantum_correction(const ProtocolSpec& spec) {
    require_kind(spec, ProtocolKind::coherent, "quantum_correction");
    const auto [mean, var] = coherent_cumulants(spec);
    return FdrEstimate::from_moments(spec.n_steps(), spec.norm_delta_h(), mean, var,
                                     spec.thermal().beta(), 0.0, EstimateSource::analytic);
}

FdrEstimate incoherent_correction(const ProtocolSpec& spec) {
    require_kind(spec, ProtocolKind::incoherent, "incoherent_correction");
    const double beta = spec.thermal().beta();
    const double delta = (spec.omega_end() - spec.omega_start()) / spec.n_steps();
    double mean = 0.0;
    double var = 0.0;
    for (int j = 0; j < spec.n_steps(); ++j) {
        const double pj = excited_population_at_gap(beta, spec.gap_at(j));
        mean += 0.5 * delta * (2.0 * pj - 1.0);
        var += delta * delta * pj * (1.0 - pj);
    }
    return FdrEstimate::from_moments(spec.n_steps(), spec.norm_delta_h(), mean, var, beta,
                                     delta_free_energy(spec), EstimateSource::analytic);
}

FdrEstimate spam_correction(const ThermalSpec& thermal, const SpamModel& spam, int n_steps) {
    if (n_steps < 1) throw std::domain_error("n_steps must be positive");
    const double p = thermal.excited_population();
    const double pb = spam.p_bright_given_0();
    const double pd = spam.p_dark_given_1();
    // Readout-only step: +1 when |0> reads bright, -1 when |1> reads dark.
    const double up = (1.0 - p) * pb;
    const double down = p * pd;
    const double step_mean = up - down;
    const double step_var = up + down - step_mean * step_mean;
    return FdrEstimate::from_moments(n_steps, std::numbers::sqrt2 / 2.0, n_steps * step_mean,
                                     n_steps * step_var, thermal.beta(), 0.0,
                                     EstimateSource::analytic);
}

double coherent_slow_driving_limit(double beta) {
    return std::numbers::pi * std::numbers::pi / 16.0 * (0.5 * beta - std::tanh(0.5 * beta)) *
           std::numbers::sqrt2;
}

std::vector<FdrEstimate> temperature_profile(int n_steps, std::span<const double> betas) {
    std::vector<FdrEstimate> out;
    out.reserve(betas.size());
    for (double beta : betas) {
        out.push_back(quantum_correction(ProtocolSpec::coherent(n_steps, ThermalSpec::from_beta(beta))));
    }
    return out;
}

FdrEstimate monte_carlo_estimate(const WorkSampleSet& samples) {
    const auto& totals = samples.totals;
    if (totals.empty()) throw std::invalid_argument("empty sample set");
    const double m = static_cast<double>(totals.size());
    double mean = 0.0;
    for (double w : totals) mean += w;
    mean /= m;
    double ss = 0.0;
    for (double w : totals) ss += (w - mean) * (w - mean);
    const double var = totals.size() > 1 ? ss / (m - 1.0) : 0.0;

    const ProtocolSpec& spec = samples.spec;
    double beta = spec.thermal().beta();
    double delta_f = 0.0;
    if (spec.kind() == ProtocolKind::coherent) {
        const double p_hat = static_cast<double>(samples.counts.excited_first) /
                             static_cast<double>(samples.counts.steps);
        beta = population_to_beta(p_hat);
    } else {
        delta_f = delta_free_energy(spec);
    }
    return FdrEstimate::from_moments(spec.n_steps(), spec.norm_delta_h(), mean, var, beta,
                                     delta_f, EstimateSource::monte_carlo);
}

// ---------------------------------------------------------------------------
// Incoherent sweep
// ---------------------------------------------------------------------------

std::optional<double> IncoherentSweep::boundary_at(double inverse_speed) const {
    const auto bin = static_cast<long>(std::floor(inverse_speed / bin_width));
    if (auto it = boundary.find(bin); it != boundary.end()) return it->second;
    return std::nullopt;
}

std::vector<SweepPoint> IncoherentSweep::boundary_points() const {
    std::vector<SweepPoint> out;
    out.reserve(boundary.size());
    for (const auto& [bin, sup] : boundary) {
        out.push_back({(static_cast<double>(bin) + 0.5) * bin_width, sup, Provenance::incoherent_sim});
    }
    return out;
}

IncoherentSweep incoherent_region_sweep(double beta, std::span<const double> omega_f_grid,
                                        std::span<const int> n_grid,
                                        const SweepOptions& options) {
    if (omega_f_grid.empty() || n_grid.empty()) {
        throw std::invalid_argument("sweep grids must be non-empty");
    }
    if (!(options.bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    const ThermalSpec thermal = ThermalSpec::from_beta(beta);

    struct Chunk {
        std::vector<SweepPoint> points;
        std::size_t excluded = 0;
    };
    const std::size_t rows = omega_f_grid.size();
    const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(options.workers, 1, rows));
    std::vector<Chunk> chunks(workers);

    auto work = [&](unsigned w) {
        Chunk& chunk = chunks[w];
        for (std::size_t i = rows * w / workers; i < rows * (w + 1) / workers; ++i) {
            const double omega_f = omega_f_grid[i];
            for (int n : n_grid) {
                const auto spec = ProtocolSpec::incoherent(n, thermal, options.omega_start, omega_f);
                if (spec.norm_delta_h() == 0.0) {
                    ++chunk.excluded;
                    continue;
                }
                const FdrEstimate est = incoherent_correction(spec);
                chunk.points.push_back({est.inverse_speed(), est.rescaled_q, Provenance::incoherent_sim});
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    IncoherentSweep sweep;
    sweep.bin_width = options.bin_width;
    for (auto& chunk : chunks) {
        sweep.excluded += chunk.excluded;
        for (const auto& pt : chunk.points) {
            const auto bin = static_cast<long>(std::floor(pt.inverse_speed / options.bin_width));
            auto [it, inserted] = sweep.boundary.try_emplace(bin, pt.rescaled_q);
            if (!inserted) it->second = std::max(it->second, pt.rescaled_q);
        }
        sweep.points.insert(sweep.points.end(), chunk.points.begin(), chunk.points.end());
    }
    return sweep;
}

std::vector<double> default_omega_f_grid() {
    constexpr int kPoints = 200;
    const double lo = std::log(0.05);
    const double hi = std::log(20.0);
    std::vector<double> grid(kPoints);
    for (int i = 0; i < kPoints; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
    return grid;
}

std::vector<int> default_n_grid() {
    std::vector<int> grid(200);
    for (int i = 0; i < 200; ++i) grid[i] = i + 1;
    return grid;
}

}  // namespace qfdr
