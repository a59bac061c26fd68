#include "qfdr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "qfdr/analytics.hpp"
#include "qfdr/reference_points_data.hpp"
#include "qfdr/rng.hpp"
#include "qfdr/stats.hpp"

namespace qfdr {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        parts.push_back(trim(s.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

[[noreturn]] void reject(std::string_view key, int line, const std::string& why) {
    throw ParseError(std::string(key), line, why);
}

double to_double(std::string_view key, std::string_view v, int line) {
    const std::string buf(v);
    char* end = nullptr;
    const double d = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(d)) {
        reject(key, line, "expected a finite number, got '" + buf + "'");
    }
    return d;
}

std::int64_t to_int(std::string_view key, std::string_view v, int line) {
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        reject(key, line, "expected an integer, got '" + std::string(v) + "'");
    }
    return i;
}

std::uint64_t to_count(std::string_view key, std::string_view v, int line, std::uint64_t min) {
    const std::int64_t i = to_int(key, v, line);
    if (i < static_cast<std::int64_t>(min)) {
        reject(key, line, "must be at least " + std::to_string(min));
    }
    return static_cast<std::uint64_t>(i);
}

bool to_bool(std::string_view key, std::string_view v, int line) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    reject(key, line, "expected a boolean, got '" + std::string(v) + "'");
}

double probability_in(std::string_view key, std::string_view v, int line, double hi) {
    const double d = to_double(key, v, line);
    if (!(d >= 0.0 && d < hi)) reject(key, line, "must lie in [0, " + format_cell(hi) + ")");
    return d;
}

double positive(std::string_view key, std::string_view v, int line) {
    const double d = to_double(key, v, line);
    if (!(d > 0.0)) reject(key, line, "must be positive");
    return d;
}

std::vector<int> to_int_list(std::string_view key, std::string_view v, int line) {
    std::vector<int> out;
    for (auto part : split_list(v)) {
        if (const auto dots = part.find(".."); dots != std::string_view::npos) {
            const auto lo = to_int(key, trim(part.substr(0, dots)), line);
            const auto hi = to_int(key, trim(part.substr(dots + 2)), line);
            if (hi < lo) reject(key, line, "empty range '" + std::string(part) + "'");
            for (auto i = lo; i <= hi; ++i) out.push_back(static_cast<int>(i));
        } else {
            out.push_back(static_cast<int>(to_int(key, part, line)));
        }
    }
    for (int n : out) {
        if (n < 1) reject(key, line, "step counts must be positive");
    }
    return out;
}

std::vector<double> to_double_list(std::string_view key, std::string_view v, int line) {
    std::vector<double> out;
    for (auto part : split_list(v)) out.push_back(to_double(key, part, line));
    return out;
}

std::uint64_t job_seed(std::uint64_t seed, int n_steps) {
    return splitmix64(seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(n_steps)));
}

SpamModel spam_of(const RunConfig& c) { return SpamModel(c.spam_b0, c.spam_d1); }

// Step count behind an experimental inverse speed of the coherent protocol.
int coherent_steps_for(double inverse_speed) {
    return std::max(1, static_cast<int>(std::lround(inverse_speed / std::numbers::sqrt2)));
}

IncoherentSweep run_sweep(const RunConfig& c) {
    std::vector<double> omegas(static_cast<std::size_t>(c.omega_f_points));
    const double lo = std::log(c.omega_f_min);
    const double hi = std::log(c.omega_f_max);
    for (int i = 0; i < c.omega_f_points; ++i) {
        omegas[i] = c.omega_f_points == 1 ? c.omega_f_min
                                          : std::exp(lo + (hi - lo) * i / (c.omega_f_points - 1));
    }
    std::vector<int> ns(static_cast<std::size_t>(c.n_max));
    for (int i = 0; i < c.n_max; ++i) ns[i] = i + 1;
    SweepOptions opts;
    opts.omega_start = c.omega_start;
    opts.bin_width = c.bin_width;
    opts.workers = c.workers;
    return incoherent_region_sweep(c.beta, omegas, ns, opts);
}

double cell_number(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
    throw FormatError("expected a numeric cell");
}

std::vector<Cell> estimate_row(const FdrEstimate& e) {
    return {static_cast<std::int64_t>(e.n_steps), e.inverse_speed(), e.mean_work, e.var_work,
            e.beta, e.delta_f, e.q_value, e.rescaled_q, std::string(to_string(e.source))};
}

const std::vector<std::string> kEstimateColumns{"n_steps",  "v_inv",   "mean_work",
                                                "var_work", "beta",    "delta_f",
                                                "q_value",  "nq_rescaled", "source"};

Table simulate_tables(const RunConfig& c, std::vector<WorkSampleSet>& sample_sets) {
    Table table;
    table.columns = kEstimateColumns;
    table.columns.insert(table.columns.end(), {"sigma_nq", "analytic_nq"});
    SamplingOptions opts;
    opts.workers = c.workers;
    opts.convention = c.spam_convention;
    const std::optional<SpamModel> spam =
        c.spam_samples ? std::optional<SpamModel>(spam_of(c)) : std::nullopt;
    for (const auto& spec : plan_jobs(c)) {
        const std::uint64_t seed = job_seed(c.seed, spec.n_steps());
        WorkSampleSet samples = sample_work(spec, spam, c.runs, seed, opts);
        const FdrEstimate est = monte_carlo_estimate(samples);
        double sigma = std::numeric_limits<double>::quiet_NaN();
        double analytic = 0.0;
        if (spec.kind() == ProtocolKind::coherent) {
            const double steps = static_cast<double>(samples.counts.steps);
            BootstrapRequest req;
            req.excited_population = samples.counts.excited_first / steps;
            req.flip_probability = samples.counts.flips() / steps;
            req.n_steps = spec.n_steps();
            req.runs = c.runs;
            req.resamples = c.resamples;
            req.seed = splitmix64(seed);
            req.workers = c.workers;
            sigma = bootstrap_q(req).sigma_rescaled();
            analytic = quantum_correction(spec).rescaled_q;
        } else {
            analytic = incoherent_correction(spec).rescaled_q;
        }
        auto row = estimate_row(est);
        row.insert(row.end(), {sigma, analytic});
        table.add_row(std::move(row));
        sample_sets.push_back(std::move(samples));
    }
    return table;
}

}  // namespace

const char* to_string(Command command) {
    switch (command) {
        case Command::simulate: return "simulate";
        case Command::analytic: return "analytic";
        case Command::sweep: return "sweep";
        case Command::certify: return "certify";
        case Command::temperature_profile: return "temperature-profile";
        case Command::calibrate: return "calibrate";
    }
    return "unknown";
}

ParseError::ParseError(std::string key, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         "'" + key + "': " + message),
      key_(std::move(key)), line_(line) {}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "command",       "kind",         "n_steps",      "beta",         "omega_start",
        "omega_end",     "spam_b0",      "spam_d1",      "spam_samples", "spam_convention",
        "runs",          "resamples",    "seed",         "workers",      "betas",
        "omega_f_min",   "omega_f_max",  "omega_f_points", "n_max",      "bin_width",
        "theory_n_max",  "v_inv_max",    "threshold",    "points",       "rabi_frequency",
        "target_theta",  "window",       "scan_points",  "shots",        "output",
        "format"};
    return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw, int line) {
    const std::string_view v = trim(raw);
    if (key == "command") {
        static const std::map<std::string_view, Command> commands{
            {"simulate", Command::simulate},   {"analytic", Command::analytic},
            {"sweep", Command::sweep},         {"certify", Command::certify},
            {"temperature-profile", Command::temperature_profile},
            {"calibrate", Command::calibrate}};
        const auto it = commands.find(v);
        if (it == commands.end()) reject(key, line, "unknown command '" + std::string(v) + "'");
        c.command = it->second;
        c.command_set = true;
    } else if (key == "kind") {
        if (v == "coherent") c.kind = ProtocolKind::coherent;
        else if (v == "incoherent") c.kind = ProtocolKind::incoherent;
        else reject(key, line, "expected coherent or incoherent");
    } else if (key == "n_steps") {
        c.n_steps = to_int_list(key, v, line);
    } else if (key == "beta") {
        c.beta = to_double(key, v, line);
        if (c.beta < 0.0) reject(key, line, "beta must be non-negative");
    } else if (key == "omega_start") {
        c.omega_start = positive(key, v, line);
    } else if (key == "omega_end") {
        c.omega_end = positive(key, v, line);
    } else if (key == "spam_b0") {
        c.spam_b0 = probability_in(key, v, line, 0.5);
    } else if (key == "spam_d1") {
        c.spam_d1 = probability_in(key, v, line, 0.5);
    } else if (key == "spam_samples") {
        c.spam_samples = to_bool(key, v, line);
    } else if (key == "spam_convention") {
        if (v == "marginal") c.spam_convention = SpamConvention::marginal;
        else if (v == "conditioned") c.spam_convention = SpamConvention::conditioned;
        else reject(key, line, "expected marginal or conditioned");
    } else if (key == "runs") {
        c.runs = to_count(key, v, line, 1);
    } else if (key == "resamples") {
        c.resamples = to_count(key, v, line, 2);
    } else if (key == "seed") {
        c.seed = to_count(key, v, line, 0);
    } else if (key == "workers") {
        c.workers = static_cast<unsigned>(to_count(key, v, line, 1));
    } else if (key == "betas") {
        c.betas = to_double_list(key, v, line);
        for (double b : c.betas) {
            if (b < 0.0) reject(key, line, "inverse temperatures must be non-negative");
        }
    } else if (key == "omega_f_min") {
        c.omega_f_min = positive(key, v, line);
    } else if (key == "omega_f_max") {
        c.omega_f_max = positive(key, v, line);
    } else if (key == "omega_f_points") {
        c.omega_f_points = static_cast<int>(to_count(key, v, line, 1));
    } else if (key == "n_max") {
        c.n_max = static_cast<int>(to_count(key, v, line, 1));
    } else if (key == "bin_width") {
        c.bin_width = positive(key, v, line);
    } else if (key == "theory_n_max") {
        c.theory_n_max = static_cast<int>(to_count(key, v, line, 1));
    } else if (key == "v_inv_max") {
        c.v_inv_max = positive(key, v, line);
    } else if (key == "threshold") {
        c.threshold = to_double(key, v, line);
    } else if (key == "points") {
        c.points = std::string(v);
    } else if (key == "rabi_frequency") {
        c.rabi_frequency = positive(key, v, line);
    } else if (key == "target_theta") {
        c.target_theta = to_double(key, v, line);
    } else if (key == "window") {
        c.window = positive(key, v, line);
    } else if (key == "scan_points") {
        c.scan_points = static_cast<int>(to_count(key, v, line, 2));
    } else if (key == "shots") {
        c.shots = to_count(key, v, line, 0);
    } else if (key == "output") {
        c.output = std::string(v);
    } else if (key == "format") {
        if (v == "csv") c.format = OutputFormat::csv;
        else if (v == "json") c.format = OutputFormat::json;
        else reject(key, line, "expected csv or json");
    } else {
        reject(key, line, "unknown key");
    }
}

RunConfig parse_config(std::string_view text) { return parse_config(text, RunConfig{}); }

RunConfig parse_config(std::string_view text, RunConfig config) {
    int line_no = 0;
    for (std::size_t start = 0; start < text.size();) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(std::string(line), line_no, "expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("", line_no, "missing key before '='");
        apply_setting(config, key, line.substr(eq + 1), line_no);
    }
    return config;
}

void validate(const RunConfig& c) {
    if (c.n_steps.empty()) throw ParseError("n_steps", 0, "at least one step count is required");
    if (c.omega_f_min > c.omega_f_max) {
        throw ParseError("omega_f_min", 0, "must not exceed omega_f_max");
    }
    if (c.command == Command::temperature_profile && c.betas.empty()) {
        throw ParseError("betas", 0, "at least one inverse temperature is required");
    }
    if (!c.command_set) throw ParseError("command", 0, "no command given");
}

std::vector<ProtocolSpec> plan_jobs(const RunConfig& c) {
    const ThermalSpec thermal = ThermalSpec::from_beta(c.beta);
    std::vector<ProtocolSpec> jobs;
    for (int n : c.n_steps) {
        jobs.push_back(c.kind == ProtocolKind::coherent
                           ? ProtocolSpec::coherent(n, thermal)
                           : ProtocolSpec::incoherent(n, thermal, c.omega_start, c.omega_end));
    }
    return jobs;
}

std::filesystem::path resolve_output(const RunConfig& c, const std::filesystem::path& output_dir) {
    if (!c.output.empty()) return c.output;
    return output_dir / (std::string(to_string(c.command)) +
                         (c.format == OutputFormat::csv ? ".csv" : ".json"));
}

Table load_reference_points(const RunConfig& c) {
    Table table = c.points.empty() ? parse_csv(kReferencePointsCsv)
                                   : parse_csv(read_text_file(c.points));
    if (table.columns != std::vector<std::string>{"v_inv", "nq_exp", "sigma_stat"}) {
        throw FormatError("reference points need columns v_inv,nq_exp,sigma_stat");
    }
    return table;
}

Table analytic_table(const RunConfig& c) {
    Table table{kEstimateColumns, {}};
    for (const auto& spec : plan_jobs(c)) {
        table.add_row(estimate_row(spec.kind() == ProtocolKind::coherent
                                       ? quantum_correction(spec)
                                       : incoherent_correction(spec)));
    }
    return table;
}

Table sweep_table(const RunConfig& c) {
    Table table{{"provenance", "v_inv", "nq_rescaled"}, {}};
    const ThermalSpec thermal = ThermalSpec::from_beta(c.beta);
    auto add = [&](const SweepPoint& p) {
        table.add_row({std::string(to_string(p.provenance)), p.inverse_speed, p.rescaled_q});
    };
    for (int n = 1; n <= c.theory_n_max; ++n) {
        const auto e = quantum_correction(ProtocolSpec::coherent(n, thermal));
        add({e.inverse_speed(), e.rescaled_q, Provenance::coherent_theory});
    }
    for (const auto& p : run_sweep(c).boundary_points()) {
        if (p.inverse_speed <= c.v_inv_max) add(p);
    }
    for (int n = 1; n <= c.theory_n_max; ++n) {
        const auto e = spam_correction(thermal, spam_of(c), n);
        add({e.inverse_speed(), e.rescaled_q, Provenance::spam_bound});
    }
    for (const auto& row : load_reference_points(c).rows) {
        add({cell_number(row[0]), cell_number(row[1]), Provenance::experiment});
    }
    return table;
}

Table certify_table(const RunConfig& c, std::ostream& log) {
    Table table{{"v_inv", "nq_exp", "sigma_stat", "ref_inc", "delta_inc_sigma", "ref_spam",
                 "delta_spam_sigma", "pass"},
                {}};
    const ThermalSpec thermal = ThermalSpec::from_beta(c.beta);
    const IncoherentSweep sweep = run_sweep(c);
    if (sweep.excluded > 0) {
        log << "warning: " << sweep.excluded << " sweep entries with ||dH|| = 0 excluded\n";
    }
    for (const auto& row : load_reference_points(c).rows) {
        const SweepPoint point{cell_number(row[0]), cell_number(row[1]), Provenance::experiment};
        const double sigma = cell_number(row[2]);
        const int n = coherent_steps_for(point.inverse_speed);
        if (std::abs(n * std::numbers::sqrt2 - point.inverse_speed) > 0.01) {
            log << "warning: inverse speed " << format_cell(point.inverse_speed)
                << " is not N*sqrt(2) for integer N; using N = " << n << '\n';
        }
        const auto boundary = sweep.boundary_at(point.inverse_speed);
        if (!boundary) {
            log << "warning: no incoherent sweep coverage at inverse speed "
                << format_cell(point.inverse_speed) << '\n';
        }
        const double ref_inc = boundary.value_or(std::numeric_limits<double>::infinity());
        const double ref_spam = spam_correction(thermal, spam_of(c), n).rescaled_q;
        const auto inc = sigma_distance(point, sigma, ref_inc, ReferenceKind::incoherent_boundary);
        const auto spm = sigma_distance(point, sigma, ref_spam, ReferenceKind::spam_boundary);
        const bool pass = boundary.has_value() && inc.certified(c.threshold) &&
                          spm.certified(c.threshold);
        table.add_row({point.inverse_speed, point.rescaled_q, sigma, ref_inc, inc.distance_sigma,
                       ref_spam, spm.distance_sigma, pass});
    }
    return table;
}

Table temperature_profile_table(const RunConfig& c) {
    Table table{{"beta", "n_steps", "mean_work", "var_work", "q_value", "nq_rescaled",
                 "spam_nq_rescaled"},
                {}};
    for (int n : c.n_steps) {
        const auto profile = temperature_profile(n, c.betas);
        for (const auto& e : profile) {
            const auto spam = spam_correction(ThermalSpec::from_beta(e.beta), spam_of(c), n);
            table.add_row({e.beta, static_cast<std::int64_t>(n), e.mean_work, e.var_work,
                           e.q_value, e.rescaled_q, spam.rescaled_q});
        }
    }
    return table;
}

Table calibrate_table(const RunConfig& c) {
    Table table{{"target_theta", "true_duration", "duration", "standard_error", "slope",
                 "intercept"},
                {}};
    const double truth = c.target_theta / c.rabi_frequency;
    const auto scan = synthetic_calibration_scan(c.rabi_frequency, truth, c.window,
                                                 c.scan_points, c.shots, c.seed);
    const auto fit = calibrate_rotation_time(scan, c.target_theta);
    table.add_row({c.target_theta, truth, fit.duration, fit.standard_error, fit.slope,
                   fit.intercept});
    return table;
}

RunOutcome run(const RunConfig& c, const std::filesystem::path& output_dir, std::ostream& log) {
    validate(c);
    RunOutcome outcome;
    const auto out_path = resolve_output(c, output_dir);
    Table table;
    switch (c.command) {
        case Command::simulate: {
            std::vector<WorkSampleSet> sets;
            table = simulate_tables(c, sets);
            for (const auto& s : sets) {
                auto path = out_path;
                path.replace_filename(out_path.stem().string() + "_samples_N" +
                                      std::to_string(s.spec.n_steps()) + ".csv");
                write_text_file(path, format_samples(s));
                outcome.written.push_back(path);
            }
            break;
        }
        case Command::analytic: table = analytic_table(c); break;
        case Command::sweep: table = sweep_table(c); break;
        case Command::certify: {
            table = certify_table(c, log);
            for (const auto& row : table.rows) {
                if (!std::get<bool>(row.back())) outcome.status = exit_code::certification_failure;
            }
            break;
        }
        case Command::temperature_profile: table = temperature_profile_table(c); break;
        case Command::calibrate: table = calibrate_table(c); break;
    }
    write_text_file(out_path, render(table, c.format));
    outcome.written.insert(outcome.written.begin(), out_path);
    return outcome;
}

}  // namespace qfdr
