/**
 * Configuration and orchestration behind the qfdr command-line tool.
 *
 * Configuration documents are `key = value` lines; '#' starts a comment.
 * List values are comma separated, integer lists also accept `a..b`.
 * Command-line flags use the same key names and override document values.
 */

#ifndef QFDR_CLI_HPP
#define QFDR_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qfdr/io.hpp"
#include "qfdr/protocol.hpp"

namespace qfdr {

enum class Command { simulate, analytic, sweep, certify, temperature_profile, calibrate };

const char* to_string(Command command);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int parse_error = 2;
inline constexpr int certification_failure = 3;
inline constexpr int io_error = 4;
}  // namespace exit_code

class ParseError : public std::runtime_error {
public:
    ParseError(std::string key, int line, const std::string& message);

    const std::string& key() const { return key_; }
    /// 1-based line in the document, 0 for command-line flags.
    int line() const { return line_; }

private:
    std::string key_;
    int line_;
};

struct RunConfig {
    Command command = Command::analytic;
    bool command_set = false;

    // Protocol.
    ProtocolKind kind = ProtocolKind::coherent;
    std::vector<int> n_steps{5};
    double beta = 3.413;
    double omega_start = 1.0;
    double omega_end = 2.0;

    // Readout errors.
    double spam_b0 = 0.004;
    double spam_d1 = 0.004;
    bool spam_samples = false;  // apply readout errors when sampling
    SpamConvention spam_convention = SpamConvention::marginal;

    // Sampling and statistics.
    std::uint64_t runs = 8000;
    std::uint64_t resamples = 200;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    // Sweep / certification.
    std::vector<double> betas{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    double omega_f_min = 0.05;
    double omega_f_max = 20.0;
    int omega_f_points = 200;
    int n_max = 200;
    double bin_width = 0.05;
    int theory_n_max = 64;
    double v_inv_max = 100.0;
    double threshold = 10.0;
    std::filesystem::path points;  // empty: bundled reference points

    // Calibration.
    double rabi_frequency = 1.0;
    double target_theta = 1.5707963267948966;
    double window = 0.2;
    int scan_points = 11;
    std::uint64_t shots = 5000;

    // Output.
    std::filesystem::path output;  // empty: <output dir>/<command>.<ext>
    OutputFormat format = OutputFormat::csv;
};

/// Names accepted in documents and as --flags.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value; `line` is reported in errors.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value, int line = 0);

/// Parses a whole document on top of the defaults.
RunConfig parse_config(std::string_view text);
RunConfig parse_config(std::string_view text, RunConfig base);

/// Cross-field checks once all settings are applied.
void validate(const RunConfig& config);

/// One simulate job per entry of n_steps.
std::vector<ProtocolSpec> plan_jobs(const RunConfig& config);

/// Output path, resolving the default against `output_dir`.
std::filesystem::path resolve_output(const RunConfig& config,
                                     const std::filesystem::path& output_dir);

struct RunOutcome {
    int status = exit_code::ok;
    std::vector<std::filesystem::path> written;
};

/// Executes the command and writes its artifacts. Diagnostics go to `log`.
/// Throws IoError on file failures; returns certification_failure when a
/// certify row misses the threshold.
RunOutcome run(const RunConfig& config, const std::filesystem::path& output_dir, std::ostream& log);

/// Tables behind each command, exposed for tests.
Table analytic_table(const RunConfig& config);
Table sweep_table(const RunConfig& config);
Table certify_table(const RunConfig& config, std::ostream& log);
Table temperature_profile_table(const RunConfig& config);
Table calibrate_table(const RunConfig& config);

/// Reference experimental points, columns v_inv,nq_exp,sigma_stat.
Table load_reference_points(const RunConfig& config);

}  // namespace qfdr

#endif  // QFDR_CLI_HPP
