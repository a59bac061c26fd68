// qfdr: sample, evaluate and certify work fluctuation-dissipation corrections.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "qfdr/cli.hpp"

namespace {

constexpr const char* kOutputDirEnv = "QFDR_OUTPUT_DIR";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-point-measurement work statistics and FDR certification"};
    app.set_help_flag("-h,--help", "Print help and exit");

    std::string command;
    std::string config_path;
    app.add_option("command", command,
                   "simulate | analytic | sweep | certify | temperature-profile | calibrate");
    app.add_option("-c,--config", config_path, "Configuration document (key = value lines)");

    std::map<std::string, std::string> flags;
    for (const auto& key : qfdr::config_keys()) {
        if (key == "command") continue;
        app.add_option("--" + key, flags[key], "Overrides config key '" + key + "'");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qfdr::exit_code::parse_error;
    }

    qfdr::RunConfig config;
    try {
        if (!config_path.empty()) {
            config = qfdr::parse_config(qfdr::read_text_file(config_path));
        }
        if (!command.empty()) qfdr::apply_setting(config, "command", command);
        for (const auto& key : qfdr::config_keys()) {
            const auto it = flags.find(key);
            if (it != flags.end() && app.count("--" + key) > 0) {
                qfdr::apply_setting(config, key, it->second);
            }
        }
        qfdr::validate(config);
    } catch (const qfdr::IoError& e) {
        std::cerr << "qfdr: " << e.what() << '\n';
        return qfdr::exit_code::io_error;
    } catch (const std::exception& e) {
        std::cerr << "qfdr: " << e.what() << '\n';
        return qfdr::exit_code::parse_error;
    }

    const char* env_dir = std::getenv(kOutputDirEnv);
    const std::filesystem::path output_dir = env_dir && *env_dir ? env_dir : ".";
    try {
        const auto outcome = qfdr::run(config, output_dir, std::cerr);
        for (const auto& path : outcome.written) std::cerr << "wrote " << path.string() << '\n';
        if (outcome.status == qfdr::exit_code::certification_failure) {
            std::cerr << "qfdr: certification failed at threshold " << config.threshold << '\n';
        }
        return outcome.status;
    } catch (const qfdr::IoError& e) {
        std::cerr << "qfdr: " << e.what() << '\n';
        return qfdr::exit_code::io_error;
    } catch (const std::exception& e) {
        std::cerr << "qfdr: " << e.what() << '\n';
        return qfdr::exit_code::parse_error;
    }
}
