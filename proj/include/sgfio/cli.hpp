// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace sgfio::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

/// Schema violation at a JSON path such as "hyperbolic.lambda[1].order".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path)
    {
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

const std::vector<std::string>& subcommands();

struct Invocation {
    std::string subcommand;
    std::string config_path;
    bool serial = false;
    std::optional<std::string> out;
};

struct Outcome {
    int exit_code = kPass;
    json report;
    std::filesystem::path out_dir;
};

/// Output directory: SGFIO_OUT, then --out, then the config's "output", then ./sgfio_out.
std::filesystem::path resolve_output(const Invocation& inv, const json& cfg);

/// Reads the config, runs, writes report.json and the data files. Errors are reported on `log`.
Outcome run(const Invocation& inv, std::ostream& log);

/// Runs an already parsed config; artifacts go to out_dir, which is created.
/// Throws ConfigError for schema problems; numerical failures end up in the report with exit code 3.
Outcome run_config(const json& cfg, const std::string& subcommand, const std::filesystem::path& out_dir);

/// The report exactly as written to report.json.
std::string serialize(const json& report);

}  // namespace sgfio::cli
