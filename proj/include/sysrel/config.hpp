#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sysrel/active_learning.hpp"
#include "sysrel/problems.hpp"

namespace sysrel {

/// Malformed configuration; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::invalid_argument(path + ": " + message), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// A parsed configuration: the problem, the learning settings and the fully
/// resolved JSON (every default made explicit), which re-parses to the same setup.
struct RunSetup {
    ProblemSpec problem;
    LearnConfig learn;
    nlohmann::json resolved;
};

RunSetup parse_config(const nlohmann::json& doc);
RunSetup load_config(const std::string& path);

/// Replaces the four seeds by the ones derived from a single master seed.
void apply_master_seed(RunSetup& setup, std::uint64_t seed);

nlohmann::json report_to_json(const RunReport& report, const RunSetup& setup);
nlohmann::json sus_to_json(const SusResult& result, bool include_samples = false);
nlohmann::json model_to_json(const SurrogateModel& model);

/// Iteration history as CSV, one row per iteration, numbers with 17 significant digits.
std::string history_csv(const RunReport& report);

struct Quartiles {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Sample quartiles with linear interpolation between order statistics.
Quartiles quartiles(std::vector<double> values);

nlohmann::json to_json(const Quartiles& q);

}  // namespace sysrel
