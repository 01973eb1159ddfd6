#pragma once

#include "salab/engine.hpp"
#include "salab/lyapunov.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace salab {

/// Every parser below is strict: unknown fields and wrong types raise
/// Error(ErrorCode::Config) with the dotted field path in the message.

StepSchedule parse_schedule(const nlohmann::json& j, const std::string& path = "schedule");
Operator parse_operator(const nlohmann::json& j, const std::string& path = "operator");
/// `reference` is the point multiplicative noise measures distance from.
NoiseModel parse_noise(const nlohmann::json& j, int dim, const Vector& reference,
                       const std::string& path = "noise");
LyapunovFunction parse_lyapunov(const nlohmann::json& j, const Operator& op,
                                const std::string& path = "lyapunov");
DiagnosticsConfig parse_diagnostics(const nlohmann::json& j, const std::string& path = "diagnostics");

struct CertifySettings {
    DriftRegion region;
    std::uint64_t samples = 100000;
};

struct ScenarioConfig {
    Scenario scenario;
    std::vector<double> xi_list;
    std::optional<LyapunovFunction> lyapunov;
    CertifySettings certify;
};

ScenarioConfig parse_scenario_config(const nlohmann::json& j);
/// Throws Error(Config) for malformed JSON (with line and column) or schema
/// violations, Error(Io) when the file cannot be read.
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

std::vector<double> parse_xi_list(const std::string& csv);

} // namespace salab
