#pragma once

#include "salab/engine.hpp"
#include "salab/lyapunov.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace salab {

/// %.17g; "inf" / "-inf" / "nan" for non-finite values.
std::string format_g17(double v);

/// Columns: trajectory_id,k,u
std::string trajectories_csv(const std::vector<TrajectoryRecord>& records);

nlohmann::ordered_json summary_json(const EnsembleReport& report);
nlohmann::ordered_json certificate_json(const DriftCertificate& cert);

/// Columns: xi,admissible,converged_fraction,mean_jumps,analytic_jumps
std::string phase_csv(const std::vector<PhaseRow>& rows);

/// Log-log chart of the median u_k with its interquartile band, 800x600 viewBox.
std::string u_vs_k_svg(const EnsembleReport& report);
/// Converged fraction against xi with the threshold 1/p marked.
std::string phase_svg(const std::vector<PhaseRow>& rows, double p, const std::string& title);

/// Pretty-printed JSON with a trailing newline.
std::string to_text(const nlohmann::ordered_json& j);

/// Throws Error(Io) on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace salab
