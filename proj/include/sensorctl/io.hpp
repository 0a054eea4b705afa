#pragma once

// JSON model schemas and CSV formatting shared by the CLI and the tests.
//
// Matrices are row-major arrays of arrays; a bare number is accepted as a
// 1x1 matrix. Control, measurement and sensor labels in every output are
// 1-based, while the library API is 0-based.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensorctl/direct_control.hpp"
#include "sensorctl/lqg.hpp"
#include "sensorctl/machine_repair.hpp"
#include "sensorctl/pomdp.hpp"
#include "sensorctl/scheduling.hpp"

namespace sensorctl::io {

using Json = nlohmann::json;

/// Reads and parses a JSON file. Throws ParseError on I/O or syntax failure.
[[nodiscard]] Json read_json_file(const std::filesystem::path& path);

[[nodiscard]] Matrix matrix_from_json(const Json& j, const char* what);
[[nodiscard]] Vector vector_from_json(const Json& j, const char* what);
[[nodiscard]] Json to_json(const Matrix& m);
[[nodiscard]] Json to_json(const Vector& v);

// {"K": int, "stages": [{"n","m","s","F":[..per u],"G":[..],"H":[..]}], "H0": [[..]], "p0": [..]}
// Stage 0 carries no "H". Structural faults throw ParseError; stochastic and
// shape checks are left to validate_model.
[[nodiscard]] pomdp::Model pomdp_from_json(const Json& j);
[[nodiscard]] Json to_json(const pomdp::Model& model);

// {"alpha","eta_f","eta_d","gamma_f","gamma_d","c_R","c_B","c_D","K"}
[[nodiscard]] machine_repair::Params machine_repair_from_json(const Json& j);
[[nodiscard]] Json to_json(const machine_repair::Params& params);

// {"K", "n", "m", "s", "A", "B", "C", "D", "T", "R", "Sigma_w", "Sigma_v", "m_x0", "Sigma_x0"}
// Each per-stage field is either a list of matrices with the documented
// count or a single matrix that applies to every stage.
[[nodiscard]] lqg::Model lqg_from_json(const Json& j);
[[nodiscard]] Json to_json(const lqg::Model& model);

// {"model": <lqg object or path relative to base_dir>, "stages": [[{"cov": [[..]], "cost": x}, ..], ..]}
[[nodiscard]] scheduling::SensorMenu menu_from_json(const Json& j, const std::filesystem::path& base_dir);
[[nodiscard]] Json to_json(const scheduling::ScheduleResult& result);

// The eleven scalars m_x, sigma_x2, a, b, sigma_w2, c, d, sigma_v2, gamma, t, r.
[[nodiscard]] direct_control::ScalarTwoStageModel direct_control_from_json(const Json& j);
[[nodiscard]] Json to_json(const direct_control::ScalarTwoStageModel& model);

/// 17 significant digits, '.' decimal point; round-trips any double.
[[nodiscard]] std::string format_double(double value);

/// Comma-joined cells terminated by '\n'.
[[nodiscard]] std::string csv_line(const std::vector<std::string>& cells);

/// Writes through a temporary sibling file and renames it into place, so a
/// failed run never leaves a partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace sensorctl::io
