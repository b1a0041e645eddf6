/**
 * @file io.hpp
 * @brief File formats of the command-line tool: CSV trajectories, JSON
 *        reports, SVG portraits and run manifests.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "plap/analysis.hpp"

namespace plap::io {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// printf %.{digits}g; "nan", "inf", "-inf" for non-finite values.
[[nodiscard]] std::string format_number(double v, int digits);

/// JSON text with every floating-point number at 17 significant digits.
/// Non-finite numbers become null.
[[nodiscard]] std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Header `tau,y,Y,r,w,dw`, one row per sample, 12 significant digits.
[[nodiscard]] std::string trajectory_csv(const Trajectory& tr);
/// Header `kind,tau,y,Y`.
[[nodiscard]] std::string events_csv(const Trajectory& tr);
/// out.csv -> out.events.csv
[[nodiscard]] std::filesystem::path events_path(const std::filesystem::path& csv);

[[nodiscard]] nlohmann::json params_json(const ProblemParams& params);
[[nodiscard]] nlohmann::json constants_json(const ProblemParams& params, const DerivedConstants& c);
[[nodiscard]] nlohmann::json stationary_json(const StationaryPointInfo& s);
[[nodiscard]] nlohmann::json alpha_c_json(int N, double p, const AlphaCResult& r);
[[nodiscard]] nlohmann::json report_json(const RegimeReport& report);

struct PortraitCurve {
  std::vector<Vec2> points;
  std::string css_class;  ///< "seed" or the special-trajectory name
};

struct Portrait {
  ProblemParams params;
  double y_min = -1.0, y_max = 1.0, Y_min = -1.0, Y_max = 1.0;
  std::vector<PortraitCurve> curves;
  std::vector<StationaryPointInfo> stationary_points;
};

/// Static SVG, coordinates at 9 significant digits. Curves are clipped to
/// the box by splitting polylines where they leave it.
[[nodiscard]] std::string portrait_svg(const Portrait& portrait);

[[nodiscard]] std::string sha256_hex(std::string_view bytes);

/// Writes `content` to `path`; throws IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

struct OutputEntry {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  nlohmann::json params;
  /// SHA-256 of the canonical JSON of the effective configuration.
  std::string config_hash;
  std::string tool_version{kToolVersion};
  std::vector<OutputEntry> outputs;
  double wall_time_s = 0.0;
};

[[nodiscard]] OutputEntry describe_output(const std::filesystem::path& path, std::string_view content);
[[nodiscard]] nlohmann::json manifest_json(const RunManifest& m);
/// out.csv -> out.manifest.json
[[nodiscard]] std::filesystem::path manifest_path(const std::filesystem::path& out);

}  // namespace plap::io
