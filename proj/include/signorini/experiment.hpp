#pragma once

#include "signorini/blowup.hpp"
#include "signorini/freeboundary.hpp"
#include "signorini/run.hpp"
#include "signorini/timereg.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace signorini {

inline constexpr const char* kVersion = "0.1.0";

/// Config schema violation; `field` is the dotted path, e.g. "grid.m".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string preset;
  nlohmann::json params = nlohmann::json::object();
  GridSpec grid;
  SolverSpec solver;
};

/// {n, preset, params, grid: {m, dt, t0, t1}, solver: {...}}. n, preset,
/// grid.m and grid.dt are required; unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Normalized echo with every default filled in; parse_config accepts it.
nlohmann::json to_json(const ExperimentConfig& config);

/// Builds the preset; parameter errors come back as ConfigError on "params".
SignoriniProblem make_problem(const ExperimentConfig& config);

struct RunFiles {
  std::filesystem::path dir;
  nlohmann::json manifest;
  bool converged = true;
};

/// Solves and writes u.sigf, v.sigf (with .json sidecars), mask.bin (one
/// byte per thin node, slice-major) and manifest.json into `out`.
RunFiles run_experiment(const ExperimentConfig& config, const std::filesystem::path& out);

/// Reads a run directory back, checking the dump checksums and the mask.
Run load_run(const std::filesystem::path& dir);

// ------------------------------------------------------------ sweep

struct SweepRow {
  int level = 0;
  int m = 0;
  double dt = 0.0;
  double hx = 0.0;
  std::optional<double> sup_err;  // sup over Q_1/2 of |v - oracle|
  std::optional<double> order;    // log2 of the previous level's error over this one
  double sup_dt = 0.0;
  double energy_ratio = 0.0;
  bool converged = true;
};

/// sup over Q_rho of |v_h - v| for presets with an oracle.
std::optional<double> oracle_error(const Run& run, double rho = 0.5);

/// Level l uses m_l = (m_0 - 1) 2^l + 1 and dt_l = dt_0 4^-l. Up to
/// `threads` levels are solved at once.
std::vector<SweepRow> sweep(const ExperimentConfig& config, int levels, int threads = 1);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// ------------------------------------------------------------ analyses

struct AnalysisOptions {
  std::optional<SpaceTimePoint> point;
  std::optional<std::vector<double>> radii;
  std::optional<GraphWindow> window;
};

struct AnalysisResult {
  nlohmann::json data;
  bool pass = true;
};

/// Window |x_{n-1}|, |x''| <= 3/4 over the last three quarters of the run.
GraphWindow default_window(const GridSpec& spec);
/// Free boundary point at the grid time nearest t1 - (t1 - t0)/4, on the
/// column x'' = 0. Empty when that slice has no single transition there.
std::optional<SpaceTimePoint> default_point(const Run& run);
/// Radii r_max 2^{-i/2} down to 2 hx, with r_max <= 1/4 and the parabolic
/// ball (two-sided in time when `two_sided`) inside the run.
std::vector<double> default_radii(const Run& run, const SpaceTimePoint& c, bool two_sided);

AnalysisResult analyze_timereg(const Run& run, const AnalysisOptions& opts);
AnalysisResult analyze_freeboundary(const Run& run, const AnalysisOptions& opts);
AnalysisResult analyze_blowup(const Run& run, const AnalysisOptions& opts);

/// Manifest echo plus one section per analysis in {timereg, freeboundary,
/// blowup}; `pass` is the conjunction of the sections.
AnalysisResult report(const std::filesystem::path& dir, const std::vector<std::string>& analyses,
                      const AnalysisOptions& opts = {});

}  // namespace signorini
