#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pointflow/errors.hpp"
#include "pointflow/geometry.hpp"

namespace pointflow {

enum class RunMode { solve, optimize, gradient_check, hessian_check, ssc, regularity_study };

const char* to_string(RunMode m);

struct SourceSpec {
  Vec2 point;
  Vec2 lower;
  Vec2 upper;
  Vec2 control;
};

struct TargetSpec {
  std::string preset = "zero";           // zero | uniform | vortex | recoverable
  double scale = 1.0;
  std::vector<Vec2> control;             // U* for the recoverable preset
  std::string field_file;                // CSV x,y,ux,uy; overrides preset when set
};

/// Fully resolved experiment description (defaults filled in).
struct ExperimentConfig {
  int n = 16;
  int grading_levels = 1;
  double grading_ratio = 0.5;

  double nu = 1.0;
  double eta = 1e-3;
  double alpha = 1.5;

  std::vector<SourceSpec> sources;
  TargetSpec target;
  RunMode mode = RunMode::solve;

  double newton_tol = 1e-10;
  int newton_max_iters = 30;
  double opt_tol = 1e-8;
  int opt_max_iters = 500;
  double tau = 1e-6;
  double tol_active = 1e-8;
  double kappa_min = 1e-10;
  double gradient_step = 1e-4;
  double hessian_step = 1e-3;
  int check_samples = 5;
  double growth_sigma = 1e-2;
  int growth_samples = 50;

  std::vector<int> ladder{8, 16, 32};
  double lp_exponent = 1.5;

  std::string output_dir = "pointflow-out";
  bool vtk = false;
  std::uint64_t seed = 1;

  /// Canonical JSON echo of every field above (sorted keys).
  std::string canonical_json() const;
};

/// Invalid configuration; `field` names the offending entry.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ConfigOverrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig parse_config(std::string_view json_text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Git blob id of the content: sha1("blob <size>\0" + content), lowercase hex.
std::string content_hash(std::string_view content);

/// 17 significant digits in scientific notation.
std::string csv_number(double v);

struct RegularityRow {
  int n = 0;
  int nodes = 0;
  double h_min = 0.0;
  bool converged = false;
  double newton_residual = 0.0;
  double grad_l2 = 0.0;
  double grad_weighted = 0.0;
  double lp_seminorm = 0.0;
  double regularity_indicator = 0.0;
};

/// State solves with the configured controls on every ladder resolution.
std::vector<RegularityRow> regularity_study(const ExperimentConfig& cfg);

struct RunOutcome {
  std::vector<std::string> files;  // written artifacts, relative to the output directory
};

/// Runs the configured mode and writes artifacts plus manifest.json into
/// cfg.output_dir. Solver failures propagate as NonConvergence or
/// SingularSystem after a manifest with status "failed" has been written.
RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace pointflow
