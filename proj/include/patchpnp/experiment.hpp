#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patchpnp/phantom.hpp"
#include "patchpnp/solvers.hpp"

namespace patchpnp {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task { Denoise, Sr2 };

std::string_view to_string(Task task);

struct PriorSpec {
  std::string kind = "gaussian";  ///< gaussian | conv
  double tau = 1.0;
  double mu = 0.0;
  std::string kernel = "box3";  ///< box3 | box5 | binomial3 | binomial5 | file path
  double blend_c = 0.5;
  PaddingMode border = PaddingMode::Reflect;

  std::shared_ptr<const DenoiserPrior> build() const;
};

/// Flat key=value experiment description; list values are comma-separated.
/// A patch size of 0 (or "whole") selects whole-image prior evaluation.
struct ExperimentConfig {
  Task task = Task::Denoise;
  std::optional<std::filesystem::path> input;
  PhantomKind phantom = PhantomKind::SheppEllipses;
  int phantom_height = 64;
  int phantom_width = 64;
  std::optional<std::uint64_t> phantom_seed;  ///< defaults to the sweep seed

  SolverKind solver = SolverKind::DiffPir;
  double sigma_n = 0.05;
  ScheduleParams schedule{};
  PriorSpec prior{};
  double dps_zeta = 0.5;
  double diffpir_lambda = 100.0;
  double diffpir_zeta = 0.3;
  double cg_tol = 1e-10;
  int cg_max_iter = 100;
  int context_margin = 0;
  int patch_batch = 1;
  int patch_threads = 1;

  std::vector<int> patch_sizes{0};
  std::vector<PaddingMode> paddings{PaddingMode::Reflect};
  std::vector<OffsetPolicyKind> offset_policies{OffsetPolicyKind::SeededRandom};
  std::vector<std::uint64_t> seeds{0};

  double psnr_peak = 1.0;
  int edge_band = 4;
  bool write_images = true;
  std::filesystem::path output_dir = "out";

  void validate() const;
};

/// Relative paths in the file resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

struct CsvRow {
  std::string task;
  std::string solver;
  int patch = 0;
  std::string padding;
  std::string policy;
  std::uint64_t seed = 0;
  double psnr = 0.0;
  double seam_score = 0.0;
  double edge_band_rmse = 0.0;
  std::int64_t peak_bytes = 0;
  double wall_time = 0.0;
  int cg_warnings = 0;
};

std::string csv_header();
std::string to_csv_line(const CsvRow& row);
CsvRow parse_csv_line(std::string_view line);

struct SweepPoint {
  int patch = 0;
  PaddingMode padding = PaddingMode::Reflect;
  OffsetPolicyKind policy = OffsetPolicyKind::SeededRandom;
  std::uint64_t seed = 0;
};

struct PointResult {
  SweepPoint point;
  CsvRow row;
  RunReport report;
  Image truth;
  Image measurement;
};

/// Ground truth for a sweep seed: the input file or a phantom.
Image load_truth(const ExperimentConfig& cfg, std::uint64_t seed);
SolverConfig solver_config_for(const ExperimentConfig& cfg, const SweepPoint& point);
/// patch > padding > policy > seed order; whole-image points appear once per seed.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

/// One sweep point end to end, without touching the filesystem.
PointResult run_point(const ExperimentConfig& cfg, const SweepPoint& point);

struct ExperimentResult {
  std::vector<PointResult> points;
  std::filesystem::path csv_path;
};

/// Runs every sweep point (up to `workers` at once), writes restored images
/// and results.csv into cfg.output_dir. Rows keep sweep order.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1);

}  // namespace patchpnp
