#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "patchpnp/image.hpp"
#include "patchpnp/memory.hpp"
#include "patchpnp/operators.hpp"
#include "patchpnp/priors.hpp"
#include "patchpnp/schedule.hpp"

namespace patchpnp {

enum class OffsetPolicyKind { FixedZero, CycleHalf, SeededRandom };

std::string_view to_string(OffsetPolicyKind kind);
OffsetPolicyKind parse_offset_policy(std::string_view text);

/// How the grid lattice moves between diffusion steps.
struct OffsetPolicy {
  OffsetPolicyKind kind = OffsetPolicyKind::SeededRandom;
  std::uint64_t seed = 0;

  /// FixedZero: (0,0). CycleHalf: (0,0) on even steps, (p/2, p/2) on odd.
  /// SeededRandom: uniform on [0,p)^2, a pure function of (seed, step).
  GridOffset offset_for(int patch, int step) const;
};

struct WholeImage {};

struct ShiftedGrid {
  int patch = 64;
  int context_margin = 0;
  PaddingMode padding = PaddingMode::Reflect;
  OffsetPolicy policy{};

  PatchGrid grid_for_step(int step) const;
};

using PriorEvalMode = std::variant<WholeImage, ShiftedGrid>;

struct EvalOptions {
  /// Worker threads used inside one patch batch.
  int threads = 1;
  /// Tiles whose buffers are live at the same time. Fixes the ledger peak
  /// independently of `threads`.
  int patch_batch = 1;
  MemoryLedger* ledger = nullptr;
};

/// Image paired with its ledger registration.
struct TrackedImage {
  Image image;
  BufferHold hold;
};

/// D(x, sigma) evaluated on the whole image or tile by tile on the grid the
/// policy picks for `step`. Tiles are completed from padding where they
/// overhang the image, denoised independently, and cropped back.
TrackedImage eval_prior_tracked(const DenoiserPrior& prior, const Image& x, double sigma,
                                const PriorEvalMode& mode, int step, const EvalOptions& opts = {});
Image eval_prior(const DenoiserPrior& prior, const Image& x, double sigma,
                 const PriorEvalMode& mode, int step, const EvalOptions& opts = {});

/// Exact vector-Jacobian product of eval_prior() under the same mode and step.
TrackedImage eval_prior_vjp(const DenoiserPrior& prior, const Image& x, double sigma,
                            const Image& v, const PriorEvalMode& mode, int step,
                            const EvalOptions& opts = {});

enum class SolverKind { Dps, DiffPir };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver(std::string_view text);

struct SolverConfig {
  SolverKind solver = SolverKind::DiffPir;
  OperatorKind op = OperatorKind::Identity;
  double sigma_n = 0.05;
  ScheduleParams schedule{};
  std::shared_ptr<const DenoiserPrior> prior;
  PriorEvalMode eval_mode = WholeImage{};
  double dps_zeta = 0.5;
  double diffpir_lambda = 100.0;
  double diffpir_zeta = 0.3;
  std::uint64_t seed = 0;

  double cg_tol = 1e-10;
  int cg_max_iter = 100;
  int threads = 1;
  int patch_batch = 1;

  void validate() const;
  /// Forward operator whose output matches a measurement of this size.
  ForwardOperator operator_for(int meas_height, int meas_width) const;
};

struct StepDiagnostics {
  double sigma = 0.0;
  double data_residual = 0.0;  ///< ||y - H x0_hat||
  int cg_iterations = 0;
  bool cg_converged = true;
  std::optional<GridOffset> offset;
};

struct RunReport {
  Image restored;
  std::vector<StepDiagnostics> steps;
  std::int64_t peak_tracked_bytes = 0;
  std::int64_t final_live_bytes = 0;
  double wall_time = 0.0;
  int cg_warnings = 0;
  Image initial;  ///< x_0, kept for diagnostics

  /// Offsets of the last grid step (empty for whole-image runs).
  std::vector<GridOffset> final_offsets() const;
};

/// A non-finite iterate appeared.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string solver, int step);
  int step() const { return step_; }

 private:
  int step_;
};

/// Data-fidelity proximal step:
///   argmin_x ||y - Hx||^2 / (2 sigma_n^2) + rho/2 ||x - x0_hat||^2.
/// Closed form for Identity, CG otherwise. The in-place form overwrites the
/// x0_hat it is given.
struct ProximalStats {
  int cg_iterations = 0;
  bool cg_converged = true;
};
struct ProximalResult : ProximalStats {
  Image x;
};
ProximalStats diffpir_proximal_in_place(const ForwardOperator& op, const Image& y, Image& x,
                                        double sigma_n, double rho, double cg_tol,
                                        int cg_max_iter, MemoryLedger* ledger = nullptr);
ProximalResult diffpir_proximal(const ForwardOperator& op, const Image& y, const Image& x0_hat,
                                double sigma_n, double rho, double cg_tol = 1e-10,
                                int cg_max_iter = 100);

RunReport dps_run(const SolverConfig& cfg, const Image& y);
RunReport diffpir_run(const SolverConfig& cfg, const Image& y);
/// Dispatches on cfg.solver.
RunReport solve(const SolverConfig& cfg, const Image& y);

}  // namespace patchpnp
