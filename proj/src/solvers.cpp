#include "patchpnp/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <string>
#include <thread>

#include "patchpnp/random.hpp"

namespace patchpnp {

std::string_view to_string(OffsetPolicyKind kind) {
  switch (kind) {
    case OffsetPolicyKind::FixedZero:
      return "fixed_zero";
    case OffsetPolicyKind::CycleHalf:
      return "cycle_half";
    case OffsetPolicyKind::SeededRandom:
      return "seeded_random";
  }
  return "?";
}

OffsetPolicyKind parse_offset_policy(std::string_view text) {
  if (text == "fixed_zero") return OffsetPolicyKind::FixedZero;
  if (text == "cycle_half") return OffsetPolicyKind::CycleHalf;
  if (text == "seeded_random") return OffsetPolicyKind::SeededRandom;
  throw std::invalid_argument("unknown offset policy '" + std::string(text) + "'");
}

GridOffset OffsetPolicy::offset_for(int patch, int step) const {
  if (patch <= 0) throw std::invalid_argument("offset policy: patch must be positive");
  switch (kind) {
    case OffsetPolicyKind::FixedZero:
      return {0, 0};
    case OffsetPolicyKind::CycleHalf:
      return step % 2 == 0 ? GridOffset{0, 0} : GridOffset{patch / 2, patch / 2};
    case OffsetPolicyKind::SeededRandom: {
      const CounterRng rng(seed, /*stream=*/0x6F6666ULL);
      const auto p = static_cast<std::uint64_t>(patch);
      const auto s = static_cast<std::uint64_t>(step);
      return {static_cast<int>(rng.below(2 * s, p)), static_cast<int>(rng.below(2 * s + 1, p))};
    }
  }
  return {0, 0};
}

PatchGrid ShiftedGrid::grid_for_step(int step) const {
  PatchGrid g{patch, policy.offset_for(patch, step), context_margin, padding};
  g.validate();
  return g;
}

std::string_view to_string(SolverKind kind) { return kind == SolverKind::Dps ? "dps" : "diffpir"; }

SolverKind parse_solver(std::string_view text) {
  if (text == "dps") return SolverKind::Dps;
  if (text == "diffpir") return SolverKind::DiffPir;
  throw std::invalid_argument("unknown solver '" + std::string(text) + "'");
}

namespace {

// Runs fn(k) for k in [0, n) on up to `threads` workers. Exceptions from
// workers are rethrown on the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::clamp(threads, 1, std::max(n, 1));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int k = t; k < n; k += workers) fn(k);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct TileBatchHolds {
  std::vector<BufferHold> holds;

  TileBatchHolds(MemoryLedger* ledger, int count, int side, std::size_t workspace,
                 const char* prefix) {
    const std::size_t tile = image_bytes(side, side);
    const std::string p(prefix);
    for (int k = 0; k < count; ++k) {
      holds.emplace_back(ledger, p + ".in", tile);
      holds.emplace_back(ledger, p + ".out", tile);
      if (workspace > 0) holds.emplace_back(ledger, p + ".workspace", workspace);
    }
  }
};

}  // namespace

TrackedImage eval_prior_tracked(const DenoiserPrior& prior, const Image& x, double sigma,
                                const PriorEvalMode& mode, int step, const EvalOptions& opts) {
  MemoryLedger* ledger = opts.ledger;
  if (std::holds_alternative<WholeImage>(mode)) {
    TrackedImage out{Image(), BufferHold(ledger, "x0_hat", x.bytes())};
    BufferHold ws(ledger, "prior.workspace", prior.workspace_bytes(x.height(), x.width()));
    out.image = prior.denoise(x, sigma);
    return out;
  }

  const auto& sg = std::get<ShiftedGrid>(mode);
  const PatchGrid grid = sg.grid_for_step(step);
  const auto layout = tile_layout(x.height(), x.width(), grid);
  const int side = grid.tile_side();
  const int batch = std::max(opts.patch_batch, 1);

  TrackedImage out{Image(x.height(), x.width()), BufferHold(ledger, "x0_hat", x.bytes())};
  const std::size_t workspace = prior.workspace_bytes(side, side);
  for (std::size_t start = 0; start < layout.size(); start += static_cast<std::size_t>(batch)) {
    const int count = static_cast<int>(std::min<std::size_t>(batch, layout.size() - start));
    TileBatchHolds holds(ledger, count, side, workspace, "patch");
    parallel_for(count, opts.threads, [&](int k) {
      const TileGeometry& geom = layout[start + static_cast<std::size_t>(k)];
      const Image patch_in = extract_tile(x, geom.origin, side, grid.padding);
      const Image patch_out = prior.denoise(patch_in, sigma);
      // Placements partition the image, so concurrent pastes never overlap.
      paste_tile(out.image, patch_out, geom);
    });
  }
  return out;
}

Image eval_prior(const DenoiserPrior& prior, const Image& x, double sigma,
                 const PriorEvalMode& mode, int step, const EvalOptions& opts) {
  return eval_prior_tracked(prior, x, sigma, mode, step, opts).image;
}

TrackedImage eval_prior_vjp(const DenoiserPrior& prior, const Image& x, double sigma,
                            const Image& v, const PriorEvalMode& mode, int step,
                            const EvalOptions& opts) {
  require_same_shape(x, v, "eval_prior_vjp");
  MemoryLedger* ledger = opts.ledger;
  if (std::holds_alternative<WholeImage>(mode)) {
    TrackedImage out{Image(), BufferHold(ledger, "vjp", x.bytes())};
    BufferHold ws(ledger, "prior.workspace", prior.workspace_bytes(x.height(), x.width()));
    out.image = prior.vjp(x, sigma, v);
    return out;
  }

  const auto& sg = std::get<ShiftedGrid>(mode);
  const PatchGrid grid = sg.grid_for_step(step);
  const auto layout = tile_layout(x.height(), x.width(), grid);
  const int side = grid.tile_side();
  const int batch = std::max(opts.patch_batch, 1);
  const int h = x.height();
  const int w = x.width();

  TrackedImage out{Image(h, w), BufferHold(ledger, "vjp", x.bytes())};
  const std::size_t workspace = prior.workspace_bytes(side, side);
  for (std::size_t start = 0; start < layout.size(); start += static_cast<std::size_t>(batch)) {
    const int count = static_cast<int>(std::min<std::size_t>(batch, layout.size() - start));
    TileBatchHolds holds(ledger, count, side, workspace, "patch_vjp");
    std::vector<BufferHold> cot_holds;
    for (int k = 0; k < count; ++k) {
      cot_holds.emplace_back(ledger, "patch_vjp.cotangent", image_bytes(side, side));
    }
    std::vector<Image> grads(static_cast<std::size_t>(count));
    parallel_for(count, opts.threads, [&](int k) {
      const TileGeometry& geom = layout[start + static_cast<std::size_t>(k)];
      const Image patch_in = extract_tile(x, geom.origin, side, grid.padding);
      // Cotangent of the crop: v on the placement, zero on context/overhang.
      Image cot(side, side);
      const Rect& r = geom.placement;
      for (int yy = 0; yy < r.height; ++yy) {
        for (int xx = 0; xx < r.width; ++xx) {
          cot(r.y - geom.origin.y + yy, r.x - geom.origin.x + xx) = v(r.y + yy, r.x + xx);
        }
      }
      grads[static_cast<std::size_t>(k)] = prior.vjp(patch_in, sigma, cot);
    });
    // Transpose of extract_tile: scatter-add through the padding map. Tiles
    // overlap in context, so this stays sequential and ordered.
    for (int k = 0; k < count; ++k) {
      const TileGeometry& geom = layout[start + static_cast<std::size_t>(k)];
      const Image& g = grads[static_cast<std::size_t>(k)];
      for (int ty = 0; ty < side; ++ty) {
        const int sy = border_index(geom.origin.y + ty, h, grid.padding);
        if (sy < 0) continue;
        for (int tx = 0; tx < side; ++tx) {
          const int sx = border_index(geom.origin.x + tx, w, grid.padding);
          if (sx < 0) continue;
          out.image(sy, sx) += g(ty, tx);
        }
      }
    }
  }
  return out;
}

void SolverConfig::validate() const {
  if (!prior) throw std::invalid_argument("solver config has no prior");
  if (!(sigma_n >= 0.0) || !std::isfinite(sigma_n)) {
    throw std::invalid_argument("sigma_n must be finite and non-negative");
  }
  if (solver == SolverKind::DiffPir && !(sigma_n > 0.0)) {
    throw std::invalid_argument("diffpir needs sigma_n > 0");
  }
  if (!(dps_zeta >= 0.0) || !std::isfinite(dps_zeta)) {
    throw std::invalid_argument("dps_zeta must be finite and non-negative");
  }
  if (!(diffpir_lambda > 0.0)) throw std::invalid_argument("diffpir_lambda must be positive");
  if (!(diffpir_zeta >= 0.0 && diffpir_zeta <= 1.0)) {
    throw std::invalid_argument("diffpir_zeta must lie in [0, 1]");
  }
  if (!(cg_tol > 0.0) || cg_max_iter < 1) throw std::invalid_argument("invalid CG settings");
  if (threads < 1 || patch_batch < 1) {
    throw std::invalid_argument("threads and patch_batch must be >= 1");
  }
  if (const auto* sg = std::get_if<ShiftedGrid>(&eval_mode)) sg->grid_for_step(0);
  (void)karras_sigmas(schedule);
}

ForwardOperator SolverConfig::operator_for(int meas_height, int meas_width) const {
  return op == OperatorKind::Identity
             ? ForwardOperator::identity(meas_height, meas_width)
             : ForwardOperator::downsample_avg2(2 * meas_height, 2 * meas_width);
}

std::vector<GridOffset> RunReport::final_offsets() const {
  if (steps.empty() || !steps.back().offset) return {};
  return {*steps.back().offset};
}

DivergenceError::DivergenceError(std::string solver, int step)
    : std::runtime_error(solver + " diverged: non-finite iterate at step " + std::to_string(step)),
      step_(step) {}

ProximalStats diffpir_proximal_in_place(const ForwardOperator& op, const Image& y, Image& x,
                                        double sigma_n, double rho, double cg_tol,
                                        int cg_max_iter, MemoryLedger* ledger) {
  if (!(rho > 0.0)) throw std::invalid_argument("proximal rho must be positive");
  if (!(sigma_n > 0.0)) throw std::invalid_argument("proximal step needs sigma_n > 0");
  if (x.height() != op.input_height() || x.width() != op.input_width() ||
      y.height() != op.output_height() || y.width() != op.output_width()) {
    throw std::invalid_argument("proximal step: dimension mismatch with operator");
  }
  // Scaled by sigma_n^2: (H^T H + rho sigma_n^2 I) x = H^T y + rho sigma_n^2 x0_hat.
  const double w = rho * sigma_n * sigma_n;
  ProximalStats stats;
  if (op.kind() == OperatorKind::Identity) {
    auto xd = x.data();
    const auto yd = y.data();
    for (std::size_t i = 0; i < xd.size(); ++i) xd[i] = (yd[i] + w * xd[i]) / (1.0 + w);
    return stats;
  }
  BufferHold hold_b(ledger, "prox.rhs", x.bytes());
  Image b = adjoint(op, y);
  axpy(w, x, b);
  const CgResult cg = cg_solve(op, w, b, cg_tol, cg_max_iter, ledger);
  std::copy(cg.solution.data().begin(), cg.solution.data().end(), x.data().begin());
  stats.cg_iterations = cg.iterations;
  stats.cg_converged = cg.converged;
  return stats;
}

ProximalResult diffpir_proximal(const ForwardOperator& op, const Image& y, const Image& x0_hat,
                                double sigma_n, double rho, double cg_tol, int cg_max_iter) {
  ProximalResult res;
  res.x = x0_hat;
  static_cast<ProximalStats&>(res) =
      diffpir_proximal_in_place(op, y, res.x, sigma_n, rho, cg_tol, cg_max_iter);
  return res;
}

namespace {

constexpr std::uint64_t kInitSalt = 0x696E6974ULL;
constexpr std::uint64_t kRenoiseSalt = 0x72656E6FULL;

struct RunContext {
  MemoryLedger ledger;
  ForwardOperator op;
  SigmaSchedule sched;
  EvalOptions eval;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  RunContext(const SolverConfig& cfg, const Image& y)
      : op(cfg.operator_for(y.height(), y.width())), sched(karras_sigmas(cfg.schedule)) {
    ledger.set_event_logging(false);
    eval = {cfg.threads, cfg.patch_batch, &ledger};
  }
};

Image initial_iterate(const SolverConfig& cfg, const ForwardOperator& op, double sigma0) {
  Image x(op.input_height(), op.input_width());
  const CounterRng rng(derive_seed(cfg.seed, kInitSalt));
  auto d = x.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = sigma0 * rng.gaussian(i);
  return x;
}

std::optional<GridOffset> step_offset(const PriorEvalMode& mode, int step) {
  if (const auto* sg = std::get_if<ShiftedGrid>(&mode)) {
    return sg->policy.offset_for(sg->patch, step);
  }
  return std::nullopt;
}

void check_input(const SolverConfig& cfg, const Image& y) {
  cfg.validate();
  if (y.empty() || !y.all_finite()) throw std::invalid_argument("measurement is empty or not finite");
}

RunReport finish(RunContext& ctx, Image restored, Image initial, std::vector<StepDiagnostics> steps) {
  RunReport report;
  report.restored = std::move(restored);
  report.initial = std::move(initial);
  report.steps = std::move(steps);
  for (const auto& s : report.steps) {
    if (!s.cg_converged) ++report.cg_warnings;
  }
  report.peak_tracked_bytes = ctx.ledger.peak();
  report.final_live_bytes = ctx.ledger.live();
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  return report;
}

}  // namespace

RunReport dps_run(const SolverConfig& cfg, const Image& y) {
  check_input(cfg, y);
  if (cfg.solver != SolverKind::Dps) throw std::invalid_argument("dps_run called with non-DPS config");
  RunContext ctx(cfg, y);
  const DenoiserPrior& prior = *cfg.prior;
  const int n = ctx.sched.n_steps();

  std::vector<StepDiagnostics> steps;
  Image x0_init;
  Image restored;
  {
    BufferHold hold_y(&ctx.ledger, "y", y.bytes());
    BufferHold hold_x(&ctx.ledger, "x", image_bytes(ctx.op.input_height(), ctx.op.input_width()));
    Image x = initial_iterate(cfg, ctx.op, ctx.sched.sigma(0));
    x0_init = x;

    for (int i = 0; i < n; ++i) {
      const double s = ctx.sched.sigma(i);
      const double s_next = ctx.sched.sigma(i + 1);
      TrackedImage x0_hat = eval_prior_tracked(prior, x, s, cfg.eval_mode, i, ctx.eval);

      double rnorm = 0.0;
      TrackedImage grad;
      {
        BufferHold hold_r(&ctx.ledger, "residual", y.bytes());
        Image resid = apply(ctx.op, x0_hat.image);
        axpy(-1.0, y, resid);  // H x0_hat - y
        rnorm = norm2(resid);
        BufferHold hold_v(&ctx.ledger, "adjoint_residual", x.bytes());
        const Image v = adjoint(ctx.op, resid);
        hold_r.release();
        grad = eval_prior_vjp(prior, x, s, v, cfg.eval_mode, i, ctx.eval);
      }

      const double zeta = cfg.dps_zeta / std::max(rnorm, 1e-8);
      const double ratio = s_next / s;
      auto xd = x.data();
      const auto x0 = x0_hat.image.data();
      const auto g = grad.image.data();
      for (std::size_t k = 0; k < xd.size(); ++k) {
        xd[k] = x0[k] + ratio * (xd[k] - x0[k]) - zeta * g[k];
      }
      if (!x.all_finite()) throw DivergenceError("dps", i);
      steps.push_back({s, rnorm, 0, true, step_offset(cfg.eval_mode, i)});
    }
    restored = std::move(x);
  }
  return finish(ctx, std::move(restored), std::move(x0_init), std::move(steps));
}

RunReport diffpir_run(const SolverConfig& cfg, const Image& y) {
  check_input(cfg, y);
  if (cfg.solver != SolverKind::DiffPir) {
    throw std::invalid_argument("diffpir_run called with non-DiffPIR config");
  }
  RunContext ctx(cfg, y);
  const DenoiserPrior& prior = *cfg.prior;
  const int n = ctx.sched.n_steps();

  std::vector<StepDiagnostics> steps;
  Image x0_init;
  Image restored;
  {
    BufferHold hold_y(&ctx.ledger, "y", y.bytes());
    BufferHold hold_x(&ctx.ledger, "x", image_bytes(ctx.op.input_height(), ctx.op.input_width()));
    Image x = initial_iterate(cfg, ctx.op, ctx.sched.sigma(0));
    x0_init = x;

    for (int i = 0; i < n; ++i) {
      const double s = ctx.sched.sigma(i);
      const double s_next = ctx.sched.sigma(i + 1);
      TrackedImage x0_hat = eval_prior_tracked(prior, x, s, cfg.eval_mode, i, ctx.eval);
      const double rnorm = residual_norm(ctx.op, x0_hat.image, y);

      const double rho = cfg.diffpir_lambda * (cfg.sigma_n / s) * (cfg.sigma_n / s);
      // The proximal estimate overwrites x0_hat in its buffer.
      const ProximalStats prox =
          diffpir_proximal_in_place(ctx.op, y, x0_hat.image, cfg.sigma_n, rho, cfg.cg_tol,
                                    cfg.cg_max_iter, &ctx.ledger);

      renoise_in_place(x0_hat.image, x, s, s_next, cfg.diffpir_zeta,
                       derive_seed(cfg.seed, kRenoiseSalt + static_cast<std::uint64_t>(i)));
      if (!x.all_finite()) throw DivergenceError("diffpir", i);
      steps.push_back(
          {s, rnorm, prox.cg_iterations, prox.cg_converged, step_offset(cfg.eval_mode, i)});
    }
    restored = std::move(x);
  }
  return finish(ctx, std::move(restored), std::move(x0_init), std::move(steps));
}

RunReport solve(const SolverConfig& cfg, const Image& y) {
  return cfg.solver == SolverKind::Dps ? dps_run(cfg, y) : diffpir_run(cfg, y);
}

}  // namespace patchpnp
