// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance                 all criteria
//   acceptance --criterion 4   just one

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "patchpnp/experiment.hpp"
#include "patchpnp/metrics.hpp"
#include "patchpnp/random.hpp"
#include "patchpnp/solvers.hpp"

using namespace patchpnp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Image gaussian_image(int h, int w, std::uint64_t seed) {
  Image img(h, w);
  const CounterRng rng(seed, 31);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.gaussian(i);
  return img;
}

double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// 1. DiffPIR with the analytic Gaussian prior against the Wiener solution.
Outcome wiener_oracle() {
  const double tau = 1.0;
  const double sigma_n = 0.2;
  const Image truth = gen_phantom({PhantomKind::SheppEllipses, 64, 64, 0});
  const auto op = ForwardOperator::identity(64, 64);
  const Image y = measure(op, NoiseModel{sigma_n, 0}, truth);
  const Image wiener = (tau * tau / (tau * tau + sigma_n * sigma_n)) * y;

  SolverConfig cfg;
  cfg.solver = SolverKind::DiffPir;
  cfg.prior = std::make_shared<GaussianAnalyticPrior>(tau, 0.0);
  cfg.sigma_n = sigma_n;
  cfg.diffpir_zeta = 0.0;
  cfg.schedule.n_steps = 100;
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport rep = solve(cfg, y);
  const double elapsed = seconds_since(t0);
  const double err = rmse(rep.restored, wiener);

  double best = err;
  double best_lambda = cfg.diffpir_lambda;
  for (double lambda : {1e-4, 1e-2, 1e-1, 1.0, 10.0, 1e3, 1e4}) {
    cfg.diffpir_lambda = lambda;
    const double e = rmse(solve(cfg, y).restored, wiener);
    if (e < best) {
      best = e;
      best_lambda = lambda;
    }
  }
  return {err <= 1e-3 && elapsed < 5.0,
          "rmse=" + fmt("%.4g", err) + " (<= 1e-3), time=" + fmt("%.3f", elapsed) +
              "s (< 5s); lowest rmse over lambda grid " + fmt("%.4g", best) + " at lambda=" +
              fmt("%g", best_lambda)};
}

// 2. Tiled evaluation is exact for pointwise priors, and for the smoother given enough context.
Outcome patch_whole_exactness() {
  const CounterRng rng(2024);
  double worst_pointwise = 0.0;
  double worst_conv = 0.0;
  for (std::uint64_t c = 0; c < 20; ++c) {
    const int h = 2 * (8 + static_cast<int>(rng.below(10 * c, 17)));
    const int w = 2 * (8 + static_cast<int>(rng.below(10 * c + 1, 17)));
    const int p = 4 + static_cast<int>(rng.below(10 * c + 2, 13));
    const int m = static_cast<int>(rng.below(10 * c + 3, 3));
    const auto pad = rng.below(10 * c + 4, 2) ? PaddingMode::Reflect : PaddingMode::Zero;
    const auto policy = static_cast<OffsetPolicyKind>(rng.below(10 * c + 5, 3));
    const auto solver = rng.below(10 * c + 6, 2) ? SolverKind::Dps : SolverKind::DiffPir;
    const auto opk = rng.below(10 * c + 7, 2) ? OperatorKind::DownsampleAvg2 : OperatorKind::Identity;
    const double tau = 0.3 + rng.uniform(10 * c + 8);
    const ShiftedGrid grid{p, m, pad, OffsetPolicy{policy, c}};

    SolverConfig cfg;
    cfg.solver = solver;
    cfg.op = opk;
    cfg.prior = std::make_shared<GaussianAnalyticPrior>(tau, 0.1);
    cfg.schedule.n_steps = 10;
    cfg.seed = c;
    const Image y = opk == OperatorKind::Identity ? gaussian_image(h, w, c)
                                                  : gaussian_image(h / 2, w / 2, c);
    const RunReport whole = solve(cfg, y);
    cfg.eval_mode = grid;
    const RunReport tiled = solve(cfg, y);
    worst_pointwise = std::max(worst_pointwise, max_abs_diff(whole.restored, tiled.restored));

    // Smoother with margin >= radius: interior pixels agree with the whole image.
    const int k = rng.below(10 * c + 9, 2) ? 5 : 3;
    const int r = k / 2;
    const ConvSmootherPrior conv(ConvKernel::binomial(k), 0.4, PaddingMode::Reflect);
    const ShiftedGrid cgrid{p, r + m, pad, OffsetPolicy{policy, c}};
    const Image x = gaussian_image(h, w, 100 + c);
    const Image dw = eval_prior(conv, x, 0.7, WholeImage{}, 0);
    for (int step = 0; step < 3; ++step) {
      const Image dt = eval_prior(conv, x, 0.7, cgrid, step);
      for (int yy = r; yy < h - r; ++yy) {
        for (int xx = r; xx < w - r; ++xx) {
          worst_conv = std::max(worst_conv, std::abs(dw(yy, xx) - dt(yy, xx)));
        }
      }
    }
  }
  return {worst_pointwise <= 1e-12 && worst_conv <= 1e-12,
          "20 configs: pointwise max|diff|=" + fmt("%.3g", worst_pointwise) +
              ", smoother interior max|diff|=" + fmt("%.3g", worst_conv) + " (<= 1e-12)"};
}

ExperimentConfig fixture(PhantomKind phantom) {
  ExperimentConfig cfg;
  cfg.task = Task::Denoise;
  cfg.phantom = phantom;
  cfg.phantom_height = cfg.phantom_width = 64;
  cfg.solver = SolverKind::DiffPir;
  cfg.sigma_n = 0.1;
  cfg.diffpir_lambda = 100.0;
  cfg.diffpir_zeta = 0.3;
  cfg.prior.kind = "conv";
  cfg.prior.kernel = "box3";
  cfg.prior.blend_c = 0.1;
  cfg.prior.border = PaddingMode::Reflect;
  cfg.context_margin = 0;
  cfg.edge_band = 4;
  return cfg;
}

// 3. Seeded random offsets leave weaker seams than a fixed grid.
Outcome seam_smoothing() {
  const ExperimentConfig cfg = fixture(PhantomKind::SmoothRandomField);
  double fixed = 0.0;
  double random = 0.0;
  const int seeds = 10;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    fixed += run_point(cfg, {16, PaddingMode::Reflect, OffsetPolicyKind::FixedZero, s}).row.seam_score;
    random += run_point(cfg, {16, PaddingMode::Reflect, OffsetPolicyKind::SeededRandom, s}).row.seam_score;
  }
  fixed /= seeds;
  random /= seeds;
  return {random < fixed, "mean seam score: seeded_random=" + fmt("%.5f", random) +
                              " < fixed_zero=" + fmt("%.5f", fixed) + " over 10 seeds"};
}

// 4. Reflection padding beats zero padding near the image border.
Outcome padding_artifact() {
  const ExperimentConfig cfg = fixture(PhantomKind::DiscOnBackground);
  double reflect = 0.0;
  double zero = 0.0;
  int strict = 0;
  const int seeds = 10;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const double r =
        run_point(cfg, {16, PaddingMode::Reflect, OffsetPolicyKind::SeededRandom, s}).row.edge_band_rmse;
    const double z =
        run_point(cfg, {16, PaddingMode::Zero, OffsetPolicyKind::SeededRandom, s}).row.edge_band_rmse;
    reflect += r;
    zero += z;
    strict += r < z;
  }
  reflect /= seeds;
  zero /= seeds;
  return {reflect <= zero && strict >= 8,
          "mean edge-band rmse: reflect=" + fmt("%.5f", reflect) + " <= zero=" + fmt("%.5f", zero) +
              ", strictly better on " + std::to_string(strict) + "/10 seeds (>= 8)"};
}

// 5. Peak tracked memory against patch size at 256x256.
Outcome memory_shape() {
  const int n = 256;
  const std::int64_t N = static_cast<std::int64_t>(n) * n;
  SolverConfig cfg;
  cfg.solver = SolverKind::DiffPir;
  cfg.prior = std::make_shared<ConvSmootherPrior>(ConvKernel::box(3), 0.1);
  cfg.sigma_n = 0.1;
  cfg.schedule.n_steps = 5;
  const Image truth = gen_phantom({PhantomKind::SheppEllipses, n, n, 0});
  const Image y = measure(ForwardOperator::identity(n, n), NoiseModel{0.1, 0}, truth);

  const std::vector<int> patches{256, 128, 64, 32};
  std::vector<std::int64_t> peak;
  bool inventory_ok = true;
  for (int p : patches) {
    cfg.eval_mode = ShiftedGrid{p, 0, PaddingMode::Reflect, OffsetPolicy{OffsetPolicyKind::SeededRandom, 0}};
    const RunReport rep = solve(cfg, y);
    peak.push_back(rep.peak_tracked_bytes);
    // y, x, x0_hat plus one tile's input, output and padded convolution copy.
    const std::int64_t model = 8 * (3 * N + 2 * std::int64_t{p} * p + std::int64_t{p + 2} * (p + 2));
    inventory_ok = inventory_ok && rep.peak_tracked_bytes == model && rep.final_live_bytes == 0;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < peak.size(); ++i) monotone = monotone && peak[i] <= peak[i - 1];
  const double r128 = static_cast<double>(peak[1]) / static_cast<double>(peak[0]);
  const double r32 = static_cast<double>(peak[3]) / static_cast<double>(peak[2]);
  std::string detail = "peaks(256,128,64,32)=";
  for (std::size_t i = 0; i < peak.size(); ++i) detail += (i ? "," : "") + std::to_string(peak[i]);
  detail += " bytes; p128/p256=" + fmt("%.3f", r128) + " (<= 0.85), p32/p64=" + fmt("%.3f", r32) +
            " (>= 0.90), monotone=" + (monotone ? "yes" : "no") +
            ", inventory model " + (inventory_ok ? "exact" : "MISMATCH");
  return {monotone && r128 <= 0.85 && r32 >= 0.90 && inventory_ok, detail};
}

// Dense oracle for (H^T H + rho I) on a 4x4 image with 2x2 averaging.
std::vector<double> dense_sr_solve(double rho, const Image& b) {
  const int n = 16;
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int bi = (i / 4 / 2) * 2 + (i % 4) / 2;
      const int bj = (j / 4 / 2) * 2 + (j % 4) / 2;
      A[i][j] = (bi == bj ? 1.0 / 16.0 : 0.0) + (i == j ? rho : 0.0);
    }
    A[i][n] = b.data()[i];
  }
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    }
    std::swap(A[k], A[piv]);
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = A[i][k] / A[k][k];
      for (int j = k; j <= n; ++j) A[i][j] -= f * A[k][j];
    }
  }
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = A[i][n] / A[i][i];
  return x;
}

// 6. Adjoint, CG and VJP numerics.
Outcome numerics() {
  std::string detail;
  bool ok = true;

  auto t0 = std::chrono::steady_clock::now();
  double adj = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    for (const auto& op : {ForwardOperator::identity(32, 48), ForwardOperator::downsample_avg2(32, 48)}) {
      const Image x = gaussian_image(32, 48, 2 * s);
      const Image v = gaussian_image(op.output_height(), op.output_width(), 2 * s + 1);
      const double lhs = dot(apply(op, x), v);
      const double rhs = dot(x, adjoint(op, v));
      adj = std::max(adj, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    }
  }
  double t = seconds_since(t0);
  ok = ok && adj <= 1e-10 && t < 1.0;
  detail += "adjoint rel=" + fmt("%.2g", adj) + " (" + fmt("%.3f", t) + "s)";

  t0 = std::chrono::steady_clock::now();
  double cg_err = 0.0;
  const auto op = ForwardOperator::downsample_avg2(4, 4);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double rho = std::pow(10.0, -3.0 + 0.25 * static_cast<double>(s));
    const Image b = gaussian_image(4, 4, 500 + s);
    const auto direct = dense_sr_solve(rho, b);
    const CgResult cg = cg_solve(op, rho, b, 1e-14, 100);
    double e2 = 0.0;
    double r2 = 0.0;
    for (int i = 0; i < 16; ++i) {
      e2 += (cg.solution.data()[i] - direct[i]) * (cg.solution.data()[i] - direct[i]);
      r2 += direct[i] * direct[i];
    }
    cg_err = std::max(cg_err, std::sqrt(e2 / r2));
  }
  t = seconds_since(t0);
  ok = ok && cg_err <= 1e-8 && t < 1.0;
  detail += "; cg vs dense rel=" + fmt("%.2g", cg_err) + " (" + fmt("%.3f", t) + "s)";

  t0 = std::chrono::steady_clock::now();
  double vjp_err = 0.0;
  const ConvSmootherPrior conv(ConvKernel(3, {1, 2, 0, 3, 4, 1, 0, 5, 2}), 0.3);
  const GaussianAnalyticPrior gauss(0.8, 0.1);
  const std::vector<PriorEvalMode> modes{
      WholeImage{}, ShiftedGrid{5, 0, PaddingMode::Zero, OffsetPolicy{OffsetPolicyKind::SeededRandom, 1}},
      ShiftedGrid{4, 1, PaddingMode::Reflect, OffsetPolicy{OffsetPolicyKind::CycleHalf, 0}}};
  for (const DenoiserPrior* prior : {static_cast<const DenoiserPrior*>(&conv),
                                     static_cast<const DenoiserPrior*>(&gauss)}) {
    for (const auto& mode : modes) {
      const Image x = gaussian_image(12, 10, 700);
      const Image v = gaussian_image(12, 10, 701);
      const Image g = eval_prior_vjp(*prior, x, 0.5, v, mode, 1).image;
      const double h = 1e-5;
      Image fd(12, 10);
      for (std::size_t i = 0; i < x.size(); ++i) {
        Image xp = x;
        Image xm = x;
        xp.data()[i] += h;
        xm.data()[i] -= h;
        fd.data()[i] = (dot(eval_prior(*prior, xp, 0.5, mode, 1), v) -
                        dot(eval_prior(*prior, xm, 0.5, mode, 1), v)) / (2 * h);
      }
      vjp_err = std::max(vjp_err, norm2(g - fd) / norm2(fd));
    }
  }
  t = seconds_since(t0);
  ok = ok && vjp_err <= 1e-4 && t < 1.0;
  detail += "; vjp vs finite diff rel=" + fmt("%.2g", vjp_err) + " (" + fmt("%.3f", t) + "s)";
  detail += "; limits 1e-10 / 1e-8 / 1e-4, each < 1s";
  return {ok, detail};
}

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> csv_without_wall_time(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  std::getline(in, line);
  out.push_back(line);
  while (std::getline(in, line)) {
    CsvRow r = parse_csv_line(line);
    r.wall_time = 0.0;
    out.push_back(to_csv_line(r));
  }
  return out;
}

// 7. Repeated runs are byte-identical.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "patchpnp_acceptance_det";
  fs::remove_all(root);
  const std::string base =
      "phantom = shepp\nphantom_size = 32\nn_steps = 12\nprior = conv\nblend_c = 0.2\n"
      "patch_sizes = whole, 8\npaddings = zero, reflect\n"
      "offset_policies = fixed_zero, cycle_half, seeded_random\nseeds = 3, 4\n";
  int compared = 0;
  bool identical = true;
  for (const char* solver : {"dps", "diffpir"}) {
    for (const char* task : {"denoise", "sr2"}) {
      const std::string text = base + "solver = " + solver + "\ntask = " + task + "\n";
      ExperimentConfig a = parse_config(text + "output_dir = a\n", root);
      ExperimentConfig b = parse_config(text + "output_dir = b\npatch_threads = 2\n", root);
      run_experiment(a, 1);
      run_experiment(b, 2);
      identical = identical && csv_without_wall_time(a.output_dir / "results.csv") ==
                                   csv_without_wall_time(b.output_dir / "results.csv");
      for (const auto& e : fs::directory_iterator(a.output_dir)) {
        if (e.path().extension() == ".csv") continue;
        identical = identical && file_bytes(e.path()) == file_bytes(b.output_dir / e.path().filename());
        ++compared;
      }
    }
  }
  fs::remove_all(root);
  return {identical && compared > 0,
          std::to_string(compared) + " image files and 4 CSVs compared across two runs: " +
              (identical ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"wiener oracle convergence", wiener_oracle},
      {"patch/whole exactness", patch_whole_exactness},
      {"seam smoothing", seam_smoothing},
      {"padding artifact", padding_artifact},
      {"memory shape", memory_shape},
      {"numerics", numerics},
      {"determinism", determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "criterion must be 1..%zu\n", criteria.size());
    return 2;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
