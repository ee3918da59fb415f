#include "patchpnp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "patchpnp/image_io.hpp"
#include "patchpnp/metrics.hpp"

namespace patchpnp {

std::string_view to_string(Task task) { return task == Task::Denoise ? "denoise" : "sr2"; }

std::shared_ptr<const DenoiserPrior> PriorSpec::build() const {
  if (kind == "gaussian") return std::make_shared<GaussianAnalyticPrior>(tau, mu);
  if (kind == "conv") {
    return std::make_shared<ConvSmootherPrior>(ConvKernel::from_spec(kernel), blend_c, border);
  }
  throw ConfigError("unknown prior '" + kind + "' (expected gaussian or conv)");
}

void ExperimentConfig::validate() const {
  if (patch_sizes.empty() || paddings.empty() || offset_policies.empty() || seeds.empty()) {
    throw ConfigError("sweep lists must be non-empty");
  }
  for (int p : patch_sizes) {
    if (p < 0) throw ConfigError("patch sizes must be >= 0");
  }
  if (input && !std::filesystem::exists(*input)) {
    throw ConfigError("input file '" + input->string() + "' does not exist");
  }
  if (!input && (phantom_height <= 0 || phantom_width <= 0)) {
    throw ConfigError("phantom size must be positive");
  }
  if (edge_band <= 0) throw ConfigError("edge_band must be positive");
  if (patch_threads < 1 || patch_batch < 1) {
    throw ConfigError("patch_threads and patch_batch must be >= 1");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(d)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

template <typename Fn>
auto wrap(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }

  for (const auto& [key, v] : kv) {
    if (key == "task") {
      if (v == "denoise") cfg.task = Task::Denoise;
      else if (v == "sr2") cfg.task = Task::Sr2;
      else throw ConfigError("key 'task': expected denoise or sr2, got '" + v + "'");
    } else if (key == "input") {
      std::filesystem::path p(v);
      cfg.input = p.is_absolute() ? p : base_dir / p;
    } else if (key == "phantom") {
      cfg.phantom = wrap(key, [&] { return parse_phantom_kind(v); });
    } else if (key == "phantom_size") {
      const auto x = v.find('x');
      if (x == std::string::npos) {
        cfg.phantom_height = cfg.phantom_width = to_int<int>(key, v);
      } else {
        cfg.phantom_height = to_int<int>(key, v.substr(0, x));
        cfg.phantom_width = to_int<int>(key, v.substr(x + 1));
      }
    } else if (key == "phantom_seed") {
      cfg.phantom_seed = to_int<std::uint64_t>(key, v);
    } else if (key == "solver") {
      cfg.solver = wrap(key, [&] { return parse_solver(v); });
    } else if (key == "sigma_n") {
      cfg.sigma_n = to_double(key, v);
    } else if (key == "n_steps") {
      cfg.schedule.n_steps = to_int<int>(key, v);
    } else if (key == "sigma_min") {
      cfg.schedule.sigma_min = to_double(key, v);
    } else if (key == "sigma_max") {
      cfg.schedule.sigma_max = to_double(key, v);
    } else if (key == "schedule_rho") {
      cfg.schedule.rho = to_double(key, v);
    } else if (key == "prior") {
      cfg.prior.kind = v;
    } else if (key == "prior_tau") {
      cfg.prior.tau = to_double(key, v);
    } else if (key == "prior_mu") {
      cfg.prior.mu = to_double(key, v);
    } else if (key == "kernel") {
      const bool builtin = v == "box3" || v == "box5" || v == "binomial3" || v == "binomial5";
      const std::filesystem::path p(v);
      cfg.prior.kernel = builtin || p.is_absolute() ? v : (base_dir / p).string();
    } else if (key == "blend_c") {
      cfg.prior.blend_c = to_double(key, v);
    } else if (key == "prior_border") {
      cfg.prior.border = wrap(key, [&] { return parse_padding_mode(v); });
    } else if (key == "dps_zeta") {
      cfg.dps_zeta = to_double(key, v);
    } else if (key == "diffpir_lambda") {
      cfg.diffpir_lambda = to_double(key, v);
    } else if (key == "diffpir_zeta") {
      cfg.diffpir_zeta = to_double(key, v);
    } else if (key == "cg_tol") {
      cfg.cg_tol = to_double(key, v);
    } else if (key == "cg_max_iter") {
      cfg.cg_max_iter = to_int<int>(key, v);
    } else if (key == "context_margin") {
      cfg.context_margin = to_int<int>(key, v);
    } else if (key == "patch_batch") {
      cfg.patch_batch = to_int<int>(key, v);
    } else if (key == "patch_threads") {
      cfg.patch_threads = to_int<int>(key, v);
    } else if (key == "patch_sizes") {
      cfg.patch_sizes.clear();
      for (const auto& item : split_list(v)) {
        cfg.patch_sizes.push_back(item == "whole" ? 0 : to_int<int>(key, item));
      }
    } else if (key == "paddings") {
      cfg.paddings.clear();
      for (const auto& item : split_list(v)) {
        cfg.paddings.push_back(wrap(key, [&] { return parse_padding_mode(item); }));
      }
    } else if (key == "offset_policies") {
      cfg.offset_policies.clear();
      for (const auto& item : split_list(v)) {
        cfg.offset_policies.push_back(wrap(key, [&] { return parse_offset_policy(item); }));
      }
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& item : split_list(v)) cfg.seeds.push_back(to_int<std::uint64_t>(key, item));
    } else if (key == "psnr_peak") {
      cfg.psnr_peak = to_double(key, v);
    } else if (key == "edge_band") {
      cfg.edge_band = to_int<int>(key, v);
    } else if (key == "write_images") {
      cfg.write_images = to_bool(key, v);
    } else if (key == "output_dir") {
      const std::filesystem::path p(v);
      cfg.output_dir = p.is_absolute() ? p : base_dir / p;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.has_parent_path() ? path.parent_path() : ".");
}

namespace {

constexpr const char* kColumns[] = {"task",      "solver",     "patch",          "padding",
                                    "policy",    "seed",       "psnr",           "seam_score",
                                    "edge_band_rmse", "peak_bytes", "wall_time", "cg_warnings"};

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double_field(const std::string& s) {
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::invalid_argument("bad CSV number '" + s + "'");
  return d;
}

}  // namespace

std::string csv_header() {
  std::string h;
  for (const char* c : kColumns) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

std::string to_csv_line(const CsvRow& r) {
  std::ostringstream os;
  os << r.task << ',' << r.solver << ',' << r.patch << ',' << r.padding << ',' << r.policy << ','
     << r.seed << ',' << fmt_double(r.psnr) << ',' << fmt_double(r.seam_score) << ','
     << fmt_double(r.edge_band_rmse) << ',' << r.peak_bytes << ',' << fmt_double(r.wall_time)
     << ',' << r.cg_warnings;
  return os.str();
}

CsvRow parse_csv_line(std::string_view line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur += c;
    }
  }
  f.push_back(cur);
  if (f.size() != std::size(kColumns)) {
    throw std::invalid_argument("CSV row has " + std::to_string(f.size()) + " fields, expected " +
                                std::to_string(std::size(kColumns)));
  }
  CsvRow r;
  r.task = f[0];
  r.solver = f[1];
  r.patch = std::stoi(f[2]);
  r.padding = f[3];
  r.policy = f[4];
  r.seed = std::stoull(f[5]);
  r.psnr = parse_double_field(f[6]);
  r.seam_score = parse_double_field(f[7]);
  r.edge_band_rmse = parse_double_field(f[8]);
  r.peak_bytes = std::stoll(f[9]);
  r.wall_time = parse_double_field(f[10]);
  r.cg_warnings = std::stoi(f[11]);
  return r;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> pts;
  for (int p : cfg.patch_sizes) {
    if (p == 0) {
      // Padding and offset policy have no effect without tiling.
      for (std::uint64_t s : cfg.seeds) pts.push_back({0, cfg.paddings[0], cfg.offset_policies[0], s});
      continue;
    }
    for (PaddingMode pad : cfg.paddings) {
      for (OffsetPolicyKind pol : cfg.offset_policies) {
        for (std::uint64_t s : cfg.seeds) pts.push_back({p, pad, pol, s});
      }
    }
  }
  return pts;
}

Image load_truth(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.input) return read_image(*cfg.input);
  return gen_phantom(
      {cfg.phantom, cfg.phantom_height, cfg.phantom_width, cfg.phantom_seed.value_or(seed)});
}

SolverConfig solver_config_for(const ExperimentConfig& cfg, const SweepPoint& point) {
  SolverConfig sc;
  sc.solver = cfg.solver;
  sc.op = cfg.task == Task::Denoise ? OperatorKind::Identity : OperatorKind::DownsampleAvg2;
  sc.sigma_n = cfg.sigma_n;
  sc.schedule = cfg.schedule;
  sc.prior = cfg.prior.build();
  if (point.patch > 0) {
    sc.eval_mode = ShiftedGrid{point.patch, cfg.context_margin, point.padding,
                               OffsetPolicy{point.policy, point.seed}};
  } else {
    sc.eval_mode = WholeImage{};
  }
  sc.dps_zeta = cfg.dps_zeta;
  sc.diffpir_lambda = cfg.diffpir_lambda;
  sc.diffpir_zeta = cfg.diffpir_zeta;
  sc.seed = point.seed;
  sc.cg_tol = cfg.cg_tol;
  sc.cg_max_iter = cfg.cg_max_iter;
  sc.threads = cfg.patch_threads;
  sc.patch_batch = cfg.patch_batch;
  return sc;
}

PointResult run_point(const ExperimentConfig& cfg, const SweepPoint& point) {
  PointResult res;
  res.point = point;
  res.truth = load_truth(cfg, point.seed);
  SolverConfig sc;
  try {
    sc = solver_config_for(cfg, point);
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const ForwardOperator op = cfg.task == Task::Denoise
                                 ? ForwardOperator::identity(res.truth.height(), res.truth.width())
                                 : ForwardOperator::downsample_avg2(res.truth.height(),
                                                                    res.truth.width());
  res.measurement = measure(op, NoiseModel{cfg.sigma_n, point.seed}, res.truth);
  res.report = solve(sc, res.measurement);

  CsvRow& row = res.row;
  row.task = std::string(to_string(cfg.task));
  row.solver = std::string(to_string(cfg.solver));
  row.patch = point.patch;
  row.padding = std::string(to_string(point.padding));
  row.policy = std::string(to_string(point.policy));
  row.seed = point.seed;
  row.psnr = psnr(res.report.restored, res.truth, cfg.psnr_peak);
  const auto offsets = res.report.final_offsets();
  row.seam_score = point.patch > 0
                       ? seam_artifact_score(res.report.restored, point.patch, offsets, point.seed)
                       : std::nan("");
  row.edge_band_rmse = edge_band_rmse(res.report.restored, res.truth, cfg.edge_band);
  row.peak_bytes = res.report.peak_tracked_bytes;
  row.wall_time = res.report.wall_time;
  row.cg_warnings = res.report.cg_warnings;
  return res;
}

namespace {

std::string image_stem(const CsvRow& r) {
  return r.task + "_" + r.solver + "_p" + std::to_string(r.patch) + "_" + r.padding + "_" +
         r.policy + "_s" + std::to_string(r.seed);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.output_dir)) {
    throw IoError("cannot create output directory '" + cfg.output_dir.string() + "'");
  }

  const auto points = sweep_points(cfg);
  ExperimentResult result;
  result.points.resize(points.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        result.points[i] = run_point(cfg, points[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = points.size();
      }
    }
  };
  const int n_workers = std::clamp(workers, 1, static_cast<int>(points.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  result.csv_path = cfg.output_dir / "results.csv";
  std::ofstream csv(result.csv_path, std::ios::trunc);
  if (!csv) throw IoError("cannot write '" + result.csv_path.string() + "'");
  csv << csv_header() << '\n';
  for (const auto& p : result.points) {
    csv << to_csv_line(p.row) << '\n';
    if (cfg.write_images) {
      const auto stem = cfg.output_dir / image_stem(p.row);
      write_f32i(stem.string() + ".f32i", p.report.restored);
      write_pgm(stem.string() + ".pgm", p.report.restored);
    }
  }
  if (!csv) throw IoError("failed writing '" + result.csv_path.string() + "'");
  return result;
}

}  // namespace patchpnp
