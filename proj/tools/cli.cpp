#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gpfractal/conditions.hpp"
#include "gpfractal/config.hpp"
#include "gpfractal/dimension.hpp"
#include "gpfractal/energy.hpp"
#include "gpfractal/errors.hpp"
#include "gpfractal/format.hpp"
#include "gpfractal/fractal_sets.hpp"
#include "gpfractal/gp_sim.hpp"
#include "gpfractal/hitting.hpp"
#include "gpfractal/report.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gpfractal::cli {

namespace {

constexpr std::uint64_t kMaxPaths = 10'000'000;
constexpr std::uint64_t kMaxGrid = 8192;
constexpr std::uint64_t kMaxDim = 64;

struct Payload {
  std::string name;
  std::string bytes;
};

struct Run {
  bool trace = false;
  std::vector<Payload> files;

  void add(std::string name, std::string bytes) { files.push_back({std::move(name), std::move(bytes)}); }
  void add_json(std::string name, const Json& j) { add(std::move(name), j.dump(2) + "\n"); }
};

std::uint64_t seed_of(const ConfigNode& cfg) { return cfg.unsigned_int("seed"); }

std::size_t dim_of(const ConfigNode& cfg) { return cfg.count_in("d", 1, kMaxDim); }

template <class Fn>
std::string csv(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

void cmd_simulate(const ConfigNode& cfg, Run& run) {
  const auto f = parse_gamma(cfg);
  const std::size_t d = dim_of(cfg);
  const std::size_t n_paths = cfg.count_in("n_paths", 1, kMaxPaths);
  const std::size_t grid_n = cfg.count_in("grid_n", 2, kMaxGrid);
  const TimeSet E = parse_time_set(cfg.at("E"), f);
  const CovKind kind = parse_cov_kind(cfg);
  const std::string format = cfg.string("format", "both");
  if (format != "csv" && format != "binary" && format != "both") cfg.fail("format", "expected \"csv\", \"binary\" or \"both\"");

  const auto grid = time_grid(E, grid_n);
  CovMatrix cov = build_covariance(f, grid, kind);
  cov.factorize();
  const PathBatch batch = sample_paths(cov, d, n_paths, seed_of(cfg));
  if (format != "binary") run.add("paths.csv", csv([&](std::ostream& o) { write_paths_csv(batch, o); }));
  if (format != "csv") run.add("paths.bin", csv([&](std::ostream& o) { write_paths_binary(batch, o); }));
  run.add_json("report.json", Json{{"grid_points", grid.size()},
                                   {"d", d},
                                   {"n_paths", n_paths},
                                   {"seed", batch.seed},
                                   {"jitter", cov.jitter_used()},
                                   {"cholesky_residual", json_number(cov.cholesky_residual())}});
}

void cmd_dims(const ConfigNode& cfg, Run& run) {
  const auto f = parse_gamma(cfg);
  const std::size_t d = dim_of(cfg);
  const std::size_t n_paths = cfg.count_in("n_paths", 1, kMaxPaths);
  const std::size_t grid_n = cfg.count_in("grid_n", 2, kMaxGrid, 4096);
  const TimeSet E = parse_time_set(cfg.at("E"), f);
  const CovKind kind = parse_cov_kind(cfg);
  const std::uint64_t seed = seed_of(cfg);

  const auto image = image_dimension_experiment(f, E, d, n_paths, grid_n, seed, kind);
  Json report{{"image", to_json(image)}};
  std::string counts = csv([&](std::ostream& o) { write_counts_csv(image.dim_delta, -1, o, true); });
  std::string per_path = csv([&](std::ostream& o) {
    o << "path,dim_image\n";
    for (std::size_t p = 0; p < image.per_path.size(); ++p) o << p << ',' << format_double(image.per_path[p]) << '\n';
  });
  if (cfg.has("intersection")) {
    const ConfigNode sec = cfg.at("intersection");
    const SpatialSet F = parse_spatial_set(sec.at("F"), d);
    const double tol = sec.number("tol");
    if (!(tol > 0.0)) sec.fail("tol", "must be positive");
    const std::size_t min_points = sec.count_in("min_points", 2, kMaxGrid, 64);
    const std::size_t isect_paths = sec.count_in("n_paths", 1, kMaxPaths, n_paths);
    const auto rep = intersection_dimension_experiment(f, E, F, d, isect_paths, tol, seed, grid_n, min_points, kind);
    report["intersection"] = to_json(rep);
  }
  run.add_json("report.json", report);
  run.add("counts.csv", std::move(counts));
  run.add("per_path.csv", std::move(per_path));
}

void cmd_hit(const ConfigNode& cfg, Run& run) {
  const auto f = parse_gamma(cfg);
  const std::size_t d = dim_of(cfg);
  const std::size_t n_paths = cfg.count_in("n_paths", 1, kMaxPaths);
  const std::uint64_t seed = seed_of(cfg);
  HitOptions opt;
  opt.grid_n = cfg.count_in("grid_n", 2, kMaxGrid, 2048);
  opt.kind = parse_cov_kind(cfg);
  Json report = Json::object();

  if (cfg.has("targets")) {
    const TimeSet E = parse_time_set(cfg.at("E"), f);
    const double guard = grid_guard(f, E, time_grid(E, opt.grid_n), d);
    const ConfigNode list = cfg.at("targets");
    if (list.size() == 0) list.fail("needs at least one target");
    std::vector<std::string> labels;
    std::vector<SpatialSet> targets;
    std::vector<double> tols;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const ConfigNode t = list.at(i);
      labels.push_back(t.string("label", "target" + std::to_string(i)));
      targets.push_back(parse_spatial_set(t.at("F"), d));
      if (t.has("tol") && t.at("tol").json().is_string()) {
        if (t.string("tol") != "guard") t.fail("tol", "expected a number or \"guard\"");
        tols.push_back(guard);
      } else {
        tols.push_back(t.number("tol"));
        if (tols.back() < guard) {
          t.fail("tol", "grid too coarse for tol: tol " + format_double(tols.back()) + " is below the grid guard " +
                            format_double(guard));
        }
      }
    }
    const auto reps = hit_probability_mc(f, E, targets, d, tols, n_paths, seed, opt);
    Json rows = Json::array();
    for (std::size_t i = 0; i < reps.size(); ++i) {
      Json r = to_json(reps[i]);
      r["label"] = labels[i];
      rows.push_back(r);
    }
    report["targets"] = rows;
    run.add("hits.csv", csv([&](std::ostream& o) {
              for (std::size_t i = 0; i < reps.size(); ++i) write_hit_row_csv(labels[i], reps[i], o, i == 0);
            }));
    if (run.trace) {
      run.add("min_distance.csv", csv([&](std::ostream& o) {
                o << "label,path,min_distance\n";
                for (std::size_t i = 0; i < reps.size(); ++i) {
                  for (std::size_t p = 0; p < reps[i].min_distance.size(); ++p) {
                    o << labels[i] << ',' << p << ',' << format_double(reps[i].min_distance[p]) << '\n';
                  }
                }
              }));
    }
  }
  if (cfg.has("small_ball")) {
    const ConfigNode sb = cfg.at("small_ball");
    const double a = sb.number("a");
    const double b = sb.number("b");
    if (!(a > 0.0 && b > a)) sb.fail("need 0 < a < b");
    const double t0 = sb.number_in("t0", a, b);
    const auto radii = sb.numbers("radii");
    if (radii.size() < 2) sb.fail("radii", "needs at least two radii");
    for (double r : radii) {
      if (!(r > 0.0)) sb.fail("radii", "radii must be positive");
    }
    std::vector<double> z = sb.has("z") ? sb.numbers("z") : std::vector<double>(d, 0.0);
    if (z.size() != d) sb.fail("z", "expected " + std::to_string(d) + " coordinates");
    const std::size_t sb_paths = sb.count_in("n_paths", 1, kMaxPaths, n_paths);
    const std::size_t window_n = sb.count_in("window_n", 2, kMaxGrid, 64);
    const auto sweep = small_ball_sweep(f, a, b, t0, radii, z, sb_paths, seed, window_n, opt.kind);
    report["small_ball"] = to_json(sweep);
    run.add("small_ball.csv", csv([&](std::ostream& o) { write_small_ball_csv(sweep, o); }));
  }
  if (report.empty()) cfg.fail("expected \"targets\" and/or \"small_ball\"");
  run.add_json("report.json", report);
}

void cmd_capacity(const ConfigNode& cfg, Run& run) {
  const auto f = parse_gamma(cfg);
  const TimeSet E = parse_time_set(cfg.at("E"), f);
  const double beta = cfg.number("beta");
  if (!(beta > 0.0)) cfg.fail("beta", "must be positive");
  std::vector<double> res = cfg.numbers("resolutions");
  if (res.size() < 3) cfg.fail("resolutions", "needs at least three resolutions");
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!(res[i] > 0.0) || (i > 0 && !(res[i] < res[i - 1]))) cfg.fail("resolutions", "must be positive and strictly decreasing");
  }
  CapacityOptions opt;
  opt.tol = cfg.number("tol", opt.tol);
  opt.max_iter = static_cast<int>(cfg.count_in("max_iter", 1, 10'000'000, static_cast<std::uint64_t>(opt.max_iter)));
  opt.record_trace = run.trace;
  const std::size_t grid_n = cfg.count_in("grid_n", 2, kMaxGrid, 4096);
  const auto times = time_grid(E, grid_n);
  const auto model = MetricModel::stationary(f);

  CapacityReport rep;
  if (cfg.has("F")) {
    const std::size_t d = dim_of(cfg);
    const SpatialSet F = parse_spatial_set(cfg.at("F"), d);
    const double h_space = cfg.number("space_h", res.back());
    if (!(h_space > 0.0)) cfg.fail("space_h", "must be positive");
    const auto pts = F.sample(h_space);
    rep = product_capacity_estimate(times, pts, d, model, beta, res, opt);
  } else {
    rep = capacity_estimate(times, 1, model, beta, res, opt);
  }
  run.add_json("report.json", to_json(rep));
  run.add("capacity.csv", csv([&](std::ostream& o) { write_capacity_csv(rep, o); }));
  if (run.trace) run.add("trace.csv", csv([&](std::ostream& o) { write_capacity_trace_csv(rep, o); }));
}

void cmd_check_scale(const ConfigNode& cfg, Run& run) {
  std::vector<std::string> specs;
  std::vector<ScaleFunction> fams;
  if (cfg.has("families")) {
    const ConfigNode list = cfg.at("families");
    if (list.size() == 0) list.fail("needs at least one family");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const ConfigNode e = list.at(i);
      if (!e.json().is_string()) e.fail("expected a family spec string");
      try {
        fams.push_back(ScaleFunction::parse(e.json().get<std::string>()));
      } catch (const std::invalid_argument& ex) {
        e.fail(ex.what());
      }
    }
  } else {
    fams.push_back(parse_gamma(cfg));
  }
  const double eps = cfg.number("eps", 0.1);
  if (!(eps > 0.0 && eps < 1.0)) cfg.fail("eps", "must lie in (0, 1)");
  std::vector<double> L_grid;
  if (cfg.has("L_grid")) {
    const ConfigNode g = cfg.at("L_grid");
    const double lo = g.number("lo");
    const double hi = g.number("hi");
    const std::size_t n = g.count_in("n", 3, 10000);
    if (!(lo > 1.0 && hi > lo)) g.fail("need 1 < lo < hi");
    for (std::size_t i = 0; i < n; ++i) L_grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }

  std::ostringstream verdicts, traces;
  Json rows = Json::array();
  bool first = true;
  for (const auto& f : fams) {
    const std::string name = f.spec();
    Json fam{{"family", name}, {"conditions", Json::array()}};
    for (const ConditionVerdict& v :
         {check_strong_condition(f, L_grid), check_weak_condition(f, eps, L_grid), psi_sqrtlog_criterion(f, L_grid)}) {
      write_verdict_row_csv(name, v, verdicts, first);
      write_ratio_trace_csv(name, v, traces, first);
      first = false;
      fam["conditions"].push_back(to_json(v));
    }
    rows.push_back(fam);
  }
  run.add_json("report.json", Json{{"eps", eps}, {"families", rows}});
  run.add("verdicts.csv", verdicts.str());
  run.add("traces.csv", traces.str());
}

void cmd_cantor(const ConfigNode& cfg, Run& run) {
  const auto f = parse_gamma(cfg);
  const double zeta = cfg.number("zeta");
  if (!(zeta > 0.0)) cfg.fail("zeta", "must be positive");
  const int depth = static_cast<int>(cfg.count_in("depth", 0, CantorSet::kMaxDepth));
  const double eps0 = cfg.number("eps0", 1.0);
  if (!(eps0 > 0.0 && eps0 <= 1.0)) cfg.fail("eps0", "must lie in (0, 1]");
  const double origin = cfg.number("origin", 0.0);
  const int level = static_cast<int>(cfg.count_in("level", 0, static_cast<std::uint64_t>(depth), static_cast<std::uint64_t>(depth)));
  if (level > 20) cfg.fail("level", "at most 20 (2^20 intervals) can be written");
  const CantorSet set = build_cantor(f, zeta, depth, eps0, origin);
  Json j = to_json(set, level);
  if (depth >= 2) j["dim_delta"] = to_json(dim_delta_estimate(set));
  run.add_json("cantor.json", j);
  if (depth <= 20) run.add("atoms.csv", csv([&](std::ostream& o) { write_atoms_csv(cantor_measure(set), o); }));
}

void cmd_battery(const ConfigNode& cfg, Run& run) {
  const ConfigNode list = cfg.at("instances");
  if (list.size() == 0) list.fail("needs at least one instance");
  // γ and d may sit at the top level or on every instance; all instances must agree.
  const ConfigNode first = list.at(0);
  const ScaleFunction f = cfg.has("gamma") ? parse_gamma(cfg) : parse_gamma(first);
  const std::size_t d = cfg.has("d") ? dim_of(cfg) : dim_of(first);

  BatteryOptions opt;
  if (cfg.has("options")) {
    const ConfigNode o = cfg.at("options");
    opt.hit.grid_n = o.count_in("grid_n", 2, kMaxGrid, opt.hit.grid_n);
    opt.hit.kind = parse_cov_kind(o);
    opt.capacity_h = o.number("capacity_h", opt.capacity_h);
    if (!(opt.capacity_h > 0.0)) o.fail("capacity_h", "must be positive");
    opt.term_times = o.count_in("term_times", 3, KernelMatrix::kMaxAtoms, opt.term_times);
    opt.term_space_h = o.number("term_space_h", opt.term_space_h);
    if (!(opt.term_space_h > 0.0)) o.fail("term_space_h", "must be positive");
    opt.max_space_points = o.count_in("max_space_points", 1, 100000, opt.max_space_points);
    opt.content_times = o.count_in("content_times", 1, kMaxGrid, opt.content_times);
    opt.content_space_points = o.count_in("content_space_points", 1, 100000, opt.content_space_points);
    opt.menu_levels = static_cast<int>(o.count_in("menu_levels", 1, 30, static_cast<std::uint64_t>(opt.menu_levels)));
  }

  std::vector<BatteryInstance> battery;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const ConfigNode inst = list.at(i);
    if (inst.has("gamma") && parse_gamma(inst).spec() != f.spec()) inst.fail("gamma", "all instances must share gamma");
    if (inst.has("d") && dim_of(inst) != d) inst.fail("d", "all instances must share d");
    BatteryInstance b{inst.string("label", "instance" + std::to_string(i)), parse_time_set(inst.at("E"), f),
                      parse_spatial_set(inst.at("F"), d), inst.number("tol"),
                      inst.count_in("n_paths", 1, kMaxPaths, cfg.count_in("n_paths", 1, kMaxPaths, 1000)),
                      inst.has("seed") ? inst.unsigned_int("seed") : seed_of(cfg)};
    if (!(b.tol > 0.0)) inst.fail("tol", "must be positive");
    if (inst.has("dim_rho")) b.dim_rho = inst.number("dim_rho");
    battery.push_back(std::move(b));
  }
  if (battery.size() < 6) list.fail("a sandwich battery needs at least 6 instances");
  const auto rep = run_battery(f, d, battery, opt);
  run.add_json("report.json", to_json(rep));
  run.add("sandwich.csv", csv([&](std::ostream& o) { write_sandwich_csv(rep, o); }));
}

const std::map<std::string, std::function<void(const ConfigNode&, Run&)>>& commands() {
  static const std::map<std::string, std::function<void(const ConfigNode&, Run&)>> table{
      {"simulate", cmd_simulate}, {"dims", cmd_dims},     {"hit", cmd_hit},         {"capacity", cmd_capacity},
      {"check-scale", cmd_check_scale}, {"cantor", cmd_cantor}, {"battery", cmd_battery}};
  return table;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Applies --seed: the top-level seed, and for batteries every instance inherits it.
void apply_seed(Json& config, std::uint64_t seed) {
  config["seed"] = seed;
  if (config.contains("instances") && config["instances"].is_array()) {
    for (auto& inst : config["instances"]) {
      if (inst.is_object()) inst.erase("seed");
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-process fractal geometry experiments", "gpfractal"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool trace = false;
  app.add_option("--config", config_path, "JSON config (or a manifest.json from an earlier run)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads, "cap on worker threads (results do not depend on it)")->check(CLI::NonNegativeNumber);
  app.add_flag("--trace", trace, "also write per-iteration / per-path traces");
  for (const auto& [name, fn] : commands()) app.add_subcommand(name)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  const std::string command = app.get_subcommands().front()->get_name();

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  Run run;
  run.trace = trace;
  Json config;
  try {
    config = load_config_file(config_path);
    if (config.is_object() && config.contains("config_hash") && config.contains("config")) {
      if (config.value("command", "") != command) {
        throw ValidationError("command", "manifest was written by \"" + config.value("command", "") + "\"");
      }
      config = Json(config["config"]);
    }
    if (!config.is_object()) throw ValidationError("", "config must be a JSON object");
    if (seed) apply_seed(config, *seed);
    if (!config.contains("seed") && command != "check-scale" && command != "cantor") {
      throw ValidationError("seed", "missing required field (or pass --seed)");
    }
    commands().at(command)(ConfigNode(config, ""), run);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const DomainError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  Json outputs = Json::array();
  for (const auto& p : run.files) {
    const auto path = std::filesystem::path(out_dir) / p.name;
    std::ofstream f(path, std::ios::binary);
    f.write(p.bytes.data(), static_cast<std::streamsize>(p.bytes.size()));
    if (!f) {
      err << "error: cannot write " << path.string() << "\n";
      return kValidation;
    }
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a64(p.bytes)));
    outputs.push_back({{"file", p.name}, {"bytes", p.bytes.size()}, {"fnv1a", hash}});
    out << path.string() << "\n";
  }
  Json manifest{{"command", command},
                {"config_hash", config_hash(config)},
                {"seed", config.contains("seed") ? config["seed"] : Json(nullptr)},
                {"config", config},
                {"outputs", outputs},
                {"threads", threads},
                {"timings", {{"started_utc", started}, {"finished_utc", utc_now()}, {"wall_seconds", elapsed}}}};
  std::ofstream mf(std::filesystem::path(out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  out << (std::filesystem::path(out_dir) / "manifest.json").string() << "\n";
  return kOk;
}

}  // namespace gpfractal::cli
