#include "cpsi/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "cpsi/errors.hpp"
#include "cpsi/experiments.hpp"
#include "cpsi/inference.hpp"
#include "cpsi/serialize.hpp"

namespace cpsi {

namespace {

namespace fs = std::filesystem;

struct Common {
  int k = 1;
  int l = 1;
  int w = 0;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out_dir = ".";
};

struct Options {
  Common common;
  std::string input;
  bool header = false;
  bool dump_trace = false;
  // covariance
  std::string cov_path;
  std::string sigma_kind = "iid";
  double sigma2 = 1.0;
  double rho = 0.0;
  // inference
  std::string mode = "mc";
  double alpha = 0.05;
  double z_range = 20.0;
  double delta = 1e-6;
  bool wide_z_range = false;
  bool no_ci = false;
  // estimate-cov
  std::string kind = "ar1";
  // simulate
  std::string config_path;
  std::string scenario = "null";
  int trials = 0;
  std::string noise;
  double delta_mu = -1.0;
  std::vector<std::string> methods;
  bool emit_trials = false;
};

void add_common(CLI::App* app, Common& c, bool hp) {
  if (hp) {
    app->add_option("--k", c.k, "number of change points")->check(CLI::PositiveNumber);
    app->add_option("--l", c.l, "scan window half-length L")->check(CLI::PositiveNumber);
    app->add_option("--w", c.w, "location tolerance W")->check(CLI::NonNegativeNumber);
  }
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out-dir", c.out_dir, "output directory");
}

SequenceMatrix load(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw InputError("cannot open '" + o.input + "'");
  return parse_csv(in, o.header);
}

CovarianceModel covariance_for(const Options& o, int d, int n) {
  if (!o.cov_path.empty()) return covariance_from_json(read_json_file(o.cov_path), d, n);
  if (o.sigma_kind == "iid") return CovarianceModel::iid(d, n, o.sigma2);
  if (o.sigma_kind == "ar1") return CovarianceModel::ar1(d, n, o.sigma2, o.rho);
  throw InputError("unknown --sigma-kind '" + o.sigma_kind + "'");
}

std::vector<Conditioning> modes_for(const std::string& m) {
  if (m == "both") return {Conditioning::minimal, Conditioning::over};
  return {conditioning_from_string(m)};
}

fs::path prepare(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + c.out_dir + "'");
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, int argc,
                    const char* const* argv, Json params, double seconds) {
  Json args = Json::array();
  for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
  Json m{{"command", command},
         {"argv", args},
         {"parameters", std::move(params)},
         {"version", kVersion},
         {"wall_clock_seconds", seconds}};
  write_json_file((dir / "manifest.json").string(), m);
}

Json common_json(const Common& c, bool hp) {
  Json j;
  if (hp) j["hyperparameters"] = to_json(Hyperparameters{c.k, c.l, c.w});
  j["jobs"] = c.jobs;
  j["out_dir"] = c.out_dir;
  return j;
}

void print_detection(std::ostream& out, const Detection& det) {
  out << "score " << std::setprecision(10) << det.score << '\n';
  out << std::setw(4) << "k" << std::setw(10) << "location" << "  components\n";
  for (std::size_t k = 0; k < det.locations.size(); ++k) {
    out << std::setw(4) << k + 1 << std::setw(10) << det.locations[k] << " ";
    for (int c : det.components[k]) out << ' ' << to_external_component(c);
    out << '\n';
  }
}

int cmd_detect(const Options& o, int argc, const char* const* argv, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Hyperparameters hp{o.common.k, o.common.l, o.common.w};
  const SequenceMatrix x = load(o);
  const Detection det = detect(x, hp);
  const fs::path dir = prepare(o.common);
  write_json_file((dir / "detection.json").string(), to_json(det, hp));
  if (o.dump_trace) write_json_file((dir / "trace.json").string(), trace_to_json(det.trace));
  Json params = common_json(o.common, true);
  params["input"] = o.input;
  params["header"] = o.header;
  params["dump_trace"] = o.dump_trace;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "detect", argc, argv, params, secs);
  print_detection(out, det);
  return 0;
}

int cmd_infer(const Options& o, int argc, const char* const* argv, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Hyperparameters hp{o.common.k, o.common.l, o.common.w};
  SequenceMatrix x = load(o);
  CovarianceModel cov = covariance_for(o, x.components(), x.locations());
  const auto modes = modes_for(o.mode);
  InferenceOptions opts;
  opts.alpha = o.alpha;
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw InputError("--alpha must be in (0, 1)");
  opts.compute_ci = !o.no_ci;
  opts.search.half_width = o.z_range;
  opts.search.delta = o.delta;
  opts.search.wide_range = o.wide_z_range;
  const Json cov_json = covariance_to_json(cov);
  const SelectiveInference si(std::move(x), std::move(cov), hp);
  const auto results = si.infer_all(modes, opts, o.common.jobs);

  const fs::path dir = prepare(o.common);
  write_json_file((dir / "detection.json").string(), to_json(si.detection(), hp));
  if (o.dump_trace) write_json_file((dir / "trace.json").string(), trace_to_json(si.detection().trace));
  {
    std::ofstream csv(dir / "inference.csv");
    if (!csv) throw InputError("cannot write inference.csv");
    write_inference_csv(csv, results);
  }
  Json rows = Json::array();
  for (const auto& r : results) rows.push_back(to_json(r));
  write_json_file((dir / "inference.json").string(), rows);

  Json params = common_json(o.common, true);
  params["input"] = o.input;
  params["header"] = o.header;
  params["covariance"] = cov_json;
  if (!o.cov_path.empty()) params["cov_path"] = o.cov_path;
  params["mode"] = o.mode;
  params["alpha"] = o.alpha;
  params["compute_ci"] = opts.compute_ci;
  params["search"] = to_json(opts.search);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "infer", argc, argv, params, secs);

  out << std::setw(3) << "k" << std::setw(3) << "h" << std::setw(6) << "loc" << std::setw(6) << "comp"
      << std::setw(5) << "mode" << std::setw(12) << "stat" << std::setw(12) << "p_sel" << std::setw(12)
      << "p_naive" << std::setw(26) << "ci" << '\n';
  out << std::setprecision(4);
  for (const auto& r : results) {
    out << std::setw(3) << r.k + 1 << std::setw(3) << r.h + 1 << std::setw(6) << r.location << std::setw(6)
        << to_external_component(r.component) << std::setw(5) << to_string(r.mode) << std::setw(12)
        << r.stat << std::setw(12) << r.selective_p << std::setw(12) << r.naive_p;
    if (r.ci) {
      std::ostringstream ci;
      ci << std::setprecision(4) << '[' << r.ci->lo << ", " << r.ci->hi << ']';
      out << std::setw(26) << ci.str();
    }
    out << '\n';
  }
  return 0;
}

int cmd_estimate_cov(const Options& o, int argc, const char* const* argv, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const SequenceMatrix ref = load(o);
  Json j{{"xi", "identity"}};
  if (o.kind == "iid") {
    const double s2 = estimate_iid(ref);
    j["sigma"] = {{"kind", "iid"}, {"sigma2", s2}};
    out << "sigma2 " << std::setprecision(10) << s2 << '\n';
  } else if (o.kind == "ar1") {
    const Ar1Estimate e = estimate_ar1(ref);
    if (!(std::abs(e.rho) < 1.0)) throw NumericError("estimated rho is outside (-1, 1)");
    j["sigma"] = {{"kind", "ar1"}, {"sigma2", e.sigma2}, {"rho", e.rho}};
    j["gamma"] = e.gamma;
    out << "sigma2 " << std::setprecision(10) << e.sigma2 << "\nrho " << e.rho << '\n';
  } else {
    throw InputError("--kind must be iid or ar1");
  }
  const fs::path dir = prepare(o.common);
  write_json_file((dir / "covariance.json").string(), j);
  Json params = common_json(o.common, false);
  params["input"] = o.input;
  params["header"] = o.header;
  params["kind"] = o.kind;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "estimate-cov", argc, argv, params, secs);
  return 0;
}

int cmd_simulate(const Options& o, const CLI::App& sub, int argc, const char* const* argv,
                 std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  if (!o.config_path.empty()) {
    c = experiment_config_from_json(read_json_file(o.config_path));
  } else {
    c = default_config(scenario_from_string(o.scenario));
  }
  if (sub.count("--k")) c.hp.k = o.common.k;
  if (sub.count("--l")) c.hp.l = o.common.l;
  if (sub.count("--w")) c.hp.w = o.common.w;
  if (sub.count("--jobs")) c.jobs = o.common.jobs;
  if (o.trials > 0) c.n_trials = o.trials;
  if (!o.noise.empty()) c.noise = noise_from_string(o.noise);
  if (o.delta_mu >= 0.0) c.delta_mu = o.delta_mu;
  if (!o.methods.empty()) {
    c.methods.clear();
    for (const auto& m : o.methods) c.methods.push_back(method_from_string(m));
  }
  if (o.common.seed) {
    c.seed = *o.common.seed;
  } else if (o.config_path.empty()) {
    c.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) | std::random_device{}();
  }
  c.keep_trials = c.keep_trials || o.emit_trials;

  const ExperimentReport report = run_experiment(c);
  const fs::path dir = prepare(o.common);
  write_json_file((dir / "report.json").string(), to_json(report));
  if (o.emit_trials) {
    std::ofstream csv(dir / "trials.csv");
    if (!csv) throw InputError("cannot write trials.csv");
    write_trials_csv(csv, report.records);
  }
  Json params = common_json(o.common, false);
  params["config"] = to_json(c);
  params["emit_trials"] = o.emit_trials;
  if (!o.config_path.empty()) params["config_path"] = o.config_path;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "simulate", argc, argv, params, secs);

  out << to_string(c.scenario) << ", " << to_string(c.noise) << ", " << c.n_trials
      << " trials, seed " << c.seed << '\n';
  out << std::setw(7) << "method" << std::setw(8) << "tests" << std::setw(8) << "reject"
      << std::setw(10) << "rate" << std::setw(10) << "se";
  if (c.scenario == Scenario::ci) out << std::setw(12) << "mean_len" << std::setw(12) << "median_len";
  out << '\n' << std::setprecision(4) << std::fixed;
  for (const auto& s : report.methods) {
    out << std::setw(7) << to_string(s.method) << std::setw(8) << s.tests << std::setw(8) << s.rejections
        << std::setw(10) << s.rate << std::setw(10) << s.std_error;
    if (c.scenario == Scenario::ci) out << std::setw(12) << s.mean_ci_length << std::setw(12) << s.median_ci_length;
    if (s.insufficient) out << "  insufficient";
    out << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-dimensional change-point detection with selective inference"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* det = app.add_subcommand("detect", "detect change points in a CSV sequence");
  add_common(det, o.common, true);
  det->add_option("--input", o.input, "D x N CSV, one row per component")->required();
  det->add_flag("--header", o.header, "skip one header line");
  det->add_flag("--dump-trace", o.dump_trace, "also write the DP trace");

  auto* inf = app.add_subcommand("infer", "selective p-values and CIs for detected change points");
  add_common(inf, o.common, true);
  inf->add_option("--input", o.input, "D x N CSV")->required();
  inf->add_flag("--header", o.header, "skip one header line");
  inf->add_flag("--dump-trace", o.dump_trace, "also write the DP trace");
  inf->add_option("--cov", o.cov_path, "covariance config JSON");
  inf->add_option("--sigma-kind", o.sigma_kind, "iid or ar1 (without --cov)");
  inf->add_option("--sigma2", o.sigma2, "noise variance");
  inf->add_option("--rho", o.rho, "AR(1) coefficient");
  inf->add_option("--mode", o.mode, "mc, oc or both")->check(CLI::IsMember({"mc", "oc", "both"}));
  inf->add_option("--alpha", o.alpha, "CI level is 1 - alpha");
  inf->add_option("--z-range", o.z_range, "search half-width in units of sigma_eta");
  inf->add_option("--delta", o.delta, "line search step in units of sigma_eta");
  inf->add_flag("--paper-z-range", o.wide_z_range, "search [-1e6, 1e6] with absolute step 1e-6");
  inf->add_flag("--no-ci", o.no_ci, "skip confidence intervals");

  auto* est = app.add_subcommand("estimate-cov", "estimate Sigma from change-free reference data");
  add_common(est, o.common, false);
  est->add_option("--input", o.input, "reference CSV")->required();
  est->add_flag("--header", o.header, "skip one header line");
  est->add_option("--kind", o.kind, "iid or ar1")->check(CLI::IsMember({"iid", "ar1"}));

  auto* sim = app.add_subcommand("simulate", "run a synthetic experiment");
  add_common(sim, o.common, true);
  sim->add_option("--config", o.config_path, "experiment config JSON");
  sim->add_option("--scenario", o.scenario, "null, power or ci")->check(CLI::IsMember({"null", "power", "ci"}));
  sim->add_option("--trials", o.trials, "number of trials")->check(CLI::PositiveNumber);
  sim->add_option("--noise", o.noise, "independence or ar1")->check(CLI::IsMember({"independence", "ar1"}));
  sim->add_option("--delta-mu", o.delta_mu, "signal size (power scenario)");
  sim->add_option("--methods", o.methods, "subset of mc oc naive ds");
  sim->add_flag("--emit-trials", o.emit_trials, "write per-test records to trials.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*det) return cmd_detect(o, argc, argv, out);
    if (*inf) return cmd_infer(o, argc, argv, out);
    if (*est) return cmd_estimate_cov(o, argc, argv, out);
    return cmd_simulate(o, *sim, argc, argv, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace cpsi
