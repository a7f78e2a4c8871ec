#include "cpsi/serialize.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "cpsi/errors.hpp"

namespace cpsi {

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, int size, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    throw InputError(std::string(what) + " must be a " + std::to_string(size) + "x" +
                     std::to_string(size) + " matrix");
  }
  Eigen::MatrixXd m(size, size);
  for (int i = 0; i < size; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != size) {
      throw InputError(std::string(what) + " row " + std::to_string(i + 1) + " has the wrong length");
    }
    for (int k = 0; k < size; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) {
        throw InputError(std::string(what) + " entries must be numbers");
      }
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

double number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw InputError(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

std::vector<int> one_based(const std::vector<int>& v) {
  std::vector<int> out(v);
  for (int& x : out) x = to_external_component(x);
  return out;
}

Json region_json(const TruncationRegion& region) {
  Json out = Json::array();
  for (const Interval& iv : region.intervals()) out.push_back({iv.lo, iv.hi});
  return out;
}

}  // namespace

Json to_json(const Hyperparameters& hp) { return {{"k", hp.k}, {"l", hp.l}, {"w", hp.w}}; }

Json to_json(const LineSearchOptions& o) {
  return {{"half_width", o.half_width},
          {"delta", o.delta},
          {"wide_range", o.wide_range},
          {"max_steps", o.max_steps},
          {"tolerance", o.tolerance}};
}

Json to_json(const Detection& det, const Hyperparameters& hp) {
  Json comps = Json::array();
  for (const auto& c : det.components) comps.push_back(one_based(c));
  return {{"locations", det.locations},
          {"components", comps},
          {"score", det.score},
          {"hyperparameters", to_json(hp)}};
}

Json trace_to_json(const DetectionTrace& trace) {
  Json sort = Json::array();
  for (int m = trace.sort.first(); m <= trace.sort.last(); ++m) {
    std::vector<int> order(trace.sort.order(m).begin(), trace.sort.order(m).end());
    Json scores = Json::array();
    for (int d = 1; d <= trace.sort.components(); ++d) scores.push_back(trace.sort.score(m, d));
    sort.push_back({{"m", m}, {"order", one_based(order)}, {"score", scores}});
  }
  Json stages = Json::array();
  for (const DpStage& st : trace.stages) {
    Json cells = Json::array();
    for (int j = st.j_first; j <= st.j_last(); ++j) {
      const DpChoice& c = st.at(j);
      cells.push_back({{"j", j}, {"f", c.f}, {"tau", c.tau}, {"d", c.d}});
    }
    stages.push_back({{"k", st.k}, {"cells", cells}});
  }
  return {{"sort", sort}, {"stages", stages}};
}

Json to_json(const InferenceResult& r) {
  Json j{{"k", r.k + 1},
         {"h", r.h + 1},
         {"location", r.location},
         {"component", to_external_component(r.component)},
         {"stat", r.stat},
         {"sigma_eta", std::sqrt(r.sigma_eta2)},
         {"p_selective", r.selective_p},
         {"p_naive", r.naive_p}};
  if (r.ci) {
    j["ci"] = {r.ci->lo, r.ci->hi};
  } else {
    j["ci"] = nullptr;
  }
  j["mode"] = to_string(r.mode);
  j["region"] = region_json(r.region);
  return j;
}

void write_inference_csv(std::ostream& out, std::span<const InferenceResult> results) {
  out << "k,h,location,component,stat,sigma_eta,p_selective,p_naive,ci_lo,ci_hi,mode,n_intervals\n";
  out << std::setprecision(17);
  for (const auto& r : results) {
    out << r.k + 1 << ',' << r.h + 1 << ',' << r.location << ',' << to_external_component(r.component)
        << ',' << r.stat << ',' << std::sqrt(r.sigma_eta2) << ',' << r.selective_p << ','
        << r.naive_p << ',';
    if (r.ci) {
      out << r.ci->lo << ',' << r.ci->hi;
    } else {
      out << ',';
    }
    out << ',' << to_string(r.mode) << ',' << r.region.intervals().size() << '\n';
  }
}

CovarianceModel covariance_from_json(const Json& j, int components, int locations) {
  if (!j.is_object()) throw InputError("covariance config must be a JSON object");
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(components, components);
  if (j.contains("xi")) {
    const Json& x = j["xi"];
    if (x.is_string()) {
      if (x.get<std::string>() != "identity") throw InputError("xi must be \"identity\" or a matrix");
    } else {
      xi = matrix_from_json(x, components, "xi");
    }
  }
  if (!j.contains("sigma") || !j["sigma"].is_object()) throw InputError("covariance config needs a 'sigma' object");
  const Json& s = j["sigma"];
  const std::string kind = s.value("kind", std::string("iid"));
  SigmaSpec spec;
  if (kind == "iid") {
    spec = ScaledIdentity{number(s, "sigma2", 1.0)};
  } else if (kind == "ar1") {
    spec = Ar1{number(s, "sigma2", 1.0), number(s, "rho", 0.0)};
  } else if (kind == "dense") {
    if (!s.contains("matrix")) throw InputError("dense sigma needs 'matrix'");
    spec = DenseSigma{matrix_from_json(s["matrix"], locations, "sigma")};
  } else {
    throw InputError("unknown sigma kind '" + kind + "'");
  }
  return CovarianceModel(std::move(xi), std::move(spec), locations);
}

Json covariance_to_json(const CovarianceModel& cov) {
  Json j;
  if (cov.xi_is_identity()) {
    j["xi"] = "identity";
  } else {
    j["xi"] = matrix_json(cov.xi());
  }
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ScaledIdentity>) {
          j["sigma"] = {{"kind", "iid"}, {"sigma2", s.sigma2}};
        } else if constexpr (std::is_same_v<T, Ar1>) {
          j["sigma"] = {{"kind", "ar1"}, {"sigma2", s.sigma2}, {"rho", s.rho}};
        } else {
          j["sigma"] = {{"kind", "dense"}, {"matrix", matrix_json(cov.sigma())}};
        }
      },
      cov.sigma_spec());
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("experiment config must be a JSON object");
  if (!j.contains("scenario")) throw InputError("experiment config needs 'scenario'");
  ExperimentConfig c = default_config(scenario_from_string(j["scenario"].get<std::string>()));
  try {
    c.n_trials = j.value("n_trials", c.n_trials);
    c.locations = j.value("N", c.locations);
    c.components = j.value("D", c.components);
    if (j.contains("hp")) {
      c.hp.k = j["hp"].value("k", c.hp.k);
      c.hp.l = j["hp"].value("l", c.hp.l);
      c.hp.w = j["hp"].value("w", c.hp.w);
    }
    if (j.contains("cov")) {
      const Json& cv = j["cov"];
      c.noise = noise_from_string(cv.value("kind", std::string(to_string(c.noise))));
      c.sigma2 = cv.value("sigma2", c.sigma2);
      c.rho = cv.value("rho", c.rho);
    }
    c.delta_mu = j.value("delta_mu", c.delta_mu);
    c.alpha = j.value("alpha", c.alpha);
    c.seed = j.value("seed", c.seed);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    c.match_tolerance = j.value("match_tolerance", c.match_tolerance);
    c.jobs = j.value("jobs", c.jobs);
    c.keep_trials = j.value("keep_trials", c.keep_trials);
    if (j.contains("search")) {
      const Json& s = j["search"];
      c.search.half_width = s.value("half_width", c.search.half_width);
      c.search.delta = s.value("delta", c.search.delta);
      c.search.wide_range = s.value("wide_range", c.search.wide_range);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad experiment config: ") + e.what());
  }
  if (c.n_trials < 1) throw InputError("n_trials must be at least 1");
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json methods = Json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  return {{"scenario", to_string(c.scenario)},
          {"n_trials", c.n_trials},
          {"N", c.locations},
          {"D", c.components},
          {"hp", to_json(c.hp)},
          {"cov", {{"kind", to_string(c.noise)}, {"sigma2", c.sigma2}, {"rho", c.rho}}},
          {"delta_mu", c.delta_mu},
          {"alpha", c.alpha},
          {"seed", c.seed},
          {"methods", methods},
          {"match_tolerance", c.match_tolerance},
          {"jobs", c.jobs},
          {"search", to_json(c.search)}};
}

Json to_json(const ExperimentReport& r) {
  Json methods = Json::array();
  for (const auto& s : r.methods) {
    Json m{{"method", to_string(s.method)},
           {"tests", s.tests},
           {"rejections", s.rejections},
           {"rate", s.rate},
           {"std_error", s.std_error}};
    if (r.config.scenario == Scenario::null) m["band"] = {s.band_lo, s.band_hi};
    if (r.config.scenario == Scenario::power) m["insufficient"] = s.insufficient;
    if (r.config.scenario == Scenario::ci) {
      m["ci_count"] = s.ci_count;
      m["ci_unbounded"] = s.ci_unbounded;
      m["mean_ci_length"] = s.mean_ci_length;
      m["median_ci_length"] = s.median_ci_length;
    }
    methods.push_back(std::move(m));
  }
  return {{"config", to_json(r.config)}, {"trials_run", r.trials_run}, {"methods", methods}};
}

void write_trials_csv(std::ostream& out, std::span<const TestRecord> records) {
  out << "trial,method,location,component,p,rejected,ci_lo,ci_hi\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.trial << ',' << to_string(r.method) << ',' << r.location << ','
        << to_external_component(r.component) << ',' << r.p << ',' << (r.rejected ? 1 : 0) << ',';
    if (r.ci_lo) out << *r.ci_lo;
    out << ',';
    if (r.ci_hi) out << *r.ci_hi;
    out << '\n';
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("invalid JSON in '" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace cpsi
