#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "randgreen/drivers.hpp"
#include "randgreen/ergodic.hpp"
#include "randgreen/errors.hpp"
#include "randgreen/green.hpp"
#include "randgreen/version.hpp"

namespace randgreen {

using nlohmann::json;

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "green-converge", "invariance",      "mixing",       "entropy-separated",
      "entropy-partition", "entropy-local", "lyapunov",    "birkhoff",
      "graph-volume",   "log-moment",      "alpha-ergodic"};
  return names;
}

// ---------------------------------------------------------------------------
// Configuration.  JSON, strict: unknown keys are rejected with their path.

struct ExperimentConfig {
  std::string experiment;
  DriverSpec driver;
  int k = 1;
  int d = 2;
  int depth = 20;
  int n_max = 8;
  double epsilon = 0.05;
  long samples = 100000;
  int orbits = 1000;
  int steps = 1000;
  std::uint64_t seed = 42;
  std::string output_path = "records.csv";
};

namespace detail {

inline std::complex<double> parse_complex(const json& j, const std::string& path,
                                          std::vector<std::string>& issues) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    issues.push_back(path + ": expected [re, im]");
    return 0.0;
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                                const std::string& prefix,
                                std::vector<std::string>& issues) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const auto& k : known)
      if (k == key) ok = true;
    if (!ok) issues.push_back(prefix + key + ": unknown key");
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::string> issues;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError({std::string("not valid JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw SchemaError({"top level: expected a JSON object"});

  detail::reject_unknown_keys(
      doc,
      {"experiment", "driver", "k", "d", "depth", "n_max", "epsilon", "samples",
       "orbits", "steps", "seed", "output_path"},
      "", issues);

  ExperimentConfig cfg;

  if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
    issues.push_back("experiment: required string");
  } else {
    cfg.experiment = doc["experiment"].get<std::string>();
    bool known = false;
    for (const auto& n : experiment_names())
      if (n == cfg.experiment) known = true;
    if (!known) issues.push_back("experiment: unknown experiment '" + cfg.experiment + "'");
  }

  auto get_int = [&](const char* key, int& out, int lo, int hi) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer()) {
      issues.push_back(std::string(key) + ": expected integer");
      return;
    }
    const long long v = doc[key].get<long long>();
    if (v < lo || v > hi) {
      issues.push_back(std::string(key) + ": out of range [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
      return;
    }
    out = int(v);
  };

  get_int("k", cfg.k, 1, 4);
  get_int("d", cfg.d, 2, 6);
  get_int("depth", cfg.depth, 0, 200);
  get_int("n_max", cfg.n_max, 1, 64);
  get_int("orbits", cfg.orbits, 1, 1000000);
  get_int("steps", cfg.steps, 1, 100000000);
  if (doc.contains("samples")) {
    if (!doc["samples"].is_number_integer() || doc["samples"].get<long long>() < 1)
      issues.push_back("samples: expected integer >= 1");
    else
      cfg.samples = doc["samples"].get<long>();
  }
  if (doc.contains("epsilon")) {
    if (!doc["epsilon"].is_number() || doc["epsilon"].get<double>() <= 0)
      issues.push_back("epsilon: expected a positive number");
    else
      cfg.epsilon = doc["epsilon"].get<double>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      issues.push_back("seed: expected a 64-bit unsigned integer");
    else
      cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("output_path")) {
    if (!doc["output_path"].is_string())
      issues.push_back("output_path: expected string");
    else
      cfg.output_path = doc["output_path"].get<std::string>();
  }

  // experiment-specific defaults for knobs the caller left out
  if (!doc.contains("n_max")) {
    if (cfg.experiment == "entropy-partition") cfg.n_max = 10;
    else if (cfg.experiment == "green-converge") cfg.n_max = 20;
    else if (cfg.experiment == "graph-volume") cfg.n_max = 4;
  }
  if (!doc.contains("epsilon") && cfg.experiment == "entropy-local") cfg.epsilon = 0.1;

  // driver block
  cfg.driver.k = cfg.k;
  cfg.driver.d = cfg.d;
  if (!doc.contains("driver") || !doc["driver"].is_object()) {
    issues.push_back("driver: required object");
  } else {
    const json& dj = doc["driver"];
    detail::reject_unknown_keys(dj,
                                {"kind", "family", "centers", "radii", "cycle", "center",
                                 "radius", "burn_in", "stride"},
                                "driver.", issues);
    const std::string kind = dj.value("kind", "iid");
    if (kind == "iid") cfg.driver.kind = DriverKind::IID;
    else if (kind == "cycle") cfg.driver.kind = DriverKind::Cycle;
    else if (kind == "parameter-map") cfg.driver.kind = DriverKind::ParameterMap;
    else issues.push_back("driver.kind: one of iid|cycle|parameter-map");

    cfg.driver.family = dj.value("family", "quadratic");
    int params = 0;
    try {
      params = family_param_count(cfg.driver.family, cfg.k);
    } catch (const std::invalid_argument& e) {
      issues.push_back(std::string("driver.family: ") + e.what());
    }

    if (dj.contains("centers")) {
      if (!dj["centers"].is_array()) {
        issues.push_back("driver.centers: expected array of [re, im]");
      } else {
        int i = 0;
        for (const auto& c : dj["centers"])
          cfg.driver.centers.push_back(
              detail::parse_complex(c, "driver.centers[" + std::to_string(i++) + "]", issues));
      }
    }
    if (dj.contains("radii")) {
      if (!dj["radii"].is_array()) {
        issues.push_back("driver.radii: expected array of numbers");
      } else {
        for (const auto& r : dj["radii"]) {
          if (!r.is_number() || r.get<double>() < 0)
            issues.push_back("driver.radii: entries must be nonnegative numbers");
          else
            cfg.driver.radii.push_back(r.get<double>());
        }
      }
    }
    if (cfg.driver.kind == DriverKind::IID && cfg.driver.radii.empty())
      cfg.driver.radii.assign(std::max(params, 1), 0.1);

    if (dj.contains("cycle")) {
      if (!dj["cycle"].is_array() || dj["cycle"].empty()) {
        issues.push_back("driver.cycle: expected nonempty array of parameter vectors");
      } else {
        int i = 0;
        for (const auto& entry : dj["cycle"]) {
          std::vector<std::complex<double>> p;
          if (!entry.is_array()) {
            issues.push_back("driver.cycle[" + std::to_string(i) + "]: expected array");
          } else {
            int j = 0;
            for (const auto& c : entry)
              p.push_back(detail::parse_complex(
                  c, "driver.cycle[" + std::to_string(i) + "][" + std::to_string(j++) + "]",
                  issues));
          }
          if (int(p.size()) != params)
            issues.push_back("driver.cycle[" + std::to_string(i) +
                             "]: expected " + std::to_string(params) + " parameter(s)");
          cfg.driver.cycle.push_back(std::move(p));
          ++i;
        }
      }
    } else if (cfg.driver.kind == DriverKind::Cycle) {
      issues.push_back("driver.cycle: required for the cycle driver");
    }

    if (dj.contains("center"))
      cfg.driver.pmap_center = detail::parse_complex(dj["center"], "driver.center", issues);
    if (dj.contains("radius")) {
      if (!dj["radius"].is_number() || dj["radius"].get<double>() <= 0)
        issues.push_back("driver.radius: expected a positive number");
      else
        cfg.driver.pmap_radius = dj["radius"].get<double>();
    }
    if (dj.contains("burn_in")) {
      if (!dj["burn_in"].is_number_integer() || dj["burn_in"].get<int>() < 0)
        issues.push_back("driver.burn_in: expected integer >= 0");
      else
        cfg.driver.burn_in = dj["burn_in"].get<int>();
    }
    if (dj.contains("stride")) {
      if (!dj["stride"].is_number_integer() || dj["stride"].get<int>() < 1)
        issues.push_back("driver.stride: expected integer >= 1");
      else
        cfg.driver.stride = dj["stride"].get<int>();
    }
    if (cfg.driver.kind == DriverKind::ParameterMap && params != 1)
      issues.push_back("driver.family: parameter-map driver requires a 1-parameter family");
  }

  if (!issues.empty()) throw SchemaError(std::move(issues));
  return cfg;
}

// Canonical JSON echo of a config; parse(emit(cfg)) == cfg.
inline std::string emit_config(const ExperimentConfig& cfg) {
  json dj;
  switch (cfg.driver.kind) {
    case DriverKind::IID: dj["kind"] = "iid"; break;
    case DriverKind::Cycle: dj["kind"] = "cycle"; break;
    case DriverKind::ParameterMap: dj["kind"] = "parameter-map"; break;
  }
  dj["family"] = cfg.driver.family;
  if (!cfg.driver.centers.empty()) {
    json arr = json::array();
    for (const auto& c : cfg.driver.centers) arr.push_back({c.real(), c.imag()});
    dj["centers"] = arr;
  }
  if (cfg.driver.kind == DriverKind::IID) dj["radii"] = cfg.driver.radii;
  if (!cfg.driver.cycle.empty()) {
    json arr = json::array();
    for (const auto& entry : cfg.driver.cycle) {
      json e = json::array();
      for (const auto& c : entry) e.push_back({c.real(), c.imag()});
      arr.push_back(e);
    }
    dj["cycle"] = arr;
  }
  if (cfg.driver.kind == DriverKind::ParameterMap) {
    dj["center"] = {cfg.driver.pmap_center.real(), cfg.driver.pmap_center.imag()};
    dj["radius"] = cfg.driver.pmap_radius;
    dj["burn_in"] = cfg.driver.burn_in;
    dj["stride"] = cfg.driver.stride;
  }
  json doc;
  doc["experiment"] = cfg.experiment;
  doc["driver"] = dj;
  doc["k"] = cfg.k;
  doc["d"] = cfg.d;
  doc["depth"] = cfg.depth;
  doc["n_max"] = cfg.n_max;
  doc["epsilon"] = cfg.epsilon;
  doc["samples"] = cfg.samples;
  doc["orbits"] = cfg.orbits;
  doc["steps"] = cfg.steps;
  doc["seed"] = cfg.seed;
  doc["output_path"] = cfg.output_path;
  return doc.dump(2);
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  // FNV-1a 64 over the canonical echo
  const std::string s = emit_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

// ---------------------------------------------------------------------------
// Records and serialization.

struct ExperimentRecord {
  std::string experiment;
  std::string driver;
  std::string family;
  int k = 0, d = 0, depth = 0, n_max = 0;
  double epsilon = 0;
  long samples = 0;
  int orbits = 0, steps = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string estimator;
  double value = 0;
  double stderr_ = 0;
  std::string flags;
  std::string version = kVersion;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string record_csv_header() {
  return "experiment,driver,family,k,d,depth,n_max,epsilon,samples,orbits,steps,"
         "seed,config_hash,estimator,value,stderr,flags,version";
}

inline std::string to_csv_row(const ExperimentRecord& r) {
  std::ostringstream os;
  os << r.experiment << ',' << r.driver << ',' << r.family << ',' << r.k << ',' << r.d
     << ',' << r.depth << ',' << r.n_max << ',' << format_double(r.epsilon) << ','
     << r.samples << ',' << r.orbits << ',' << r.steps << ',' << r.seed << ','
     << r.config_hash << ',' << r.estimator << ',' << format_double(r.value) << ','
     << format_double(r.stderr_) << ',' << r.flags << ',' << r.version;
  return os.str();
}

struct RunResult {
  std::vector<ExperimentRecord> records;
  int exit_code = 0;
  double wall_seconds = 0.0;
};

namespace detail {

inline ExperimentRecord base_record(const ExperimentConfig& cfg) {
  ExperimentRecord r;
  r.experiment = cfg.experiment;
  switch (cfg.driver.kind) {
    case DriverKind::IID: r.driver = "iid"; break;
    case DriverKind::Cycle: r.driver = "cycle"; break;
    case DriverKind::ParameterMap: r.driver = "parameter-map"; break;
  }
  r.family = cfg.driver.family;
  r.k = cfg.k;
  r.d = cfg.d;
  r.depth = cfg.depth;
  r.n_max = cfg.n_max;
  r.epsilon = cfg.epsilon;
  r.samples = cfg.samples;
  r.orbits = cfg.orbits;
  r.steps = cfg.steps;
  r.seed = cfg.seed;
  r.config_hash = config_hash(cfg);
  return r;
}

inline void emit(std::vector<ExperimentRecord>& out, const ExperimentRecord& base,
                 const std::string& estimator, double value, double se = 0.0,
                 const std::string& flags = "") {
  ExperimentRecord r = base;
  r.estimator = estimator;
  r.value = value;
  r.stderr_ = se;
  r.flags = flags;
  out.push_back(std::move(r));
}

// ---------------------------------------------------------------------------
// Runners.

inline void run_green_converge(const ExperimentConfig& cfg,
                               std::vector<ExperimentRecord>& out, int& exit_code) {
  const auto base = base_record(cfg);
  const auto state = driver_init(cfg.driver, cfg.seed);
  const auto maps = generate_sequence(cfg.driver, state, cfg.n_max);
  const int probes = int(std::min<long>(cfg.samples, 100000));

  std::vector<std::vector<double>> log_inc(std::size_t(cfg.n_max),
                                           std::vector<double>(probes, 0.0));
  parallel_for(std::size_t(probes), [&](std::size_t i) {
    Rng rng(cfg.seed, stream::tagged(stream::kProbe, i));
    const ProjPoint x = fs_uniform_point(cfg.k, rng);
    const auto prof = green_potential(maps, x, cfg.n_max);
    for (int n = 1; n <= cfg.n_max; ++n) {
      const double inc = std::abs(prof.profile[n] - prof.profile[n - 1]);
      log_inc[n - 1][i] = std::log(std::max(inc, 1e-300));
    }
  });

  std::vector<double> xs, ys;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const auto ms = mean_stderr(log_inc[n - 1]);
    emit(out, base, "log_increment_mean[n=" + std::to_string(n) + "]", ms.mean, ms.stderr_);
    if (n >= std::max(2, cfg.n_max / 2)) {
      xs.push_back(double(n));
      ys.push_back(ms.mean);
    }
  }
  const auto fit = fit_line(xs, ys);
  emit(out, base, "slope", fit.slope, fit.slope_stderr);

  // closed-form cross-check at the coordinate fixed point of the pure power map
  if (cfg.driver.family == "power") {
    CVec e0 = CVec::Zero(cfg.k + 1);
    e0[0] = 1.0;
    const auto prof = green_potential(maps, ProjPoint{e0}, cfg.n_max);
    const double a = std::log(1.0 / std::sqrt(double(cfg.k + 1)));
    const double expect = a * (1.0 - std::pow(double(cfg.d), -double(cfg.n_max + 1))) /
                          double(cfg.d - 1);
    emit(out, base, "power_fixed_point_dev", std::abs(prof.g_n - expect));
  }
  (void)exit_code;
}

inline void run_invariance(const ExperimentConfig& cfg, std::vector<ExperimentRecord>& out,
                           int& exit_code) {
  const auto base = base_record(cfg);
  const auto draws = sample_lambda_draws(cfg.driver, cfg.seed, 1);
  const auto seq = generate_sequence(cfg.driver, draws[0].continuation, cfg.depth + 1);
  const RationalMap f = seq.front();
  const std::vector<RationalMap> shifted(seq.begin() + 1, seq.end());

  const auto mu_f = measure_sample(seq, cfg.depth, int(cfg.samples), mix64(cfg.seed ^ 1));
  const auto mu_Ff =
      measure_sample(shifted, cfg.depth, int(cfg.samples), mix64(cfg.seed ^ 2));

  const auto library = observable_library(cfg.k);
  for (const auto& row : invariance_test(f, mu_f, mu_Ff, library))
    emit(out, base, "invariance:" + row.observable, row.discrepancy, row.stderr_);

  // negative control: FS volume in place of mu(F(f))
  std::vector<MeasureSample> fs_vol(cfg.samples);
  parallel_for(std::size_t(cfg.samples), [&](std::size_t i) {
    Rng rng(cfg.seed, stream::tagged(stream::kProbe, i) ^ 0xc1);
    fs_vol[i] = {fs_uniform_point(cfg.k, rng), 0, {}};
  });
  for (const auto& row : invariance_test(f, mu_f, fs_vol, library))
    emit(out, base, "control:" + row.observable, row.discrepancy, row.stderr_);
  (void)exit_code;
}

inline void run_mixing(const ExperimentConfig& cfg, std::vector<ExperimentRecord>& out,
                       int& exit_code) {
  const auto base = base_record(cfg);
  const auto state = driver_init(cfg.driver, cfg.seed);
  const auto maps = generate_sequence(cfg.driver, state, cfg.n_max + cfg.depth + 1);
  const auto phi = find_observable(cfg.k, "bump_a");
  const auto psi = find_observable(cfg.k, "bump_a");

  const auto mu0 = measure_sample(maps, cfg.depth, int(cfg.samples), mix64(cfg.seed ^ 3));

  // sup-norm proxy of the potentials on a fixed probe grid
  std::vector<double> gnorm(cfg.n_max + 1, 0.0);
  {
    const int probe_count = 1000;
    std::vector<std::vector<double>> abs_g(std::size_t(cfg.n_max + 1),
                                           std::vector<double>(probe_count, 0.0));
    parallel_for(std::size_t(probe_count), [&](std::size_t i) {
      Rng rng(cfg.seed, stream::tagged(stream::kProbe, i) ^ 0x6e);
      const auto prof = green_potential(maps, fs_uniform_point(cfg.k, rng), cfg.n_max);
      for (int n = 0; n <= cfg.n_max; ++n) abs_g[n][i] = std::abs(prof.profile[n]);
    });
    for (int n = 0; n <= cfg.n_max; ++n)
      gnorm[n] = *std::max_element(abs_g[n].begin(), abs_g[n].end());
  }

  std::vector<double> xs, ys;
  double below_floor_max_z = 0.0;
  bool above = true;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const std::vector<RationalMap> shifted(maps.begin() + n, maps.end());
    const auto mun =
        measure_sample(shifted, cfg.depth, int(cfg.samples), mix64(cfg.seed ^ (0x31 + n)));
    const auto res = mixing_correlation(maps, mu0, mun, phi, psi, n);
    emit(out, base, "corr[n=" + std::to_string(n) + "]", res.corr, res.stderr_);
    emit(out, base, "gnorm_inf[n=" + std::to_string(n) + "]", gnorm[n]);
    if (above && res.corr > 3.0 * res.stderr_) {
      xs.push_back(double(n));
      ys.push_back(std::log(res.corr));
    } else {
      above = false;
      if (res.stderr_ > 0)
        below_floor_max_z = std::max(below_floor_max_z, res.corr / res.stderr_);
    }
  }
  emit(out, base, "above_floor_points", double(xs.size()));
  if (xs.size() >= 2) {
    const auto fit = fit_line(xs, ys);
    emit(out, base, "slope_above_floor", fit.slope, fit.slope_stderr);
  }
  emit(out, base, "below_floor_max_z", below_floor_max_z);
  (void)exit_code;
}

inline void run_entropy_separated(const ExperimentConfig& cfg,
                                  std::vector<ExperimentRecord>& out, int& exit_code) {
  const auto base = base_record(cfg);
  const auto state = driver_init(cfg.driver, cfg.seed);
  const auto maps = generate_sequence(cfg.driver, state, cfg.n_max);
  std::vector<double> xs, ys;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const int s = separated_count(maps, n, cfg.epsilon, int(cfg.samples), cfg.seed);
    emit(out, base, "separated[n=" + std::to_string(n) + "]", double(s));
    if (n >= 4) {
      xs.push_back(double(n));
      ys.push_back(std::log(double(s)));
    }
  }
  if (xs.size() >= 2) {
    const auto fit = fit_line(xs, ys);
    emit(out, base, "slope", fit.slope, fit.slope_stderr);
  }
  (void)exit_code;
}

inline void run_entropy_partition(const ExperimentConfig& cfg,
                                  std::vector<ExperimentRecord>& out, int& exit_code) {
  const auto base = base_record(cfg);
  const auto state = driver_init(cfg.driver, cfg.seed);
  const auto maps =
      generate_sequence(cfg.driver, state, std::max(cfg.n_max, cfg.depth) + 1);
  const auto mu = measure_sample(maps, cfg.depth, int(cfg.samples), mix64(cfg.seed ^ 4));
  const PartitionSpec partition;
  const auto res = partition_entropy(maps, mu, partition, cfg.n_max);
  for (int m = 1; m <= cfg.n_max; ++m)
    emit(out, base, "h_profile[m=" + std::to_string(m) + "]", res.h_profile[m - 1]);
  emit(out, base, "entropy_rate", res.rate, 0.0, res.undersampled ? "undersampled" : "");
  emit(out, base, "singleton_fraction", res.singleton_fraction);
  if (res.undersampled) exit_code = std::max(exit_code, 2);
}

inline void run_entropy_local(const ExperimentConfig& cfg,
                              std::vector<ExperimentRecord>& out, int& exit_code) {
  const auto base = base_record(cfg);
  const auto state = driver_init(cfg.driver, cfg.seed);
  const auto maps =
      generate_sequence(cfg.driver, state, std::max(cfg.n_max, cfg.depth) + 1);
  const auto mu = measure_sample(maps, cfg.depth, int(cfg.samples), mix64(cfg.seed ^ 5));
  std::vector<int> n_list;
  for (int n = 1; n <= cfg.n_max; ++n) n_list.push_back(n);
  const std::vector<double> eps_list = {0.5 * cfg.epsilon, cfg.epsilon, 2.0 * cfg.epsilon};
  const auto table = brin_katok_entropy(maps, mu, n_list, eps_list);

  bool any_undersampled = false;
  for (const auto& eps : eps_list) {
    std::vector<double> xs, ys;
    for (const auto& cell : table) {
      if (cell.epsilon != eps) continue;
      const std::string tag = "[n=" + std::to_string(cell.n) + ",eps=" + format_double(eps) + "]";
      emit(out, base, "bk" + tag, cell.value, 0.0, cell.undersampled ? "undersampled" : "");
      any_undersampled |= cell.undersampled;
      if (cell.n >= 4) {
        xs.push_back(double(cell.n));
        ys.push_back(cell.median_neg_log_mass);
      }
    }
    if (xs.size() >= 2) {
      const auto fit = fit_line(xs, ys);
      emit(out, base, "bk_slope[eps=" + format_double(eps) + "]", fit.slope,
           fit.slope_stderr);
    }
  }
  if (any_undersampled) exit_code = std::max(exit_code, 2);
}

inline void run_lyapunov(const ExperimentConfig& cfg, std::vector<ExperimentRecord>& out,
                         int& exit_code) {
  const auto base = base_record(cfg);
  const auto draws = sample_lambda_draws(cfg.driver, cfg.seed, cfg.orbits);
  std::vector<std::vector<double>> per_orbit(cfg.orbits);
  std::vector<double> gaps(cfg.orbits, 0.0);
  std::vector<char> ok(cfg.orbits, 0);
  parallel_for(std::size_t(cfg.orbits), [&](std::size_t i) {
    const auto seq = generate_sequence(cfg.driver, draws[i].continuation,
                                       std::max(cfg.depth, cfg.steps) + 1);
    const auto start = measure_sample(seq, cfg.depth, 1, mix64(cfg.seed ^ (0x17a + i)));
    try {
      per_orbit[i] = detail::lyapunov_orbit(seq, start.front().point, cfg.steps, &gaps[i]);
      ok[i] = 1;
    } catch (const CriticalOrbit&) {
      ok[i] = 0;
    }
  });

  int discarded = 0;
  for (char o : ok)
    if (!o) ++discarded;
  double min_exponent = std::numeric_limits<double>::infinity();
  for (int j = 0; j < cfg.k; ++j) {
    std::vector<double> vals;
    for (int i = 0; i < cfg.orbits; ++i)
      if (ok[i]) vals.push_back(per_orbit[i][j] / double(cfg.steps));
    const auto ms = mean_stderr(vals);
    emit(out, base, "lambda[" + std::to_string(j + 1) + "]", ms.mean, ms.stderr_);
    min_exponent = std::min(min_exponent, ms.mean);
  }
  emit(out, base, "lambda_min", min_exponent);
  double max_gap = 0;
  for (int i = 0; i < cfg.orbits; ++i)
    if (ok[i]) max_gap = std::max(max_gap, gaps[i]);
  emit(out, base, "qr_logdet_gap", max_gap);
  emit(out, base, "discarded_orbits", double(discarded));
  (void)exit_code;
}

inline void run_birkhoff(const ExperimentConfig& cfg, std::vector<ExperimentRecord>& out,
                         int& exit_code) {
  const auto base = base_record(cfg);
  const auto state = driver_init(cfg.driver, cfg.seed);
  const auto b = birkhoff_logdist(cfg.driver, state, cfg.steps);
  const int n = cfg.steps;
  emit(out, base, "logdist_mean", b.mean);
  emit(out, base, "logdist_mean_half", b.prefix_means[n / 2 - 1]);
  emit(out, base, "cauchy_gap", std::abs(b.prefix_means[n / 2 - 1] - b.mean));

  // per-step values back out of the prefix means for the spread estimate
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    const double cur = b.prefix_means[i] * double(i + 1);
    const double prev = i == 0 ? 0.0 : b.prefix_means[i - 1] * double(i);
    vals[i] = cur - prev;
  }
  const double std_dev = sample_std(vals);
  emit(out, base, "logdist_std", std_dev);
  emit(out, base, "cauchy_tol", 3.0 * std_dev / std::sqrt(double(n)));
  const int stride = std::max(1, n / 16);
  for (int i = stride - 1; i < n; i += stride)
    emit(out, base, "prefix_mean[n=" + std::to_string(i + 1) + "]", b.prefix_means[i]);
  (void)exit_code;
}

inline void run_graph_volume(const ExperimentConfig& cfg,
                             std::vector<ExperimentRecord>& out, int& exit_code) {
  const auto base = base_record(cfg);
  const auto state = driver_init(cfg.driver, cfg.seed);
  const auto maps = generate_sequence(cfg.driver, state, cfg.n_max);
  const auto res = graph_volume_check(maps, cfg.n_max, int(cfg.samples), cfg.seed);
  for (int i = 0; i < cfg.n_max; ++i)
    emit(out, base, "term[i=" + std::to_string(i + 1) + "]", res.term_means[i]);
  emit(out, base, "numeric_volume", res.numeric, res.numeric_stderr);
  emit(out, base, "exact_volume", res.exact);
  emit(out, base, "relative_error", std::abs(res.numeric - res.exact) / res.exact);
  (void)exit_code;
}

inline void run_log_moment(const ExperimentConfig& cfg, std::vector<ExperimentRecord>& out,
                           int& exit_code) {
  const auto base = base_record(cfg);
  const int n = int(cfg.samples);
  const auto samples = alpha_sample(cfg.driver, cfg.depth, 2 * n, cfg.seed);
  const std::vector<AlphaSample> half(samples.begin(), samples.begin() + n);
  const auto rep_half = log_moment_check(half);
  const auto rep_full = log_moment_check(samples);
  emit(out, base, "log_moment_mean[N]", rep_half.mean, rep_half.stderr_);
  emit(out, base, "log_moment_mean[2N]", rep_full.mean, rep_full.stderr_);
  emit(out, base, "q999[N]", rep_half.q999);
  emit(out, base, "q999[2N]", rep_full.q999);
  emit(out, base, "doubling_gap", std::abs(rep_half.mean - rep_full.mean));
  emit(out, base, "doubling_gap_tol", 3.0 * rep_half.stderr_);
  (void)exit_code;
}

inline void run_alpha_ergodic(const ExperimentConfig& cfg,
                              std::vector<ExperimentRecord>& out, int& exit_code) {
  const auto base = base_record(cfg);
  const auto obs = pair_observable_library(cfg.k).front();
  const auto res =
      birkhoff_alpha_test(cfg.driver, obs, cfg.steps, cfg.orbits, cfg.depth, cfg.seed);
  emit(out, base, "time_avg_spread", res.spread);
  emit(out, base, "alpha_mean", res.alpha_mean);
  emit(out, base, "mean_time_avg", res.mean_of_time_averages);
  emit(out, base, "ergodic_gap", std::abs(res.mean_of_time_averages - res.alpha_mean));
  (void)exit_code;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dispatch, output writing.

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  int exit_code = 0;
  if (cfg.experiment == "green-converge")
    detail::run_green_converge(cfg, res.records, exit_code);
  else if (cfg.experiment == "invariance")
    detail::run_invariance(cfg, res.records, exit_code);
  else if (cfg.experiment == "mixing")
    detail::run_mixing(cfg, res.records, exit_code);
  else if (cfg.experiment == "entropy-separated")
    detail::run_entropy_separated(cfg, res.records, exit_code);
  else if (cfg.experiment == "entropy-partition")
    detail::run_entropy_partition(cfg, res.records, exit_code);
  else if (cfg.experiment == "entropy-local")
    detail::run_entropy_local(cfg, res.records, exit_code);
  else if (cfg.experiment == "lyapunov")
    detail::run_lyapunov(cfg, res.records, exit_code);
  else if (cfg.experiment == "birkhoff")
    detail::run_birkhoff(cfg, res.records, exit_code);
  else if (cfg.experiment == "graph-volume")
    detail::run_graph_volume(cfg, res.records, exit_code);
  else if (cfg.experiment == "log-moment")
    detail::run_log_moment(cfg, res.records, exit_code);
  else if (cfg.experiment == "alpha-ergodic")
    detail::run_alpha_ergodic(cfg, res.records, exit_code);
  else
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  res.exit_code = exit_code;
  res.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0).count();
  return res;
}

// CSV of the records (RFC 4180, fixed header) plus a JSON sidecar with the
// full config.  The CSV is a pure function of (config, seed, version); the
// observed wall time lives in the sidecar only, outside the deterministic
// payload.
inline void write_outputs(const ExperimentConfig& cfg, const RunResult& res) {
  {
    std::ofstream csv(cfg.output_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open output path: " + cfg.output_path);
    csv << record_csv_header() << "\r\n";
    for (const auto& r : res.records) csv << to_csv_row(r) << "\r\n";
  }
  {
    json side = json::parse(emit_config(cfg));
    side["version"] = kVersion;
    side["wall_seconds_observed"] = res.wall_seconds;
    side["threads"] = worker_count();
    std::ofstream js(cfg.output_path + ".json", std::ios::binary);
    js << side.dump(2) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Plot-ready reshaping of records: long format (x, y, yerr, series).

struct PlotRow {
  double x = 0, y = 0, yerr = 0;
  std::string series;
};

namespace detail {
inline std::optional<double> bracket_index(const std::string& estimator) {
  const auto lb = estimator.find('[');
  if (lb == std::string::npos) return std::nullopt;
  const auto eq = estimator.find('=', lb);
  const auto rb = estimator.find_first_of(",]", lb);
  if (eq == std::string::npos || rb == std::string::npos || eq > rb) return std::nullopt;
  try {
    return std::stod(estimator.substr(eq + 1, rb - eq - 1));
  } catch (...) {
    return std::nullopt;
  }
}
}  // namespace detail

inline std::vector<PlotRow> emit_plotdata(const std::vector<ExperimentRecord>& records,
                                          const std::string& series_spec) {
  std::vector<PlotRow> rows;
  int index = 0;
  for (const auto& r : records) {
    if (!series_spec.empty() && r.estimator.rfind(series_spec, 0) != 0) continue;
    PlotRow row;
    const auto xi = detail::bracket_index(r.estimator);
    row.x = xi ? *xi : double(index);
    row.series = r.estimator.substr(0, r.estimator.find('['));

    // log-scale reshape for decay series
    if (row.series == "corr" && r.value > 0) {
      row.y = std::log(r.value);
      row.yerr = r.stderr_ / r.value;
    } else {
      row.y = r.value;
      row.yerr = r.stderr_;
    }
    rows.push_back(std::move(row));
    ++index;
  }
  if (rows.empty()) throw EmptySelection{};
  return rows;
}

inline void write_plotdata_csv(const std::vector<PlotRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output path: " + path);
  f << "x,y,yerr,series\r\n";
  for (const auto& r : rows)
    f << format_double(r.x) << ',' << format_double(r.y) << ',' << format_double(r.yerr)
      << ',' << r.series << "\r\n";
}

}  // namespace randgreen
