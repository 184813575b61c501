#include "ergoclt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ergoclt/clt_lab.hpp"
#include "ergoclt/errors.hpp"
#include "ergoclt/forward.hpp"
#include "ergoclt/gordin.hpp"

namespace ergoclt {

using nlohmann::json;

namespace {

std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty())
    throw Error(ErrorKind::Config, what + ": '" + tok + "' is not a number");
  return v;
}

long long parse_integer(const std::string& tok, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty())
    throw Error(ErrorKind::Config, what + ": '" + tok + "' is not an integer");
  return v;
}

std::uint64_t parse_u64(const std::string& tok, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!tok.empty() && tok[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty())
    throw Error(ErrorKind::Config, what + ": '" + tok + "' is not an unsigned 64-bit integer");
  return v;
}

RunKind parse_kind(const std::string& s) {
  if (s == "gordin") return RunKind::Gordin;
  if (s == "forward") return RunKind::Forward;
  if (s == "clt") return RunKind::Clt;
  if (s == "conditions") return RunKind::Conditions;
  if (s == "all") return RunKind::All;
  throw Error(ErrorKind::Config, "run kind '" + s + "' is not one of gordin, forward, clt, conditions, all");
}

Sidedness parse_sidedness(const std::string& s) {
  if (s == "one_sided") return Sidedness::OneSided;
  if (s == "two_sided") return Sidedness::TwoSided;
  throw Error(ErrorKind::Config, "sidedness '" + s + "' is not one_sided or two_sided");
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix P(2, 2);
  P << a, b, c, d;
  return P;
}

CylinderFunction centered_indicator(const Matrix& P) {
  const Vector pi = stationary_distribution(P);
  return CylinderFunction::from_values(2, 0, 1, {1.0 - pi(0), -pi(0)});
}

json observable_json(const CylinderFunction& f) {
  return {{"offset", f.offset()},
          {"length", f.length()},
          {"values", std::vector<double>(f.values().data(), f.values().data() + f.values().size())}};
}

json condition_json(const ConditionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json ev = json::object();
    for (const auto& [k, v] : e.evidence) ev[k] = v;
    entries.push_back({{"name", e.name}, {"verdict", to_string(e.verdict)}, {"evidence", ev}});
  }
  return {{"theorem", r.theorem}, {"conditions", entries}};
}

bool wants(RunKind have, RunKind stage) { return have == RunKind::All || have == stage; }

/// Collects per-stage failures and the resulting exit code.
struct Outcome {
  json errors = json::array();
  json failed = json::array();
  bool hypothesis_failed = false;
  bool inconsistent = false;

  void record(const std::string& stage, const Error& e) {
    errors.push_back({{"stage", stage}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()}});
    // Engine breakdowns (no spectral gap, budget exhausted, bad observable)
    // mean the hypotheses could not be verified.
    hypothesis_failed = true;
    failed.push_back(stage);
  }
  void check(const std::string& name, bool ok, bool hypothesis) {
    if (ok) return;
    failed.push_back(name);
    (hypothesis ? hypothesis_failed : inconsistent) = true;
  }
  int exit_code() const {
    if (hypothesis_failed) return kExitHypothesisFailed;
    if (inconsistent) return kExitInconsistent;
    return kExitOk;
  }
};

}  // namespace

const char* to_string(RunKind k) {
  switch (k) {
    case RunKind::Gordin: return "gordin";
    case RunKind::Forward: return "forward";
    case RunKind::Clt: return "clt";
    case RunKind::Conditions: return "conditions";
    case RunKind::All: return "all";
  }
  return "all";
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = [] {
    const Matrix fair = mat2(0.5, 0.5, 0.5, 0.5);
    const Matrix gap = mat2(0.9, 0.1, 0.2, 0.8);
    const Matrix flip = mat2(0.0, 1.0, 1.0, 0.0);
    const CylinderFunction r = CylinderFunction::rademacher(0);
    return std::vector<Preset>{
        {"bernoulli-rademacher",
         "fair coin shift, f = +1/-1 on the first symbol; sigma^2 = 1 by every route "
         "(Theorems 2, 4 and 5 baseline)",
         fair, Sidedness::OneSided, r, RunKind::All},
        {"two-state-gap",
         "P = [[0.9,0.1],[0.2,0.8]], f = 1{w0=0} - 2/3; spectral gap 0.3, sigma^2 = 34/27 "
         "(Theorem 2 decomposition, Theorems 4-5, lambda regularization)",
         gap, Sidedness::OneSided, centered_indicator(gap), RunKind::All},
        {"coboundary",
         "fair coin shift, f = r - Ur; Birkhoff sums telescope and sigma = 0 "
         "(Theorem 2 part 2, coboundary witness)",
         fair, Sidedness::OneSided, r - koopman(r), RunKind::All},
        {"period2-indicator",
         "P = [[0,1],[1,0]], f = 1{w0=0} - 1/2; periodic, autocovariances never decay "
         "(negative control: Theorem 2 condition (2) and Theorem 5 fail)",
         flip, Sidedness::OneSided, centered_indicator(flip), RunKind::Conditions},
        {"doubling-map-note",
         "x -> 2x mod 1 with Lebesgue measure, coded by binary digits as the fair coin shift; "
         "f = +1 on [0,1/2), -1 on [1/2,1) (alias of bernoulli-rademacher, Theorem 2)",
         fair, Sidedness::OneSided, r, RunKind::All},
    };
  }();
  return list;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw Error(ErrorKind::Config, "unknown preset '" + name + "' (see `list`)");
}

std::string list_presets() {
  std::ostringstream os;
  for (const auto& p : presets()) os << p.name << "\t" << p.description << "\n";
  return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::vector<double>> rows;
  std::string observable_block;
  bool have_sidedness = false;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim_copy(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": bad section header");
      section = trim_copy(line.substr(1, line.size() - 2));
      if (section != "system" && section != "matrix" && section != "observable" && section != "run")
        throw Error(ErrorKind::Config, "unknown section [" + section + "]");
      continue;
    }
    if (section == "matrix") {
      std::vector<double> row;
      for (const auto& tok : split_list(line))
        row.push_back(parse_double(tok, "matrix row " + std::to_string(rows.size())));
      rows.push_back(std::move(row));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim_copy(line.substr(0, eq));
    const std::string value = trim_copy(line.substr(eq + 1));
    if (section == "system") {
      if (key == "sidedness") {
        cfg.sidedness = parse_sidedness(value);
        have_sidedness = true;
      } else {
        throw Error(ErrorKind::Config, "unknown [system] key '" + key + "'");
      }
    } else if (section == "observable") {
      if (key == "preset")
        cfg.preset = value;
      else
        observable_block += key + " " + value + "\n";
    } else if (section == "run") {
      RunSettings& r = cfg.run;
      if (key == "kind") r.kind = parse_kind(value);
      else if (key == "n") r.n = static_cast<int>(parse_integer(value, "n"));
      else if (key == "n_grid") {
        r.n_grid.clear();
        for (const auto& tok : split_list(value)) r.n_grid.push_back(static_cast<int>(parse_integer(tok, "n_grid")));
      } else if (key == "samples") r.samples = static_cast<int>(parse_integer(value, "samples"));
      else if (key == "seed") r.seed = parse_u64(value, "seed");
      else if (key == "series_tol") r.series_tol = parse_double(value, "series_tol");
      else if (key == "series_max") r.series_max = static_cast<int>(parse_integer(value, "series_max"));
      else if (key == "check_tol") r.check_tol = parse_double(value, "check_tol");
      else if (key == "k_max") r.k_max = static_cast<int>(parse_integer(value, "k_max"));
      else if (key == "alpha") r.alpha = parse_double(value, "alpha");
      else if (key == "eps") r.eps = parse_double(value, "eps");
      else if (key == "route_tol") r.route_tol = parse_double(value, "route_tol");
      else throw Error(ErrorKind::Config, "unknown [run] key '" + key + "'");
    } else {
      throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": key outside a section");
    }
  }

  if (cfg.preset) {
    const Preset& p = find_preset(*cfg.preset);
    if (!rows.empty() || !observable_block.empty())
      throw Error(ErrorKind::Config, "a preset supplies both the matrix and the observable");
    cfg.matrix = p.matrix;
    if (!have_sidedness) cfg.sidedness = p.sidedness;
    cfg.observable = p.observable;
  } else {
    if (rows.empty()) throw Error(ErrorKind::Config, "missing [matrix] section");
    const std::size_t m = rows.size();
    cfg.matrix.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      if (rows[i].size() != m)
        throw Error(ErrorKind::Config, "matrix row " + std::to_string(i) + " has " +
                                           std::to_string(rows[i].size()) + " entries, expected " +
                                           std::to_string(m));
      for (std::size_t j = 0; j < m; ++j) cfg.matrix(i, j) = rows[i][j];
    }
    if (observable_block.empty()) throw Error(ErrorKind::Config, "missing [observable] section");
    if (m < 2) throw Error(ErrorKind::NotStochastic, "need at least 2 states");
    cfg.observable = parse_observable(observable_block, static_cast<int>(m));
  }

  // Validate the chain now so malformed rows surface as config errors.
  (void)build_shift(cfg.matrix, cfg.sidedness);
  if (cfg.sidedness == Sidedness::OneSided && cfg.observable.offset() < 0)
    throw Error(ErrorKind::Config, "one-sided observables need offset >= 0");

  const RunSettings& r = cfg.run;
  if (r.n_grid.empty()) throw Error(ErrorKind::Config, "n_grid must not be empty");
  for (std::size_t i = 0; i < r.n_grid.size(); ++i)
    if (r.n_grid[i] < 1 || (i && r.n_grid[i] <= r.n_grid[i - 1]))
      throw Error(ErrorKind::Config, "n_grid must be strictly increasing positive integers");
  if (r.n < 1) throw Error(ErrorKind::Config, "n must be >= 1");
  if ((r.kind == RunKind::Clt || r.kind == RunKind::All) && r.samples < kMinKsSamples)
    throw Error(ErrorKind::Config, "samples must be >= 500 for CLT runs");
  if (r.samples < 1) throw Error(ErrorKind::Config, "samples must be >= 1");
  if (!(r.series_tol > 0.0) || !(r.check_tol > 0.0) || !(r.eps > 0.0) || !(r.route_tol > 0.0))
    throw Error(ErrorKind::Config, "tolerances must be positive");
  if (r.series_max < 2 || r.k_max < 4) throw Error(ErrorKind::Config, "series_max >= 2 and k_max >= 4 required");
  if (!(r.alpha > 1.0)) throw Error(ErrorKind::Config, "alpha must exceed 1");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "[system]\nsidedness = " << to_string(cfg.sidedness) << "\n\n";
  if (cfg.preset) {
    os << "[observable]\npreset = " << *cfg.preset << "\n\n";
  } else {
    os << "[matrix]\n";
    for (Eigen::Index i = 0; i < cfg.matrix.rows(); ++i) {
      for (Eigen::Index j = 0; j < cfg.matrix.cols(); ++j) os << (j ? ", " : "") << cfg.matrix(i, j);
      os << "\n";
    }
    os << "\n[observable]\n";
    std::istringstream obs(to_text(cfg.observable));
    std::string key, rest;
    while (obs >> key && std::getline(obs, rest)) os << key << " =" << rest << "\n";
    os << "\n";
  }
  const RunSettings& r = cfg.run;
  os << "[run]\nkind = " << to_string(r.kind) << "\nn = " << r.n << "\nn_grid = ";
  for (std::size_t i = 0; i < r.n_grid.size(); ++i) os << (i ? ", " : "") << r.n_grid[i];
  os << "\nsamples = " << r.samples << "\nseed = " << r.seed << "\nseries_tol = " << r.series_tol
     << "\nseries_max = " << r.series_max << "\ncheck_tol = " << r.check_tol << "\nk_max = " << r.k_max
     << "\nalpha = " << r.alpha << "\neps = " << r.eps << "\nroute_tol = " << r.route_tol << "\n";
  return os.str();
}

ExperimentConfig preset_config(const std::string& name) {
  const Preset& p = find_preset(name);
  ExperimentConfig cfg;
  cfg.matrix = p.matrix;
  cfg.sidedness = p.sidedness;
  cfg.observable = p.observable;
  cfg.preset = p.name;
  cfg.run.kind = p.kind;
  return cfg;
}

RunResult run_experiment(const ExperimentConfig& cfg, int workers) {
  RunResult result;
  Outcome outcome;
  const RunSettings& rs = cfg.run;
  const TransitionModel model = build_shift(cfg.matrix, cfg.sidedness);
  const TransitionModel one_sided = model.with_sidedness(Sidedness::OneSided);
  const TransitionModel two_sided = model.with_sidedness(Sidedness::TwoSided);
  const CylinderFunction& f = cfg.observable;
  // One-sided engines see the translate of f starting at coordinate >= 0.
  const CylinderFunction f_plus = f.offset() < 0 ? f.shifted(-f.offset()) : f;

  json& rep = result.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["generator"] = {{"name", "ergoclt"}, {"version", kVersion}};
  {
    json matrix = json::array();
    for (Eigen::Index i = 0; i < cfg.matrix.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < cfg.matrix.cols(); ++j) row.push_back(cfg.matrix(i, j));
      matrix.push_back(row);
    }
    rep["config"] = {{"matrix", matrix},
                     {"sidedness", to_string(cfg.sidedness)},
                     {"observable", observable_json(f)},
                     {"preset", cfg.preset ? json(*cfg.preset) : json(nullptr)},
                     {"run",
                      {{"kind", to_string(rs.kind)},
                       {"n", rs.n},
                       {"n_grid", rs.n_grid},
                       {"samples", rs.samples},
                       {"seed", rs.seed},
                       {"series_tol", rs.series_tol},
                       {"series_max", rs.series_max},
                       {"check_tol", rs.check_tol},
                       {"k_max", rs.k_max},
                       {"alpha", rs.alpha},
                       {"eps", rs.eps},
                       {"route_tol", rs.route_tol}}}};
  }
  const Vector& pi = model.stationary();
  rep["system"] = {{"stationary", std::vector<double>(pi.data(), pi.data() + pi.size())},
                   {"irreducible", model.ergodic_class().irreducible},
                   {"period", model.ergodic_class().period},
                   {"mean_of_f", expectation(model, f)}};

  std::optional<double> sigma2_series_value;
  std::optional<double> sigma2_gordin;
  std::optional<double> sigma2_forward;
  std::optional<CylinderFunction> g_witness;

  const bool need_series = wants(rs.kind, RunKind::Gordin) || wants(rs.kind, RunKind::Forward) ||
                           wants(rs.kind, RunKind::Clt);
  if (need_series) {
    try {
      const Sigma2Series s = sigma2_series(one_sided, f_plus, rs.series_max, rs.series_tol);
      sigma2_series_value = s.value;
      rep["sigma2"]["series"] = {{"value", s.value},
                                 {"raw_value", s.raw_value},
                                 {"clamped", s.clamped},
                                 {"abs_bound", s.abs_bound},
                                 {"terms_used", s.terms.size()},
                                 {"first_terms",
                                  std::vector<double>(s.terms.begin(),
                                                      s.terms.begin() + std::min<std::size_t>(s.terms.size(), 8))}};
    } catch (const Error& e) {
      outcome.record("sigma2_series", e);
    }
  }

  if (wants(rs.kind, RunKind::Gordin)) {
    json gj;
    try {
      const Decomposition d = decompose(one_sided, f_plus, rs.series_tol);
      sigma2_gordin = d.sigma2_mdiff;
      g_witness = d.g;
      gj["decomposition"] = {{"g", observable_json(d.g)},
                             {"Y1", observable_json(d.Y1)},
                             {"residual_norm", d.residual_norm},
                             {"mds_norm", d.mds_norm},
                             {"mean_Y1", d.mean_y1},
                             {"sigma2_mdiff", d.sigma2_mdiff},
                             {"truncation_depth", d.poisson.truncation_depth},
                             {"tail_norm", d.poisson.tail_norm},
                             {"term_decay_ratio", d.poisson.term_decay_ratio},
                             {"truncated", d.poisson.truncated}};
      rep["sigma2"]["martingale_difference"] = d.sigma2_mdiff;
      const auto witness = detect_coboundary(one_sided, f_plus);
      gj["coboundary"] = {{"found", witness.has_value()},
                          {"witness", witness ? observable_json(*witness) : json(nullptr)}};
    } catch (const Error& e) {
      outcome.record("gordin_decomposition", e);
    }
    json lam = json::array();
    try {
      for (double l : lambda_grid()) {
        const LambdaVariance lv = sigma2_lambda(one_sided, f_plus, l);
        json forms = json::object();
        for (const auto& [k, v] : lv.printed_forms) forms[k] = v;
        lam.push_back({{"lambda", l}, {"value", lv.value}, {"split_form", lv.split_form}, {"printed_form_deviation", forms}});
      }
    } catch (const Error& e) {
      outcome.record("sigma2_lambda", e);
    }
    gj["lambda_study"] = lam;
    rep["gordin"] = gj;
  }

  if (wants(rs.kind, RunKind::Forward)) {
    json fj;
    try {
      const ForwardApproximant y0 = y0_sum(two_sided, f, rs.series_max, rs.series_tol);
      sigma2_forward = y0.sigma2;
      rep["sigma2"]["forward"] = y0.sigma2;
      fj["Y0"] = observable_json(y0.Y0);
      fj["sigma2"] = y0.sigma2;
      fj["r_range"] = {y0.r_min, y0.r_max};
      fj["tail_norm"] = y0.tail_norm;
      fj["md_norm"] = y0.md_norm;
      fj["approximation_defect"] = {{"n", rs.n_grid},
                                    {"value", approximation_defect(two_sided, f, y0.Y0, rs.n_grid)}};
    } catch (const Error& e) {
      outcome.record("forward_y0", e);
    }
    try {
      const auto profile = variance_profile(two_sided, f, rs.n_grid);
      fj["variance_profile"] = {{"n", rs.n_grid}, {"value", profile}};
      rep["sigma2"]["variance_profile_last"] = profile.back();
    } catch (const Error& e) {
      outcome.record("variance_profile", e);
    }
    rep["forward"] = fj;
  }

  if (sigma2_series_value) {
    const double ref = *sigma2_series_value;
    if (sigma2_gordin) outcome.check("route_agreement_gordin", std::abs(*sigma2_gordin - ref) <= rs.route_tol, false);
    if (sigma2_forward) outcome.check("route_agreement_forward", std::abs(*sigma2_forward - ref) <= rs.route_tol, false);
  }

  if (wants(rs.kind, RunKind::Conditions)) {
    json cj;
    try {
      const auto r2 = check_thm2_conditions(one_sided, f_plus, rs.series_max, rs.series_tol);
      cj["theorem2"] = condition_json(r2);
      outcome.check("theorem2", !r2.any_fail(), true);
    } catch (const Error& e) {
      outcome.record("theorem2", e);
    }
    try {
      const auto r3 = check_thm3_condition3(two_sided, f, rs.alpha, rs.k_max);
      cj["theorem3"] = condition_json(r3);
      outcome.check("theorem3", !r3.any_fail(), true);
    } catch (const Error& e) {
      outcome.record("theorem3", e);
    }
    try {
      // Theorem 5 wants an F_0-measurable f; use the translate ending at 0.
      const int shift = f.is_constant() ? 0 : -(f.end() - 1);
      const auto r5 = check_thm5_conditions(two_sided, f.shifted(shift), rs.k_max, rs.check_tol);
      cj["theorem5"] = condition_json(r5);
      cj["theorem5"]["observable_shift"] = shift;
      outcome.check("theorem5", !r5.any_fail(), true);
    } catch (const Error& e) {
      outcome.record("theorem5", e);
    }
    rep["conditions"] = cj;
  }

  if (wants(rs.kind, RunKind::Clt)) {
    if (!sigma2_series_value) {
      rep["clt"] = {{"skipped", "sigma^2 unavailable"}};
    } else {
      try {
        CltTolerances tol;
        tol.remainder_eps = rs.eps;
        const CltReport r =
            verdict(model, f, *sigma2_series_value, rs.n, rs.samples, rs.seed, tol, workers, &result.samples);
        json psi = json::array();
        double psi_max = 0.0;
        for (const auto& [t, dev] : r.psi_deviation) {
          psi.push_back({{"t", t}, {"deviation", dev}});
          psi_max = std::max(psi_max, dev);
        }
        rep["clt"] = {{"n", r.n},
                      {"samples", r.samples},
                      {"sigma2_theory", r.sigma2_theory},
                      {"sample_variance", r.sample_variance},
                      {"variance_band", r.variance_band},
                      {"ks_distance", r.ks_distance},
                      {"ks_threshold", r.ks_threshold},
                      {"psi_deviation", psi},
                      {"psi_max", psi_max},
                      {"remainder_prob", r.remainder_prob},
                      {"max_abs_sample", r.max_abs_sample},
                      {"degenerate_bound", r.degenerate_bound},
                      {"moments",
                       {{"mean", r.moments.mean},
                        {"variance", r.moments.variance},
                        {"excess_kurtosis", r.moments.excess_kurtosis}}},
                      {"verdict", to_string(r.verdict)}};
        if (r.verdict == CltVerdict::Degenerate)
          outcome.check("clt_degenerate_bounded", degenerate_samples_bounded(r), false);
        else
          outcome.check("clt_verdict", r.verdict == CltVerdict::Consistent, false);
      } catch (const Error& e) {
        outcome.record("clt", e);
      }
    }
  }

  rep["errors"] = outcome.errors;
  result.exit_code = outcome.exit_code();
  rep["status"] = {{"exit_code", result.exit_code}, {"failed_checks", outcome.failed}};
  return result;
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

std::string samples_csv(const std::vector<double>& samples) {
  std::string out = "sample\n";
  char buf[40];
  for (double x : samples) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    out += buf;
  }
  return out;
}

namespace {

int execute(const ExperimentConfig& cfg_in, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed_override, std::optional<int> workers, std::ostream& err) {
  ExperimentConfig cfg = cfg_in;
  if (seed_override) cfg.run.seed = *seed_override;
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  try {
    result = run_experiment(cfg, workers.value_or(0));
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(out_dir / name, std::ios::binary);
    out << body;
    return static_cast<bool>(out);
  };
  if (!write("report.json", report_text(result.report))) {
    err << "config error: cannot write to '" << out_dir.string() << "'\n";
    return kExitConfigError;
  }
  const json meta = {{"version", kVersion}, {"seed", cfg.run.seed}, {"wall_time_seconds", wall}};
  write("meta.json", meta.dump(2) + "\n");
  if (cfg.run.kind == RunKind::Clt || cfg.run.kind == RunKind::All) write("samples.csv", samples_csv(result.samples));

  for (const auto& e : result.report["errors"]) err << e["stage"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
  if (result.exit_code != kExitOk) {
    err << "failed checks:";
    for (const auto& c : result.report["status"]["failed_checks"]) err << " " << c.get<std::string>();
    err << "\n";
  }
  return result.exit_code;
}

}  // namespace

int run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
        std::optional<std::uint64_t> seed_override, std::optional<int> workers, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return execute(cfg, out_dir, seed_override, workers, err);
}

int run_preset(const std::string& name, const std::filesystem::path& out_dir,
               std::optional<std::uint64_t> seed_override, std::optional<int> workers, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = preset_config(name);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream(out_dir / "config.txt") << config_text(cfg);
  return execute(cfg, out_dir, seed_override, workers, err);
}

}  // namespace ergoclt
