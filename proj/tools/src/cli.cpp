#include "apm/cli.hpp"

#include "apm/error.hpp"
#include "apm/estimate.hpp"
#include "apm/graph.hpp"
#include "apm/inference.hpp"
#include "apm/perturb.hpp"
#include "apm/sim.hpp"
#include "apm/targets.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

namespace apm::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  std::string input;
  std::string out_dir;
  std::string config_path;
  int r = 1;
  int min_cohort_size = kDefaultMinCohortSize;
  std::string method = "pc";
  bool strict = false;
  int threads = 1;

  // Targets.
  std::string target = "cell";
  std::optional<int> cohort;
  std::string outcome;
  std::vector<std::string> cells;
  int pre = 0;
  int len = 1;
  int t1 = -1;
  int t2 = -1;
  std::string treated_means;
  bool normalize_relative_time = false;

  // Stochastic commands.
  int replicates = 500;
  double alpha = 0.05;
  std::optional<std::uint64_t> seed;
  bool literal_critical = false;
  int reps = 100;
  int n = 1000;
  std::vector<std::string> estimators{"apm", "twfe"};

  // perturb-check.
  int cases = 1000;
  int dim = 8;
  std::string convention = "validated";
};

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {
    const char* env = std::getenv("APM_LOG");
    const std::string v = env ? env : "";
    if (v == "quiet" || v == "0" || v == "off") level_ = 0;
    if (v == "info" || v == "debug" || v == "2") level_ = 2;
  }
  void warn(const std::string& msg) const {
    if (level_ >= 1) err_ << "warning: " << msg << '\n';
  }
  void info(const std::string& msg) const {
    if (level_ >= 2) err_ << "info: " << msg << '\n';
  }

 private:
  std::ostream& err_;
  int level_ = 1;
};

std::string num(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  if (!c.input.empty()) j["input"] = c.input;
  if (!c.config_path.empty()) j["config"] = c.config_path;
  j["r"] = c.r;
  j["min_cohort_size"] = c.min_cohort_size;
  j["method"] = c.method;
  j["strict"] = c.strict;
  if (c.command == "bootstrap") {
    j["target"] = c.target;
    j["M"] = c.replicates;
    j["alpha"] = c.alpha;
    j["centered"] = !c.literal_critical;
    if (c.target == "dynamic") {
      j["pre"] = c.pre;
      j["len"] = c.len;
      j["treated_means"] = c.treated_means;
      j["normalize_relative_time"] = c.normalize_relative_time;
    }
    if (c.target == "shares") {
      j["t1"] = c.t1;
      j["t2"] = c.t2;
    }
  }
  if (c.command == "mask-eval") {
    j["B"] = c.reps;
    j["estimators"] = c.estimators;
  }
  if (c.command == "simulate") j["n"] = c.n;
  if (c.seed) j["seed"] = *c.seed;
  if (!c.cells.empty()) j["cells"] = c.cells;
  if (c.cohort) j["cohort"] = *c.cohort;
  if (!c.outcome.empty()) j["outcome"] = c.outcome;
  return j;
}

json header(const RunConfig& c) {
  json j;
  j["version"] = APM_VERSION;
  j["config"] = config_json(c);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  f << text;
}

fs::path output_dir(const RunConfig& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create " + dir.string());
  return dir;
}

EstimatorConfig estimator_config(const RunConfig& c) {
  EstimatorConfig cfg;
  cfg.r = c.r;
  cfg.min_cohort_size = c.min_cohort_size;
  cfg.method = c.method == "pc" ? FactorMethod::PC : FactorMethod::HeteroskedasticSplit;
  return cfg;
}

int resolve_outcome(const Panel& panel, const std::string& name) {
  const auto& ids = panel.outcome_ids();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] == name) return static_cast<int>(t);
  }
  char* end = nullptr;
  const long v = std::strtol(name.c_str(), &end, 10);
  if (!name.empty() && *end == '\0' && v >= 0 && v < panel.n_outcomes()) {
    return static_cast<int>(v);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown outcome '" + name + "'");
}

std::vector<std::pair<int, int>> resolve_cells(const RunConfig& c, const Panel& panel) {
  std::vector<std::pair<int, int>> cells;
  for (const auto& spec : c.cells) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "cell '" + spec + "' must look like COHORT:OUTCOME");
    }
    int cohort = 0;
    try {
      cohort = std::stoi(spec.substr(0, colon));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad cohort in cell '" + spec + "'");
    }
    cells.emplace_back(cohort, resolve_outcome(panel, spec.substr(colon + 1)));
  }
  if (c.cohort || !c.outcome.empty()) {
    if (!c.cohort || c.outcome.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--cohort and --outcome go together");
    }
    cells.emplace_back(*c.cohort, resolve_outcome(panel, c.outcome));
  }
  if (cells.empty()) throw Error(ErrorCode::InvalidArgument, "no target cell given");
  return cells;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return fields;
}

// cohort_id,outcome_id,treated_mean
Matrix read_treated_means(const std::string& path, const Panel& panel, int n_cohorts) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  Matrix m = Matrix::Constant(n_cohorts, panel.n_outcomes(),
                              std::numeric_limits<double>::quiet_NaN());
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto fields = split_csv_line(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    if (line_no == 1 && fields.size() == 3 && fields[0] == "cohort_id") continue;
    if (fields.size() != 3) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    try {
      const int c = std::stoi(fields[0]);
      if (c < 0 || c >= n_cohorts) throw std::out_of_range("cohort");
      m(c, resolve_outcome(panel, fields[1])) = std::stod(fields[2]);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": bad value");
    }
  }
  return m;
}

TargetSpec build_target(const RunConfig& c, const Panel& panel, const CohortIndex& index) {
  if (c.target == "cell") return CellsSpec{resolve_cells(c, panel)};
  if (c.target == "shares") {
    if (c.t1 < 0 || c.t2 < 0) throw Error(ErrorCode::InvalidArgument, "--t1 and --t2 are required");
    return AttributionSharesSpec{c.t1, c.t2};
  }
  DynamicEffectsSpec spec;
  spec.pre_periods = c.pre;
  spec.length = c.len;
  spec.normalize_relative_time = c.normalize_relative_time;
  if (c.treated_means.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--treated-means is required for dynamic targets");
  }
  spec.treated_means = read_treated_means(c.treated_means, panel, index.n_cohorts());
  return spec;
}

json cohort_json(const Panel& panel, const CohortIndex& index, int c) {
  json j;
  j["id"] = c;
  j["size"] = index.cohorts[c].size();
  json obs = json::array();
  for (int t : index.cohorts[c].observed) obs.push_back(panel.outcome_ids()[t]);
  j["observed"] = obs;
  return j;
}

// Descending eigenvalues of the cohort's second moment and their ratios.
json spectrum_json(const Panel& panel, const CohortIndex& index, int c) {
  const CohortSecondMoment m = second_moment(panel, index, c);
  const Vector asc = sym_eigen(submatrix(m.v, m.observed, m.observed)).values;
  json values = json::array();
  json ratios = json::array();
  for (Eigen::Index k = asc.size() - 1; k >= 0; --k) {
    values.push_back(asc(k));
    if (k > 0) ratios.push_back(asc(k - 1) != 0.0 ? asc(k) / asc(k - 1) : std::numeric_limits<double>::quiet_NaN());
  }
  json j;
  j["spectrum"] = values;
  j["ratios"] = ratios;
  return j;
}

int finish(const RunConfig& c, const std::vector<std::string>& warnings, const Log& log) {
  for (const auto& w : warnings) log.warn(w);
  return c.strict && !warnings.empty() ? kExitStrict : kExitOk;
}

int cmd_diagnose(const RunConfig& c, std::ostream& out, const Log& log) {
  const Panel panel = load_long_csv(c.input);
  const CohortIndex index = cohortize(panel, c.min_cohort_size);
  const OverlapGraph graph = build_overlap_graph(index, c.r);
  const Components comps = connected_components(graph);
  std::vector<std::string> warnings;

  json doc = header(c);
  doc["n_units"] = panel.n_units();
  doc["n_outcomes"] = panel.n_outcomes();
  doc["outcome_ids"] = panel.outcome_ids();
  doc["dropped_units"] = index.dropped_units.size();

  json cohorts = json::array();
  for (int k = 0; k < index.n_cohorts(); ++k) {
    json cj = cohort_json(panel, index, k);
    cj.update(spectrum_json(panel, index, k));
    cohorts.push_back(cj);
  }
  doc["cohorts"] = cohorts;

  json edges = json::array();
  for (const auto& e : graph.edges()) edges.push_back({{"a", e.a}, {"b", e.b}, {"overlap", e.overlap}});
  doc["graph"] = {{"rank", c.r},
                  {"edges", edges},
                  {"components", comps.groups},
                  {"connected", comps.count() == 1}};
  if (comps.count() > 1) {
    warnings.push_back("overlap graph has " + std::to_string(comps.count()) + " components");
  }

  json reach = json::array();
  for (int k = 0; k < index.n_cohorts(); ++k) {
    json levels = json::array();
    for (const auto& level : reach_profile(graph, index, k)) {
      json ids = json::array();
      for (int t : level) ids.push_back(panel.outcome_ids()[t]);
      levels.push_back(ids);
    }
    reach.push_back(levels);
  }
  doc["reach_profiles"] = reach;

  const EquivalenceReport eq = equivalence_graphs(index);
  doc["equivalence"] = {{"overlap_connected", comps.count() == 1},
                        {"bipartite_connected", eq.bipartite_connected},
                        {"check_connected", eq.check_connected}};

  try {
    const Estimate est = estimate_all(panel, index, estimator_config(c));
    json spectrum = json::array();
    for (Eigen::Index k = 0; k < est.apm.spectrum.size(); ++k) spectrum.push_back(est.apm.spectrum(k));
    doc["apm"] = {{"spectrum", spectrum},
                  {"eigengap", est.basis.eigengap},
                  {"gap_floor", est.basis.gap_floor},
                  {"weak_identification", est.basis.weak_identification},
                  {"rank_mismatch", est.basis.rank_mismatch},
                  {"component", est.component}};
    for (const auto& w : est.warnings) warnings.push_back(w);
  } catch (const Error& e) {
    doc["apm"] = nullptr;
    warnings.push_back(std::string("estimation failed: ") + e.what());
  }
  doc["warnings"] = warnings;

  const std::string text = doc.dump(2) + "\n";
  out << text;
  if (!c.out_dir.empty()) write_text(output_dir(c) / "diagnose.json", text);
  return finish(c, warnings, log);
}

int cmd_estimate(const RunConfig& c, const Log& log) {
  const Panel panel = load_long_csv(c.input);
  const CohortIndex index = cohortize(panel, c.min_cohort_size);
  EstimatorConfig cfg = estimator_config(c);
  cfg.target_cohort = c.cohort;
  const Estimate est = estimate_all(panel, index, cfg);
  const fs::path dir = output_dir(c);

  std::ostringstream csv;
  csv << "cohort_id,outcome_id,mu_hat,observed\n";
  for (int k = 0; k < index.n_cohorts(); ++k) {
    for (int t = 0; t < panel.n_outcomes(); ++t) {
      csv << k << ',' << panel.outcome_ids()[t] << ',' << num(est.means.mu_hat(k, t)) << ','
          << (est.means.observed(k, t) ? 1 : 0) << '\n';
    }
  }
  write_text(dir / "mu_hat.csv", csv.str());

  json doc = header(c);
  doc["eigengap"] = est.basis.eigengap;
  doc["gap_floor"] = est.basis.gap_floor;
  doc["weak_identification"] = est.basis.weak_identification;
  doc["component"] = est.component;
  doc["excluded_cohorts"] = est.excluded_cohorts;
  json covered = json::array();
  for (int t : est.covered_outcomes) covered.push_back(panel.outcome_ids()[t]);
  doc["covered_outcomes"] = covered;
  json cohorts = json::array();
  for (int k = 0; k < index.n_cohorts(); ++k) {
    json cj = cohort_json(panel, index, k);
    cj["probability"] = est.means.cohort_probs(k);
    cj["available"] = static_cast<bool>(est.means.available[k]);
    cj.update(spectrum_json(panel, index, k));
    cohorts.push_back(cj);
  }
  doc["cohorts"] = cohorts;
  json spectrum = json::array();
  for (Eigen::Index k = 0; k < est.apm.spectrum.size(); ++k) spectrum.push_back(est.apm.spectrum(k));
  doc["apm_spectrum"] = spectrum;
  doc["warnings"] = est.warnings;
  write_text(dir / "diagnostics.json", doc.dump(2) + "\n");
  log.info("wrote " + (dir / "mu_hat.csv").string());
  return finish(c, est.warnings, log);
}

int cmd_bootstrap(const RunConfig& c, const Log& log) {
  if (!c.seed) throw Error(ErrorCode::InvalidArgument, "--seed is required");
  const Panel panel = load_long_csv(c.input);
  const CohortIndex index = cohortize(panel, c.min_cohort_size);
  const TargetSpec target = build_target(c, panel, index);
  EstimatorConfig cfg = estimator_config(c);
  if (const auto* cells = std::get_if<CellsSpec>(&target); cells && cells->cells.size() == 1) {
    cfg.target_cohort = cells->cells.front().first;
  }

  BootstrapOptions opts;
  opts.replicates = c.replicates;
  opts.alpha = c.alpha;
  opts.seed = *c.seed;
  opts.centered = !c.literal_critical;
  opts.threads = c.threads;
  const BootstrapResult res = bootstrap(panel, cfg, target, opts);
  const auto labels = target_labels(target, index, panel);
  const fs::path dir = output_dir(c);

  std::ostringstream csv;
  csv << "param,estimate,se,ci_lo,ci_hi\n";
  for (Eigen::Index j = 0; j < res.theta_hat.size(); ++j) {
    csv << labels[j] << ',' << num(res.theta_hat(j)) << ',' << num(res.sigma_hat(j)) << ','
        << num(res.intervals(j, 0)) << ',' << num(res.intervals(j, 1)) << '\n';
  }
  write_text(dir / "intervals.csv", csv.str());

  json doc = header(c);
  doc["M"] = res.requested_replicates;
  doc["alpha"] = res.alpha;
  doc["q_crit"] = res.q_crit;
  doc["seed"] = res.seed;
  doc["failed_replicates"] = res.failed_replicates;
  doc["centered"] = res.centered;
  json degenerate = json::array();
  for (bool d : res.degenerate) degenerate.push_back(d);
  doc["degenerate"] = degenerate;
  doc["warnings"] = res.warnings;
  write_text(dir / "bootstrap.json", doc.dump(2) + "\n");
  return finish(c, res.warnings, log);
}

int cmd_simulate(const RunConfig& c, const Log& log) {
  std::ifstream f(c.config_path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + c.config_path);
  std::stringstream text;
  text << f.rdbuf();
  const DgpConfig dgp = parse_dgp_json(text.str());
  const std::uint64_t seed = c.seed.value_or(dgp.seed);
  GenerateOptions gen;
  gen.redraw_empty = !c.strict;
  const Panel panel = generate(dgp.truth, c.n, seed, gen);
  const fs::path dir = output_dir(c);
  save_long_csv(panel, (dir / "panel.csv").string());

  json doc = json::parse(dgp_to_json(dgp.truth));
  doc["seed"] = seed;
  doc["n"] = c.n;
  doc["version"] = APM_VERSION;
  doc["config"] = config_json(c);
  write_text(dir / "truth.json", doc.dump(2) + "\n");
  log.info("simulated " + std::to_string(panel.n_units()) + " units");
  return kExitOk;
}

int cmd_mask_eval(const RunConfig& c, const Log& log) {
  if (!c.seed) throw Error(ErrorCode::InvalidArgument, "--seed is required");
  const Panel panel = load_long_csv(c.input);
  std::vector<MaskTarget> targets;
  for (const auto& [cohort, outcome] : resolve_cells(c, panel)) targets.push_back({cohort, outcome});

  MaskEvalOptions opts;
  opts.reps = c.reps;
  opts.seed = *c.seed;
  opts.config = estimator_config(c);
  opts.threads = c.threads;
  opts.strict = c.strict;
  opts.estimators.clear();
  for (const auto& e : c.estimators) {
    if (e == "apm") opts.estimators.push_back(MaskEstimator::APM);
    else if (e == "twfe") opts.estimators.push_back(MaskEstimator::TWFE);
    else throw Error(ErrorCode::InvalidArgument, "unknown estimator '" + e + "'");
  }
  const auto rows = mask_eval(panel, targets, opts);
  const fs::path dir = output_dir(c);

  std::ostringstream csv;
  csv << "target_cohort,target_outcome,estimator,abs_bias,se,rmse\n";
  std::vector<std::string> warnings;
  json details = json::array();
  for (const auto& m : rows) {
    const std::string outcome = panel.outcome_ids()[m.target.outcome];
    csv << m.target.cohort << ',' << outcome << ',' << to_string(m.estimator) << ','
        << num(m.abs_bias) << ',' << num(m.se) << ',' << num(m.rmse) << '\n';
    if (!m.identified) {
      warnings.push_back("cell " + std::to_string(m.target.cohort) + ":" + outcome +
                         " is not identified by " + std::string(to_string(m.estimator)) +
                         " after masking");
    }
    details.push_back({{"target_cohort", m.target.cohort},
                       {"target_outcome", outcome},
                       {"estimator", to_string(m.estimator)},
                       {"identified", m.identified},
                       {"truth", m.truth},
                       {"mean_estimate", m.mean_estimate}});
  }
  write_text(dir / "mask_eval.csv", csv.str());
  json doc = header(c);
  doc["rows"] = details;
  doc["warnings"] = warnings;
  write_text(dir / "mask_eval.json", doc.dump(2) + "\n");
  return finish(c, warnings, log);
}

// Randomised audit of the first-order eigenspace bound.
int cmd_perturb_check(const RunConfig& c, std::ostream& out) {
  const SignConvention conv =
      c.convention == "printed" ? SignConvention::Printed : SignConvention::Validated;
  std::mt19937_64 rng(c.seed.value_or(0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  const int d = c.dim;
  int holds = 0;
  int done = 0;
  double worst = 0.0;
  while (done < c.cases) {
    Matrix m(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) m(a, b) = normal(rng);
    }
    m = (m + m.transpose()).eval() / 2.0;
    std::uniform_int_distribution<int> pick_r(1, d - 1);
    const int r = pick_r(rng);
    std::uniform_int_distribution<int> pick_s(0, d - r);
    const int s = pick_s(rng);
    const double gap = window_gap(sym_eigen(m).values, s, r);
    if (!(gap > 0.0) || std::isinf(gap)) continue;
    Matrix dm(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) dm(a, b) = normal(rng);
    }
    dm = (dm + dm.transpose()).eval() / 2.0;
    dm *= unit(rng) * gap / sym_op_norm(dm);
    const BoundCheck check = check_bound(m, m + dm, s, r, conv);
    ++done;
    if (check.holds) ++holds;
    if (check.bound > 0.0) worst = std::max(worst, check.approx_error / check.bound);
  }
  json doc;
  doc["version"] = APM_VERSION;
  doc["cases"] = done;
  doc["holds"] = holds;
  doc["max_error_to_bound"] = worst;
  doc["convention"] = c.convention;
  out << doc.dump(2) << "\n";
  return holds == done ? kExitOk : kExitError;
}

void add_estimator_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--r", c.r, "Factor rank r")->check(CLI::PositiveNumber);
  sub->add_option("--min-cohort-size", c.min_cohort_size, "Drop cohorts smaller than this")
      ->check(CLI::PositiveNumber);
  sub->add_option("--method", c.method, "Per-cohort factor estimator")
      ->check(CLI::IsMember({"pc", "hetero-split"}));
  sub->add_flag("--strict", c.strict, "Exit 2 when identification warnings are raised");
}

void add_cell_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--cohort", c.cohort, "Target cohort index");
  sub->add_option("--outcome", c.outcome, "Target outcome id (or index)");
  sub->add_option("--cell", c.cells, "Target cell COHORT:OUTCOME (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Counterfactual cohort means under a low-rank factor model", "apm"};
  app.set_version_flag("--version", std::string(APM_VERSION));
  app.require_subcommand(1);

  auto* diagnose = app.add_subcommand("diagnose", "Identification report for a panel");
  diagnose->add_option("--input", c.input, "Long-format panel CSV")->required();
  diagnose->add_option("--out", c.out_dir, "Also write diagnose.json here");
  add_estimator_flags(diagnose, c);

  auto* estimate = app.add_subcommand("estimate", "Estimate every cohort's outcome means");
  estimate->add_option("--input", c.input, "Long-format panel CSV")->required();
  estimate->add_option("--out", c.out_dir, "Output directory")->required();
  estimate->add_option("--cohort", c.cohort, "Cohort whose component is estimated");
  add_estimator_flags(estimate, c);

  auto* boot = app.add_subcommand("bootstrap", "Simultaneous intervals by Bayesian bootstrap");
  boot->add_option("--input", c.input, "Long-format panel CSV")->required();
  boot->add_option("--out", c.out_dir, "Output directory")->required();
  add_estimator_flags(boot, c);
  boot->add_option("--target", c.target, "Target parameter")
      ->check(CLI::IsMember({"cell", "dynamic", "shares"}));
  add_cell_flags(boot, c);
  boot->add_option("--pre", c.pre, "Dynamic effects: pre-periods b")->check(CLI::NonNegativeNumber);
  boot->add_option("--len", c.len, "Dynamic effects: path length p")->check(CLI::PositiveNumber);
  boot->add_option("--treated-means", c.treated_means,
                   "Dynamic effects: CSV cohort_id,outcome_id,treated_mean");
  boot->add_flag("--normalize-relative-time", c.normalize_relative_time,
                 "Dynamic effects: divide by the cohort mass at each relative time");
  boot->add_option("--t1", c.t1, "Attribution shares: first outcome index");
  boot->add_option("--t2", c.t2, "Attribution shares: second outcome index");
  boot->add_option("--M", c.replicates, "Bootstrap replicates")->check(CLI::Range(2, 1 << 24));
  boot->add_option("--alpha", c.alpha, "Joint miscoverage level")->check(CLI::Range(0.0, 1.0));
  boot->add_option("--seed", c.seed, "Random seed")->required();
  boot->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  boot->add_flag("--literal-critical", c.literal_critical,
                 "Use the uncentred sup statistic max_j |theta*_j| / se_j");

  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic panel from a DGP document");
  simulate->add_option("--config", c.config_path, "DGP JSON document")->required();
  simulate->add_option("--n", c.n, "Number of units")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", c.seed, "Random seed (overrides the document's)");
  simulate->add_option("--out", c.out_dir, "Output directory")->required();
  simulate->add_flag("--strict", c.strict, "Fail instead of redrawing when a cohort is empty");

  auto* mask = app.add_subcommand("mask-eval", "Masking evaluation against a TWFE baseline");
  mask->add_option("--input", c.input, "Long-format panel CSV")->required();
  mask->add_option("--out", c.out_dir, "Output directory")->required();
  add_estimator_flags(mask, c);
  add_cell_flags(mask, c);
  mask->add_option("--B", c.reps, "Resamples per target")->check(CLI::PositiveNumber);
  mask->add_option("--seed", c.seed, "Random seed")->required();
  mask->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  mask->add_option("--estimators", c.estimators, "Estimators to score (apm, twfe)")
      ->delimiter(',');

  auto* perturb = app.add_subcommand("perturb-check", "Randomised perturbation-bound audit");
  perturb->group("");
  perturb->add_option("--cases", c.cases, "Random instances")->check(CLI::PositiveNumber);
  perturb->add_option("--d", c.dim, "Matrix dimension")->check(CLI::Range(2, 64));
  perturb->add_option("--seed", c.seed, "Random seed");
  perturb->add_option("--convention", c.convention, "Sign convention")
      ->check(CLI::IsMember({"validated", "printed"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Log log(err);
  try {
    if (*diagnose) {
      c.command = "diagnose";
      return cmd_diagnose(c, out, log);
    }
    if (*estimate) {
      c.command = "estimate";
      return cmd_estimate(c, log);
    }
    if (*boot) {
      c.command = "bootstrap";
      return cmd_bootstrap(c, log);
    }
    if (*simulate) {
      c.command = "simulate";
      return cmd_simulate(c, log);
    }
    if (*mask) {
      c.command = "mask-eval";
      return cmd_mask_eval(c, log);
    }
    c.command = "perturb-check";
    return cmd_perturb_check(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace apm::cli
