#include "apm/sim.hpp"

#include "apm/error.hpp"
#include "apm/inference.hpp"
#include "apm/parallel.hpp"

#include <Eigen/Cholesky>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace apm {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

std::string padded(const std::string& prefix, int value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

void validate_sets(const std::vector<IndexSet>& sets, int t) {
  require(!sets.empty(), "pattern has no cohorts");
  std::vector<char> covered(t, 0);
  for (const auto& s : sets) {
    require(!s.empty(), "every cohort must observe at least one outcome");
    for (std::size_t k = 0; k < s.size(); ++k) {
      require(s[k] >= 0 && s[k] < t, "outcome index out of range");
      require(k == 0 || s[k] > s[k - 1], "observed sets must be sorted and unique");
      covered[s[k]] = 1;
    }
  }
  require(std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }),
          "every outcome must be observed by some cohort");
}

}  // namespace

// ---- truth -----------------------------------------------------------------

Matrix DgpTruth::mu_true() const {
  Matrix mu(n_cohorts(), n_outcomes());
  for (int c = 0; c < n_cohorts(); ++c) mu.row(c) = (gamma * cohorts[c].loading_mean).transpose();
  return mu;
}

Vector DgpTruth::cohort_probs() const {
  Vector p(n_cohorts());
  for (int c = 0; c < n_cohorts(); ++c) p(c) = cohorts[c].prob;
  return p;
}

Matrix DgpTruth::loading_second_moment(int cohort) const {
  const CohortDgp& c = cohorts.at(cohort);
  return c.loading_cov + c.loading_mean * c.loading_mean.transpose();
}

Matrix DgpTruth::population_second_moment(int cohort) const {
  const int t = n_outcomes();
  const CohortDgp& c = cohorts.at(cohort);
  Matrix full = gamma * loading_second_moment(cohort) * gamma.transpose();
  if (noise == NoiseKind::Homoskedastic) {
    full.diagonal().array() += c.noise_var;
  } else {
    full.diagonal() += c.noise_vars;
  }
  const Matrix e = selector(c.t_set, t);
  return e * full * e;
}

std::vector<std::string> DgpTruth::outcome_ids() const {
  const int width = std::max<int>(2, static_cast<int>(std::to_string(n_outcomes()).size()));
  std::vector<std::string> ids;
  for (int t = 0; t < n_outcomes(); ++t) ids.push_back(padded("t", t + 1, width));
  return ids;
}

void DgpTruth::validate() const {
  const int t = n_outcomes();
  const int r = rank();
  require(t >= 1 && r >= 1, "gamma must be a nonempty T x r matrix");
  require(gamma.allFinite(), "gamma must be finite");
  require(!cohorts.empty(), "at least one cohort is required");
  double total = 0.0;
  std::set<IndexSet> seen;
  for (int c = 0; c < n_cohorts(); ++c) {
    const CohortDgp& k = cohorts[c];
    const std::string where = "cohort " + std::to_string(c) + ": ";
    require(k.prob >= 0.0 && std::isfinite(k.prob), where + "probability must be nonnegative");
    total += k.prob;
    require(k.loading_mean.size() == r, where + "loading_mean must have length r");
    require(k.loading_cov.rows() == r && k.loading_cov.cols() == r,
            where + "loading_cov must be r x r");
    require(k.loading_cov.isApprox(k.loading_cov.transpose(), 1e-12),
            where + "loading_cov must be symmetric");
    Eigen::LLT<Matrix> llt(k.loading_cov);
    require(llt.info() == Eigen::Success, where + "loading_cov must be positive definite");
    require(!k.t_set.empty(), where + "t_set must be nonempty");
    for (std::size_t j = 0; j < k.t_set.size(); ++j) {
      require(k.t_set[j] >= 0 && k.t_set[j] < t, where + "t_set index out of range");
      require(j == 0 || k.t_set[j] > k.t_set[j - 1], where + "t_set must be sorted and unique");
    }
    require(seen.insert(k.t_set).second, where + "duplicate t_set");
    if (noise == NoiseKind::Homoskedastic) {
      require(k.noise_var >= 0.0 && std::isfinite(k.noise_var),
              where + "noise_var must be nonnegative");
    } else {
      require(k.noise_vars.size() == t, where + "noise_vars must have length T");
      require((k.noise_vars.array() >= 0.0).all() && k.noise_vars.allFinite(),
              where + "noise_vars must be nonnegative");
    }
  }
  require(std::abs(total - 1.0) <= 1e-9, "cohort probabilities must sum to one");
}

// ---- missingness patterns ---------------------------------------------------

MissingnessPattern MissingnessPattern::block(int n_outcomes) {
  require(n_outcomes >= 2, "block pattern needs T >= 2");
  MissingnessPattern p;
  p.kind = Kind::Block;
  p.n_cohorts = 2;
  p.n_outcomes = n_outcomes;
  return p;
}

MissingnessPattern MissingnessPattern::staircase(int n_cohorts, int width) {
  require(n_cohorts >= 1 && width >= 1, "staircase needs C >= 1 and width >= 1");
  MissingnessPattern p;
  p.kind = Kind::Staircase;
  p.n_cohorts = n_cohorts;
  p.width = width;
  p.n_outcomes = n_cohorts + width - 1;
  return p;
}

MissingnessPattern MissingnessPattern::three_cohort() {
  MissingnessPattern p;
  p.kind = Kind::ThreeCohort;
  p.n_cohorts = 3;
  p.n_outcomes = 4;
  return p;
}

MissingnessPattern MissingnessPattern::staggered(int n_cohorts, int pre_window) {
  require(n_cohorts >= 1 && pre_window >= 1, "staggered pattern needs C >= 1 and a pre-window");
  MissingnessPattern p;
  p.kind = Kind::StaggeredEventStudy;
  p.n_cohorts = n_cohorts;
  p.pre_window = pre_window;
  p.n_outcomes = pre_window + n_cohorts - 1;
  return p;
}

MissingnessPattern MissingnessPattern::from_sets(std::vector<IndexSet> sets, int n_outcomes) {
  validate_sets(sets, n_outcomes);
  MissingnessPattern p;
  p.kind = Kind::Custom;
  p.n_cohorts = static_cast<int>(sets.size());
  p.n_outcomes = n_outcomes;
  p.custom = std::move(sets);
  return p;
}

std::vector<IndexSet> MissingnessPattern::t_sets() const {
  std::vector<IndexSet> sets;
  auto run = [](int from, int count) {
    IndexSet s(count);
    for (int k = 0; k < count; ++k) s[k] = from + k;
    return s;
  };
  switch (kind) {
    case Kind::Block:
      sets = {run(0, n_outcomes - 1), run(0, n_outcomes)};
      break;
    case Kind::Staircase:
      for (int c = 0; c < n_cohorts; ++c) sets.push_back(run(c, width));
      break;
    case Kind::ThreeCohort:
      sets = {{0, 1}, {1, 2}, {2, 3}};
      break;
    case Kind::StaggeredEventStudy:
      // Treated at pre_window + c; the control window is the periods before.
      for (int c = 0; c < n_cohorts; ++c) sets.push_back(run(c, pre_window));
      break;
    case Kind::Custom:
      sets = custom;
      break;
  }
  validate_sets(sets, outcomes());
  return sets;
}

int MissingnessPattern::outcomes() const {
  switch (kind) {
    case Kind::Block:
      return n_outcomes;
    case Kind::Staircase:
      return n_cohorts + width - 1;
    case Kind::ThreeCohort:
      return 4;
    case Kind::StaggeredEventStudy:
      return pre_window + n_cohorts - 1;
    case Kind::Custom:
      return n_outcomes;
  }
  return n_outcomes;
}

// ---- generation --------------------------------------------------------------

SimulatedPanel generate_detailed(const DgpTruth& truth, int n, std::uint64_t seed,
                                 const GenerateOptions& options) {
  truth.validate();
  const int n_cohorts = truth.n_cohorts();
  const int t = truth.n_outcomes();
  const int r = truth.rank();
  require(n >= n_cohorts, "need at least one unit per cohort (n >= C)");

  std::mt19937_64 rng(seed);
  const Vector probs = truth.cohort_probs();
  std::discrete_distribution<int> pick(probs.data(), probs.data() + probs.size());

  SimulatedPanel out;
  out.truth_cohort.assign(n, 0);
  for (int attempt = 0;; ++attempt) {
    std::vector<int> counts(n_cohorts, 0);
    for (int i = 0; i < n; ++i) ++counts[out.truth_cohort[i] = pick(rng)];
    const auto empty = std::find(counts.begin(), counts.end(), 0);
    if (empty == counts.end()) break;
    if (!options.redraw_empty || attempt + 1 >= 1000) {
      throw Error(ErrorCode::DegenerateCohort,
                  "cohort " + std::to_string(empty - counts.begin()) + " drew no units");
    }
  }

  std::vector<Matrix> chol(n_cohorts);
  for (int c = 0; c < n_cohorts; ++c) chol[c] = truth.cohorts[c].loading_cov.llt().matrixL();

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-std::sqrt(3.0), std::sqrt(3.0));
  out.loadings.resize(n, r);
  Matrix values = Matrix::Zero(n, t);
  ObservedMask observed = ObservedMask::Constant(n, t, false);
  std::vector<std::string> ids;
  const int width = std::max<int>(6, static_cast<int>(std::to_string(n).size()));
  Vector z(r);
  for (int i = 0; i < n; ++i) {
    const CohortDgp& c = truth.cohorts[out.truth_cohort[i]];
    for (int k = 0; k < r; ++k) {
      z(k) = truth.loadings == LoadingDistribution::Gaussian ? normal(rng) : uniform(rng);
    }
    const Vector lambda = c.loading_mean + chol[out.truth_cohort[i]] * z;
    out.loadings.row(i) = lambda.transpose();
    for (int s : c.t_set) {
      const double var = truth.noise == NoiseKind::Homoskedastic ? c.noise_var : c.noise_vars(s);
      values(i, s) = truth.gamma.row(s).dot(lambda) + std::sqrt(var) * normal(rng);
      observed(i, s) = true;
    }
    ids.push_back(padded("u", i + 1, width));
  }
  out.panel = Panel(std::move(ids), truth.outcome_ids(), std::move(values), std::move(observed));
  return out;
}

Panel generate(const DgpTruth& truth, int n, std::uint64_t seed, const GenerateOptions& options) {
  return generate_detailed(truth, n, seed, options).panel;
}

// ---- two-way fixed effects -----------------------------------------------------

Matrix twfe_estimate(const Panel& panel, const CohortIndex& index,
                     std::span<const double> weights) {
  const int t = index.n_outcomes;
  const int n_cohorts = index.n_cohorts();
  if (!weights.empty() && static_cast<int>(weights.size()) != panel.n_units()) {
    throw Error(ErrorCode::DimensionMismatch, "weights must have one entry per unit");
  }

  // Every unit of a cohort observes the same outcomes, so the unit effects
  // can be profiled out cohort by cohort: L g = b with
  // L = Σ_c W_c (E_c - 1_c 1_c' / |T_c|), b_t = Σ_c W_c 1{t in T_c} (m_ct - m̄_c).
  Matrix lap = Matrix::Zero(t, t);
  Vector rhs = Vector::Zero(t);
  std::vector<Vector> means(n_cohorts);
  std::vector<double> level(n_cohorts, 0.0);
  std::vector<double> mass(n_cohorts, 0.0);
  for (int c = 0; c < n_cohorts; ++c) {
    const Cohort& cohort = index.cohorts[c];
    if (cohort.members.empty()) continue;
    for (int i : cohort.members) mass[c] += weights.empty() ? 1.0 : weights[i];
    if (!(mass[c] > 0.0)) continue;
    means[c] = cohort_observed_mean(panel, index, c, weights);
    const double k = static_cast<double>(cohort.observed.size());
    for (int s : cohort.observed) level[c] += means[c](s) / k;
    for (int a : cohort.observed) {
      lap(a, a) += mass[c];
      for (int b : cohort.observed) lap(a, b) -= mass[c] / k;
      rhs(a) += mass[c] * (means[c](a) - level[c]);
    }
  }

  // Connected design <=> the Laplacian-like L has a one-dimensional kernel
  // (the constants); adding 11' then pins Σ g = 0.
  const SymEigen eig = sym_eigen(lap);
  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 1.0);
  int kernel = 0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) <= 1e-10 * scale) ++kernel;
  }
  if (kernel > 1) {
    throw Error(ErrorCode::DisconnectedDesign,
                "unit-outcome graph splits into " + std::to_string(kernel) + " pieces");
  }
  const Matrix system = lap + Matrix::Ones(t, t);
  const Vector g = system.ldlt().solve(rhs);

  Matrix out = Matrix::Constant(n_cohorts, t, kNaN);
  for (int c = 0; c < n_cohorts; ++c) {
    if (!(mass[c] > 0.0)) continue;
    double g_bar = 0.0;
    for (int s : index.cohorts[c].observed) g_bar += g(s);
    g_bar /= static_cast<double>(index.cohorts[c].observed.size());
    out.row(c) = (Vector::Constant(t, level[c] - g_bar) + g).transpose();
  }
  return out;
}

// ---- masking evaluation ----------------------------------------------------------

std::string_view to_string(MaskEstimator estimator) noexcept {
  return estimator == MaskEstimator::APM ? "apm" : "twfe";
}

std::vector<MaskMetrics> mask_eval(const Panel& panel, std::span<const MaskTarget> targets,
                                   const MaskEvalOptions& options) {
  require(options.reps >= 1, "mask_eval needs at least one replicate");
  const CohortIndex index = cohortize(panel, options.config.min_cohort_size);
  std::vector<MaskMetrics> out;

  for (std::size_t k = 0; k < targets.size(); ++k) {
    const MaskTarget target = targets[k];
    const MaskResult masked = mask_cell(panel, index, target.cohort, target.outcome);

    auto unidentified = [&](const std::string& why) {
      if (options.strict) {
        throw Error(ErrorCode::UnidentifiedAfterMask,
                    "cohort " + std::to_string(target.cohort) + ", outcome " +
                        std::to_string(target.outcome) + ": " + why);
      }
      for (MaskEstimator e : options.estimators) {
        MaskMetrics m;
        m.target = target;
        m.estimator = e;
        m.identified = false;
        m.truth = masked.ground_truth_mean;
        m.mean_estimate = m.abs_bias = m.se = m.rmse = kNaN;
        out.push_back(m);
      }
    };
    if (masked.degenerate) {
      unidentified("the cohort observes no other outcome");
      continue;
    }

    // The masked cohort keeps its identity even if its reduced observed set
    // coincides with another cohort's.
    CohortIndex masked_index = index;
    auto& obs = masked_index.cohorts[target.cohort].observed;
    obs.erase(std::find(obs.begin(), obs.end(), target.outcome));

    EstimatorConfig config = options.config;
    config.target_cohort = target.cohort;
    bool apm_ok = true;
    bool twfe_ok = true;
    try {
      const Estimate probe = estimate_all(masked.panel, masked_index, config);
      apm_ok = std::isfinite(probe.means.mu_hat(target.cohort, target.outcome));
    } catch (const Error&) {
      apm_ok = false;
    }
    try {
      twfe_estimate(masked.panel, masked_index);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DisconnectedDesign) throw;
      twfe_ok = false;
    }
    if (!apm_ok && options.strict) {
      unidentified("the masked overlap graph no longer identifies the cell");
    }

    const int reps = options.reps;
    const int n = masked.panel.n_units();
    Matrix draws = Matrix::Constant(reps, 2, kNaN);
    const std::uint64_t stream = replicate_seed(options.seed, k);
    parallel_for(reps, options.threads, [&](int b) {
      std::mt19937_64 rng(replicate_seed(stream, static_cast<std::uint64_t>(b)));
      std::vector<double> w(n, 0.0);
      for (const Cohort& c : masked_index.cohorts) {
        std::uniform_int_distribution<int> pick(0, c.size() - 1);
        for (int d = 0; d < c.size(); ++d) w[c.members[pick(rng)]] += 1.0;
      }
      for (double& x : w) x /= static_cast<double>(n);
      if (apm_ok) {
        draws(b, 0) = estimate_all(masked.panel, masked_index, config, w)
                          .means.mu_hat(target.cohort, target.outcome);
      }
      if (twfe_ok) {
        draws(b, 1) = twfe_estimate(masked.panel, masked_index, w)(target.cohort, target.outcome);
      }
    });

    for (MaskEstimator e : options.estimators) {
      MaskMetrics m;
      m.target = target;
      m.estimator = e;
      m.truth = masked.ground_truth_mean;
      const int col = e == MaskEstimator::APM ? 0 : 1;
      m.identified = col == 0 ? apm_ok : twfe_ok;
      if (!m.identified) {
        m.mean_estimate = m.abs_bias = m.se = m.rmse = kNaN;
        out.push_back(m);
        continue;
      }
      const auto x = draws.col(col).array();
      m.mean_estimate = x.mean();
      m.abs_bias = std::abs(m.mean_estimate - m.truth);
      m.se = std::sqrt((x - m.mean_estimate).square().mean());
      m.rmse = std::sqrt((x - m.truth).square().mean());
      out.push_back(m);
    }
  }
  return out;
}

// ---- oracle influence function ------------------------------------------------------

Matrix oracle_influence(const DgpTruth& truth, const Panel& panel, const CohortIndex& index,
                        int target_cohort, SignConvention convention) {
  if (truth.noise != NoiseKind::Homoskedastic) {
    throw Error(ErrorCode::HeteroskedasticTruth, "the oracle needs homoskedastic noise");
  }
  truth.validate();
  const int t = truth.n_outcomes();
  const int r = truth.rank();
  require(index.n_outcomes == t, "panel and truth disagree on T");
  require(target_cohort >= 0 && target_cohort < index.n_cohorts(), "target cohort out of range");

  // Truth cohort behind each index cohort; cohorts observing fewer than r
  // outcomes carry no factor information.
  std::vector<int> source(index.n_cohorts(), -1);
  for (int c = 0; c < index.n_cohorts(); ++c) {
    for (int k = 0; k < truth.n_cohorts(); ++k) {
      if (truth.cohorts[k].t_set == index.cohorts[c].observed) source[c] = k;
    }
    require(source[c] >= 0, "index cohort " + std::to_string(c) + " is not in the truth");
  }

  std::vector<EigenWindow> windows(index.n_cohorts());
  std::vector<bool> used(index.n_cohorts(), false);
  Matrix apm_matrix = Matrix::Zero(t, t);
  for (int c = 0; c < index.n_cohorts(); ++c) {
    if (static_cast<int>(index.cohorts[c].observed.size()) < r) continue;
    used[c] = true;
    windows[c] = EigenWindow::of(truth.population_second_moment(source[c]), t - r, r);
    apm_matrix += index.mask(c) - windows[c].projection();
  }
  const EigenWindow null_window = EigenWindow::of(apm_matrix, 0, r);

  const IndexSet& target_set = index.cohorts[target_cohort].observed;
  const Matrix r_mat = r_matrix(truth.gamma, target_set);
  const Vector mu = truth.gamma * truth.cohorts[source[target_cohort]].loading_mean;
  const double flip = convention == SignConvention::Validated ? 1.0 : -1.0;
  const double p_target = truth.cohorts[source[target_cohort]].prob;

  Matrix psi = Matrix::Zero(panel.n_units(), t);
  for (int c = 0; c < index.n_cohorts(); ++c) {
    const Cohort& cohort = index.cohorts[c];
    const double p = truth.cohorts[source[c]].prob;
    const Matrix v = used[c] ? truth.population_second_moment(source[c]) : Matrix();
    const Matrix e = index.mask(c);
    for (int i : cohort.members) {
      const Vector y = e * panel.values().row(i).transpose();
      Vector row = Vector::Zero(t);
      if (used[c]) {
        const Matrix d = (y * y.transpose() - v) / p;
        const Matrix d_pi_c = first_order_term(windows[c], d);
        const Matrix d_pi = first_order_term(null_window, -d_pi_c);
        row += flip * (r_mat * (d_pi * mu));
      }
      if (c == target_cohort) {
        row += (bridge_extrapolate(truth.gamma, target_set, y) - mu) / p_target;
      }
      psi.row(i) = row.transpose();
    }
  }
  return psi;
}

// ---- DGP documents --------------------------------------------------------------------

namespace {

Matrix to_matrix(const json& j, int rows, int cols, const std::string& what) {
  Matrix m(rows, cols);
  if (j.is_number() && rows == 1 && cols == 1) {
    m(0, 0) = j.get<double>();
    return m;
  }
  require(j.is_array() && static_cast<int>(j.size()) == rows, what + " has the wrong shape");
  for (int a = 0; a < rows; ++a) {
    const json& row = j[a];
    if (cols == 1 && row.is_number()) {
      m(a, 0) = row.get<double>();
      continue;
    }
    require(row.is_array() && static_cast<int>(row.size()) == cols, what + " has the wrong shape");
    for (int b = 0; b < cols; ++b) m(a, b) = row[b].get<double>();
  }
  return m;
}

Vector to_vector(const json& j, int n, const std::string& what) {
  if (j.is_number() && n == 1) return Vector::Constant(1, j.get<double>());
  require(j.is_array() && static_cast<int>(j.size()) == n, what + " must have length " +
                                                              std::to_string(n));
  Vector v(n);
  for (int k = 0; k < n; ++k) v(k) = j[k].get<double>();
  return v;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(m(a, b));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

}  // namespace

DgpConfig parse_dgp_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("DGP document: ") + e.what());
  }
  try {
    require(doc.is_object(), "DGP document must be a JSON object");
    DgpConfig cfg;
    cfg.seed = doc.value("seed", std::uint64_t{0});
    const int t = doc.at("T").get<int>();
    const int r = doc.at("r").get<int>();
    require(t >= 1 && r >= 1, "T and r must be positive");

    const std::string noise = doc.value("noise", std::string("homoskedastic"));
    require(noise == "homoskedastic" || noise == "heteroskedastic",
            "noise must be homoskedastic or heteroskedastic");
    cfg.truth.noise = noise == "homoskedastic" ? NoiseKind::Homoskedastic
                                               : NoiseKind::Heteroskedastic;
    const std::string loadings = doc.value("loadings", std::string("gaussian"));
    require(loadings == "gaussian" || loadings == "uniform",
            "loadings must be gaussian or uniform");
    cfg.truth.loadings = loadings == "gaussian" ? LoadingDistribution::Gaussian
                                                : LoadingDistribution::Uniform;

    const json& gamma = doc.at("gamma");
    if (gamma.is_string()) {
      require(gamma.get<std::string>() == "random", "gamma must be a matrix or \"random\"");
      std::mt19937_64 rng(replicate_seed(cfg.seed, 0x67616d6d61ULL));
      std::normal_distribution<double> normal(0.0, 1.0);
      cfg.truth.gamma.resize(t, r);
      for (int a = 0; a < t; ++a) {
        for (int b = 0; b < r; ++b) cfg.truth.gamma(a, b) = normal(rng);
      }
    } else {
      cfg.truth.gamma = to_matrix(gamma, t, r, "gamma");
    }

    for (const json& c : doc.at("cohorts")) {
      CohortDgp k;
      k.prob = c.at("prob").get<double>();
      k.loading_mean = to_vector(c.at("loading_mean"), r, "loading_mean");
      k.loading_cov = c.contains("loading_cov") ? to_matrix(c.at("loading_cov"), r, r, "loading_cov")
                                                : Matrix::Identity(r, r);
      k.t_set = c.at("t_set").get<IndexSet>();
      k.noise_var = c.value("noise_var", 0.0);
      if (c.contains("noise_vars")) k.noise_vars = to_vector(c.at("noise_vars"), t, "noise_vars");
      cfg.truth.cohorts.push_back(std::move(k));
    }
    cfg.truth.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("DGP document: ") + e.what());
  }
}

std::string dgp_to_json(const DgpTruth& truth) {
  json doc;
  doc["T"] = truth.n_outcomes();
  doc["r"] = truth.rank();
  doc["gamma"] = matrix_json(truth.gamma);
  doc["noise"] = truth.noise == NoiseKind::Homoskedastic ? "homoskedastic" : "heteroskedastic";
  doc["loadings"] = truth.loadings == LoadingDistribution::Gaussian ? "gaussian" : "uniform";
  json cohorts = json::array();
  for (const CohortDgp& c : truth.cohorts) {
    json k;
    k["prob"] = c.prob;
    k["loading_mean"] = vector_json(c.loading_mean);
    k["loading_cov"] = matrix_json(c.loading_cov);
    k["t_set"] = c.t_set;
    if (truth.noise == NoiseKind::Homoskedastic) {
      k["noise_var"] = c.noise_var;
    } else {
      k["noise_vars"] = vector_json(c.noise_vars);
    }
    cohorts.push_back(k);
  }
  doc["cohorts"] = cohorts;
  const Matrix mu = truth.mu_true();
  doc["mu_true"] = matrix_json(mu);
  doc["outcome_ids"] = truth.outcome_ids();
  return doc.dump(2);
}

}  // namespace apm
