#include "apm/estimate.hpp"

#include "apm/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace apm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix observed_rows(const Matrix& basis, const IndexSet& observed) {
  Matrix rows(observed.size(), basis.cols());
  for (std::size_t k = 0; k < observed.size(); ++k) rows.row(k) = basis.row(observed[k]);
  return rows;
}

}  // namespace

Vector cohort_observed_mean(const Panel& panel, const CohortIndex& index, int cohort,
                            std::span<const double> weights) {
  if (cohort < 0 || cohort >= index.n_cohorts()) {
    throw Error(ErrorCode::InvalidArgument, "cohort out of range");
  }
  const Cohort& c = index.cohorts[cohort];
  if (c.members.empty()) throw Error(ErrorCode::EmptyCohort, "cohort has no members");
  if (!weights.empty() && static_cast<int>(weights.size()) != panel.n_units()) {
    throw Error(ErrorCode::DimensionMismatch, "weights must have one entry per unit");
  }

  Vector out = Vector::Zero(index.n_outcomes);
  const double w0 = weights.empty() ? 0.0 : weights[c.members.front()];
  const bool uniform =
      weights.empty() || (w0 > 0.0 && std::all_of(c.members.begin(), c.members.end(),
                                                   [&](int i) { return weights[i] == w0; }));
  if (uniform) {
    for (int t : c.observed) {
      double sum = 0.0;
      for (int i : c.members) sum += panel.values()(i, t);
      out(t) = sum / static_cast<double>(c.size());
    }
    return out;
  }

  double mass = 0.0;
  for (int i : c.members) mass += weights[i];
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroCohortWeight, "cohort " + std::to_string(cohort));
  for (int t : c.observed) {
    double sum = 0.0;
    for (int i : c.members) sum += weights[i] * panel.values()(i, t);
    out(t) = sum / mass;
  }
  return out;
}

Vector bridge_extrapolate(const Matrix& basis, const IndexSet& observed,
                          const Vector& observed_mean, double rank_tol) {
  const int r = static_cast<int>(basis.cols());
  const Matrix rows = observed_rows(basis, observed);
  if (static_cast<int>(observed.size()) < r || numerical_rank(rows, rank_tol) < r) {
    throw Error(ErrorCode::RankDeficientRestriction,
                "restricted factor rows have rank below " + std::to_string(r));
  }
  Vector m(observed.size());
  for (std::size_t k = 0; k < observed.size(); ++k) m(k) = observed_mean(observed[k]);
  const Matrix gram = rows.transpose() * rows;
  const Vector coef = gram.ldlt().solve(rows.transpose() * m);
  return basis * coef;
}

Matrix r_matrix(const Matrix& basis, const IndexSet& observed) {
  const int t = static_cast<int>(basis.rows());
  const int r = static_cast<int>(basis.cols());
  const Matrix rows = observed_rows(basis, observed);
  if (static_cast<int>(observed.size()) < r || numerical_rank(rows, kDefaultRankTol) < r) {
    throw Error(ErrorCode::SingularGram, "Γ'E_cΓ is singular");
  }
  const Matrix gram = rows.transpose() * rows;
  Matrix complement = Matrix::Identity(t, t) - selector(observed, t);
  return Matrix::Identity(t, t) + basis * gram.ldlt().solve(basis.transpose() * complement);
}

Estimate estimate_all(const Panel& panel, const EstimatorConfig& config,
                      std::span<const double> weights) {
  return estimate_all(panel, cohortize(panel, config.min_cohort_size), config, weights);
}

Estimate estimate_all(const Panel& panel, const CohortIndex& index, const EstimatorConfig& config,
                      std::span<const double> weights) {
  const int t = index.n_outcomes;
  const int r = config.r;
  if (r < 1 || r >= t) {
    throw Error(ErrorCode::BadRank, "rank " + std::to_string(r) + " must satisfy 1 <= r < T");
  }
  if (config.target_cohort && (*config.target_cohort < 0 ||
                               *config.target_cohort >= index.n_cohorts())) {
    throw Error(ErrorCode::InvalidArgument, "target cohort out of range");
  }

  Estimate est;
  est.index = index;
  const int n_cohorts = index.n_cohorts();
  const std::size_t min_observed =
      config.method == FactorMethod::HeteroskedasticSplit ? 2 * r + 1 : r;

  std::vector<bool> eligible(n_cohorts);
  for (int c = 0; c < n_cohorts; ++c) {
    eligible[c] = index.cohorts[c].observed.size() >= min_observed;
    if (!eligible[c]) {
      est.warnings.push_back("cohort " + std::to_string(c) + " observes fewer than " +
                             std::to_string(min_observed) + " outcomes and is excluded");
    }
  }
  if (config.target_cohort && !eligible[*config.target_cohort]) {
    throw Error(ErrorCode::UnidentifiedTarget, "target cohort observes too few outcomes");
  }

  OverlapGraph graph = build_overlap_graph(index, r);
  for (int c = 0; c < n_cohorts; ++c) {
    if (eligible[c]) continue;
    graph.adjacency.row(c).setConstant(false);
    graph.adjacency.col(c).setConstant(false);
  }
  const Components comps = connected_components(graph);

  // Target's component, else the eligible component with the most units.
  int chosen = -1;
  if (config.target_cohort) {
    chosen = comps.label[*config.target_cohort];
  } else {
    int best_units = -1;
    for (const auto& group : comps.groups) {
      if (!eligible[group.front()]) continue;
      int units = 0;
      for (int c : group) units += index.cohorts[c].size();
      if (units > best_units) {
        best_units = units;
        chosen = group.front();
      }
    }
    if (chosen < 0) throw Error(ErrorCode::UnidentifiedTarget, "no cohort observes r outcomes");
  }
  for (int c = 0; c < n_cohorts; ++c) {
    if (comps.label[c] == chosen && eligible[c]) {
      est.component.push_back(c);
    } else {
      est.excluded_cohorts.push_back(c);
    }
  }
  if (comps.count() > 1) {
    std::string list;
    for (int c : est.excluded_cohorts) list += (list.empty() ? "" : ",") + std::to_string(c);
    est.warnings.push_back("overlap graph is disconnected; estimating on the component of cohort " +
                           std::to_string(chosen) + ", excluded cohorts: " + list);
  }

  // Covered outcomes and their positions in the reduced APM.
  std::vector<int> position(t, -1);
  for (int c : est.component) {
    for (int k : index.cohorts[c].observed) position[k] = 0;
  }
  for (int k = 0; k < t; ++k) {
    if (position[k] == 0) {
      position[k] = static_cast<int>(est.covered_outcomes.size());
      est.covered_outcomes.push_back(k);
    }
  }
  const int s = static_cast<int>(est.covered_outcomes.size());
  if (s < t) {
    est.warnings.push_back(std::to_string(t - s) +
                           " outcome(s) are not observed in the estimation component");
  }
  if (r >= s) {
    throw Error(ErrorCode::UnidentifiedTarget,
                "component covers " + std::to_string(s) + " outcomes, need more than r");
  }

  std::vector<CohortProjection> projections;
  projections.reserve(est.component.size());
  for (int c : est.component) {
    const CohortSecondMoment moment = second_moment(panel, index, c, weights);
    CohortFactorEstimate factor = config.method == FactorMethod::PC
                                      ? pc_factors(moment, r)
                                      : hetero_split_factors(moment, r);
    CohortProjection proj;
    proj.cohort = c;
    proj.projection.resize(s, s);
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        proj.projection(a, b) =
            factor.basis.row(est.covered_outcomes[a]).dot(factor.basis.row(est.covered_outcomes[b]));
      }
    }
    for (int k : factor.observed) proj.observed.push_back(position[k]);
    projections.push_back(std::move(proj));
    est.factors.push_back(std::move(factor));
  }

  est.apm = build_apm(projections, s);
  FactorBasis reduced = null_basis(est.apm, r, config.gap_floor_rel * std::max(0.0, est.apm.spectrum(s - 1)));
  est.basis = reduced;
  est.basis.gamma = embed_rows(reduced.gamma, est.covered_outcomes, t);
  for (const auto& w : reduced.warnings) est.warnings.push_back(w);

  // Cohort means and shares over every retained unit.
  CohortMeans& means = est.means;
  means.mu_hat = Matrix::Constant(n_cohorts, t, kNaN);
  means.observed.setConstant(n_cohorts, t, false);
  means.identified.setConstant(n_cohorts, t, false);
  means.available.assign(n_cohorts, false);
  means.observed_mean = Matrix::Zero(n_cohorts, t);
  means.cohort_probs = Vector::Zero(n_cohorts);
  for (int c = 0; c < n_cohorts; ++c) {
    const Cohort& cohort = index.cohorts[c];
    for (int k : cohort.observed) means.observed(c, k) = true;
    if (weights.empty()) {
      means.cohort_probs(c) = cohort.size();
    } else {
      double mass = 0.0;
      for (int i : cohort.members) mass += weights[i];
      means.cohort_probs(c) = mass;
    }
  }
  const double total = means.cohort_probs.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroCohortWeight, "retained units carry no weight");
  means.cohort_probs /= total;

  for (int c = 0; c < n_cohorts; ++c) {
    const Cohort& cohort = index.cohorts[c];
    const bool in_component =
        std::binary_search(est.component.begin(), est.component.end(), c);
    if (!in_component && means.cohort_probs(c) == 0.0) continue;
    const Vector m = cohort_observed_mean(panel, index, c, weights);
    means.observed_mean.row(c) = m.transpose();
    if (!in_component) continue;
    Vector mu;
    try {
      mu = bridge_extrapolate(est.basis.gamma, cohort.observed, m, config.rank_tol);
    } catch (const Error& e) {
      if (config.target_cohort && *config.target_cohort == c) {
        throw Error(ErrorCode::UnidentifiedTarget, e.what());
      }
      est.warnings.push_back("cohort " + std::to_string(c) + ": " + e.what());
      continue;
    }
    means.available[c] = true;
    for (int k : est.covered_outcomes) {
      means.mu_hat(c, k) = mu(k);
      means.identified(c, k) = true;
    }
    if (static_cast<int>(cohort.observed.size()) == r) {
      est.warnings.push_back("cohort " + std::to_string(c) +
                             " observes exactly r outcomes; extrapolation has no residual degrees of freedom");
    }
  }
  return est;
}

}  // namespace apm
