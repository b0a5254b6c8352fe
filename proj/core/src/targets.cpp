#include "apm/targets.hpp"

#include "apm/error.hpp"

#include <cmath>
#include <type_traits>
#include <algorithm>

namespace apm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double checked_mu(const CohortMeans& means, int c, int t) {
  const double mu = means.mu_hat(c, t);
  if (!std::isfinite(mu)) {
    throw Error(ErrorCode::UnidentifiedTarget,
                "mu[" + std::to_string(c) + "," + std::to_string(t) + "] is not identified");
  }
  return mu;
}

}  // namespace

std::vector<int> default_cohort_periods(const CohortIndex& index) {
  std::vector<int> periods;
  periods.reserve(index.n_cohorts());
  for (const auto& c : index.cohorts) periods.push_back(c.observed.back() + 1);
  return periods;
}

Vector dynamic_effects(const CohortMeans& means, const Matrix& treated_means, int pre_periods,
                       int length, std::span<const int> cohort_periods,
                       bool normalize_relative_time) {
  const int n_cohorts = means.n_cohorts();
  const int t_count = means.n_outcomes();
  if (length < 1 || pre_periods < 0 || pre_periods + 1 > length) {
    throw Error(ErrorCode::InvalidArgument, "dynamic effects need p >= 1 and 1 <= b + 1 <= p");
  }
  if (treated_means.rows() != n_cohorts || treated_means.cols() != t_count) {
    throw Error(ErrorCode::DimensionMismatch, "treated means must be C x T");
  }
  if (static_cast<int>(cohort_periods.size()) != n_cohorts) {
    throw Error(ErrorCode::DimensionMismatch, "need one treatment period per cohort");
  }

  Vector theta = Vector::Zero(length);
  for (int j = 1; j <= length; ++j) {
    const int relative = j - pre_periods - 1;
    double mass = 0.0;
    for (int c = 0; c < n_cohorts; ++c) {
      const int t = cohort_periods[c] + relative;
      if (t < 0 || t >= t_count) continue;
      const double m = treated_means(c, t);
      if (!std::isfinite(m)) {
        throw Error(ErrorCode::MissingTreatedMean,
                    "no treated mean for cohort " + std::to_string(c) + ", outcome " +
                        std::to_string(t));
      }
      const double p = means.cohort_probs(c);
      theta(j - 1) += p * (m - checked_mu(means, c, t));
      mass += p;
    }
    if (normalize_relative_time && mass > 0.0) theta(j - 1) /= mass;
  }
  return theta;
}

AttributionShares attribution_shares(const CohortMeans& means, const CohortIndex& index, int t1,
                                     int t2) {
  const int t_count = means.n_outcomes();
  if (t1 == t2 || t1 < 0 || t2 < 0 || t1 >= t_count || t2 >= t_count) {
    throw Error(ErrorCode::InvalidArgument, "attribution shares need distinct valid outcomes");
  }
  double scale = 0.0;
  for (Eigen::Index c = 0; c < means.mu_hat.rows(); ++c) {
    for (Eigen::Index t = 0; t < means.mu_hat.cols(); ++t) {
      if (std::isfinite(means.mu_hat(c, t))) scale = std::max(scale, std::abs(means.mu_hat(c, t)));
    }
  }

  auto population_mean = [&](int t) {
    double sum = 0.0;
    for (int c = 0; c < means.n_cohorts(); ++c) sum += means.cohort_probs(c) * checked_mu(means, c, t);
    return sum;
  };
  auto observed_mean = [&](int t) {
    double num = 0.0;
    double den = 0.0;
    for (int c = 0; c < means.n_cohorts(); ++c) {
      const auto& obs = index.cohorts[c].observed;
      if (!std::binary_search(obs.begin(), obs.end(), t)) continue;
      num += means.cohort_probs(c) * checked_mu(means, c, t);
      den += means.cohort_probs(c);
    }
    if (!(den > 0.0)) {
      throw Error(ErrorCode::DegenerateDenominator,
                  "outcome " + std::to_string(t) + " is observed by no cohort");
    }
    return num / den;
  };

  const double all1 = population_mean(t1);
  const double all2 = population_mean(t2);
  const double obs1 = observed_mean(t1);
  const double obs2 = observed_mean(t2);
  AttributionShares out;
  out.denominator = obs1 - obs2;
  if (std::abs(out.denominator) < 1e-10 * std::max(scale, 1e-300)) {
    throw Error(ErrorCode::DegenerateDenominator, "observed mean difference is numerically zero");
  }
  out.column = (all1 - all2) / out.denominator;
  out.row = ((obs1 - all1) - (obs2 - all2)) / out.denominator;
  return out;
}

Vector plug_in(const TargetFunction& h, const CohortMeans& means, const Vector& eta) {
  Vector theta;
  try {
    theta = h(means.mu_hat, eta);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::TargetEvaluationError, e.what());
  } catch (...) {
    throw Error(ErrorCode::TargetEvaluationError, "target function threw");
  }
  if (!theta.allFinite()) {
    throw Error(ErrorCode::TargetEvaluationError, "target function returned a non-finite value");
  }
  return theta;
}

void validate_target(const TargetSpec& target, const CohortIndex& index) {
  const int n_cohorts = index.n_cohorts();
  const int t_count = index.n_outcomes;
  std::visit(
      Overloaded{
          [&](const DynamicEffectsSpec& s) {
            if (s.length < 1 || s.pre_periods < 0 || s.pre_periods + 1 > s.length) {
              throw Error(ErrorCode::InvalidArgument, "dynamic effects need p >= 1 and b + 1 <= p");
            }
            if (s.treated_means.rows() != n_cohorts || s.treated_means.cols() != t_count) {
              throw Error(ErrorCode::DimensionMismatch, "treated means must be C x T");
            }
            if (!s.cohort_periods.empty() && static_cast<int>(s.cohort_periods.size()) != n_cohorts) {
              throw Error(ErrorCode::DimensionMismatch, "need one treatment period per cohort");
            }
          },
          [&](const AttributionSharesSpec& s) {
            if (s.t1 == s.t2 || s.t1 < 0 || s.t2 < 0 || s.t1 >= t_count || s.t2 >= t_count) {
              throw Error(ErrorCode::InvalidArgument, "attribution shares need distinct outcomes");
            }
          },
          [&](const LinearFunctionalSpec& s) {
            if (s.weights.rows() != n_cohorts || s.weights.cols() != t_count) {
              throw Error(ErrorCode::DimensionMismatch, "linear functional weights must be C x T");
            }
            if (!s.weights.allFinite()) {
              throw Error(ErrorCode::InvalidArgument, "linear functional weights must be finite");
            }
          },
          [&](const CellsSpec& s) {
            if (s.cells.empty()) throw Error(ErrorCode::InvalidArgument, "no target cells");
            for (auto [c, t] : s.cells) {
              if (c < 0 || c >= n_cohorts || t < 0 || t >= t_count) {
                throw Error(ErrorCode::InvalidArgument, "target cell out of range");
              }
            }
          },
      },
      target);
}

Vector evaluate_target(const TargetSpec& target, const CohortMeans& means,
                       const CohortIndex& index) {
  return std::visit(
      Overloaded{
          [&](const DynamicEffectsSpec& s) -> Vector {
            const std::vector<int> periods =
                s.cohort_periods.empty() ? default_cohort_periods(index) : s.cohort_periods;
            return dynamic_effects(means, s.treated_means, s.pre_periods, s.length, periods,
                                   s.normalize_relative_time);
          },
          [&](const AttributionSharesSpec& s) -> Vector {
            const AttributionShares shares = attribution_shares(means, index, s.t1, s.t2);
            Vector out(2);
            out << shares.column, shares.row;
            return out;
          },
          [&](const LinearFunctionalSpec& s) -> Vector {
            const TargetFunction h = [&s](const Matrix& mu, const Vector&) {
              double sum = 0.0;
              for (Eigen::Index c = 0; c < mu.rows(); ++c) {
                for (Eigen::Index t = 0; t < mu.cols(); ++t) {
                  if (s.weights(c, t) != 0.0) sum += s.weights(c, t) * mu(c, t);
                }
              }
              return Vector::Constant(1, sum);
            };
            return plug_in(h, means, means.cohort_probs);
          },
          [&](const CellsSpec& s) -> Vector {
            Vector out(s.cells.size());
            for (std::size_t k = 0; k < s.cells.size(); ++k) {
              out(k) = checked_mu(means, s.cells[k].first, s.cells[k].second);
            }
            return out;
          },
      },
      target);
}

std::vector<std::string> target_labels(const TargetSpec& target, const CohortIndex& index,
                                       const Panel& panel) {
  (void)index;
  return std::visit(
      Overloaded{
          [&](const DynamicEffectsSpec& s) {
            std::vector<std::string> out;
            for (int j = 1; j <= s.length; ++j) {
              out.push_back("dyn[" + std::to_string(j - s.pre_periods - 1) + "]");
            }
            return out;
          },
          [&](const AttributionSharesSpec& s) {
            const auto& ids = panel.outcome_ids();
            const std::string pair = "[" + ids[s.t1] + "," + ids[s.t2] + "]";
            return std::vector<std::string>{"theta_col" + pair, "theta_row" + pair};
          },
          [&](const LinearFunctionalSpec&) { return std::vector<std::string>{"linear"}; },
          [&](const CellsSpec& s) {
            std::vector<std::string> out;
            for (auto [c, t] : s.cells) {
              out.push_back("mu[" + std::to_string(c) + "," + panel.outcome_ids()[t] + "]");
            }
            return out;
          },
      },
      target);
}

}  // namespace apm
