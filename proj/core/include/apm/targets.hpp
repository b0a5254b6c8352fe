#pragma once

#include "apm/estimate.hpp"
#include "apm/linalg.hpp"
#include "apm/panel.hpp"

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace apm {

/// Event-study effect path from `pre_periods` leads through the treated
/// periods. `treated_means` is C x T with NaN where no treated mean exists.
/// `cohort_periods[c]` is cohort c's first treated outcome index; empty
/// means "one past the cohort's last observed outcome".
struct DynamicEffectsSpec {
  int pre_periods = 0;
  int length = 1;
  Matrix treated_means;
  std::vector<int> cohort_periods;
  bool normalize_relative_time = false;
};

struct AttributionSharesSpec {
  int t1 = 0;
  int t2 = 1;
};

struct LinearFunctionalSpec {
  Matrix weights;  // C x T
};

struct CellsSpec {
  std::vector<std::pair<int, int>> cells;  // (cohort, outcome)
};

using TargetSpec =
    std::variant<DynamicEffectsSpec, AttributionSharesSpec, LinearFunctionalSpec, CellsSpec>;

Vector dynamic_effects(const CohortMeans& means, const Matrix& treated_means, int pre_periods,
                       int length, std::span<const int> cohort_periods,
                       bool normalize_relative_time = false);

/// Treatment period per cohort: one past its last observed outcome.
std::vector<int> default_cohort_periods(const CohortIndex& index);

struct AttributionShares {
  double column = 0.0;  // θ_col
  double row = 0.0;     // θ_row
  double denominator = 0.0;
};

AttributionShares attribution_shares(const CohortMeans& means, const CohortIndex& index, int t1,
                                     int t2);

using TargetFunction = std::function<Vector(const Matrix& mu, const Vector& eta)>;

/// θ̂ = h(μ̂, η̂). Exceptions from h and non-finite results surface as
/// TargetEvaluationError.
Vector plug_in(const TargetFunction& h, const CohortMeans& means, const Vector& eta);

/// Evaluates a declarative target on an estimate; η̂ is the cohort shares.
Vector evaluate_target(const TargetSpec& target, const CohortMeans& means,
                       const CohortIndex& index);

/// Human-readable parameter names, one per coordinate.
std::vector<std::string> target_labels(const TargetSpec& target, const CohortIndex& index,
                                       const Panel& panel);

void validate_target(const TargetSpec& target, const CohortIndex& index);

}  // namespace apm
