#pragma once

#include "apm/linalg.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace apm {

using ObservedMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Unit x outcome panel with explicit missingness.
///
/// Column order of `outcome_ids()` is the canonical outcome index used by
/// every downstream matrix. Missing cells hold 0.0 in `values()` and false
/// in `observed()`; callers must consult the mask, never the value.
class Panel {
 public:
  Panel() = default;
  Panel(std::vector<std::string> unit_ids, std::vector<std::string> outcome_ids,
        Matrix values, ObservedMask observed);

  int n_units() const { return static_cast<int>(unit_ids_.size()); }
  int n_outcomes() const { return static_cast<int>(outcome_ids_.size()); }

  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const std::vector<std::string>& outcome_ids() const { return outcome_ids_; }
  const Matrix& values() const { return values_; }
  const ObservedMask& observed() const { return observed_; }

  bool is_observed(int unit, int outcome) const { return observed_(unit, outcome); }
  std::optional<double> cell(int unit, int outcome) const;
  IndexSet observed_set(int unit) const;
  int n_observed_cells() const;

 private:
  std::vector<std::string> unit_ids_;
  std::vector<std::string> outcome_ids_;
  Matrix values_;
  ObservedMask observed_;
};

/// Reads `unit_id,outcome_id,value` rows. Units keep first-appearance order;
/// outcomes are ordered lexicographically by id.
Panel read_long_csv(std::istream& in);
Panel load_long_csv(const std::string& path);

/// Writes observed cells in unit-major, outcome-minor order with
/// round-trip precision.
void write_long_csv(const Panel& panel, std::ostream& out);
void save_long_csv(const Panel& panel, const std::string& path);

struct Cohort {
  IndexSet observed;         // T_c, sorted
  std::vector<int> members;  // unit rows, ascending
  int size() const { return static_cast<int>(members.size()); }
};

/// Partition of retained units into cohorts sharing an observed-outcome set.
struct CohortIndex {
  int n_units = 0;
  int n_outcomes = 0;
  std::vector<Cohort> cohorts;     // lexicographic by observed set
  std::vector<int> unit_cohort;    // -1 for dropped units
  std::vector<int> dropped_units;  // rows removed by the size filter

  int n_cohorts() const { return static_cast<int>(cohorts.size()); }
  /// E_c as a dense T x T diagonal matrix.
  Matrix mask(int cohort) const;
  /// Index of the cohort whose observed set equals `observed`, or -1.
  int find(const IndexSet& observed) const;
};

constexpr int kDefaultMinCohortSize = 2;

CohortIndex cohortize(const Panel& panel, int min_cohort_size = kDefaultMinCohortSize);

struct MaskResult {
  Panel panel;
  double ground_truth_mean = 0.0;
  // Set when the cohort observed only the masked outcome; its units carry
  // no cells afterwards and are removed from `panel`.
  bool degenerate = false;
  std::vector<std::string> masked_units;
};

/// Blanks `outcome` for every member of `cohort` and returns the pre-mask
/// sample mean of the removed cells.
MaskResult mask_cell(const Panel& panel, const CohortIndex& index, int cohort, int outcome);

}  // namespace apm
