#include "apm/panel.hpp"

#include "apm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <unordered_map>

namespace apm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_real(std::string_view text, std::size_t line_no) {
  // from_chars rejects a leading '+', which is valid decimal notation.
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": non-finite value");
  }
  return value;
}

struct RawCell {
  int unit;
  std::string outcome;
  double value;
};

}  // namespace

Panel::Panel(std::vector<std::string> unit_ids, std::vector<std::string> outcome_ids,
             Matrix values, ObservedMask observed)
    : unit_ids_(std::move(unit_ids)),
      outcome_ids_(std::move(outcome_ids)),
      values_(std::move(values)),
      observed_(std::move(observed)) {
  const auto n = static_cast<Eigen::Index>(unit_ids_.size());
  const auto t = static_cast<Eigen::Index>(outcome_ids_.size());
  if (values_.rows() != n || values_.cols() != t || observed_.rows() != n ||
      observed_.cols() != t) {
    throw Error(ErrorCode::DimensionMismatch, "panel values/mask do not match id lists");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!observed_.row(i).any()) {
      throw Error(ErrorCode::InvalidArgument, "unit '" + unit_ids_[i] + "' has no observed cell");
    }
    for (Eigen::Index k = 0; k < t; ++k) {
      if (observed_(i, k)) {
        if (!std::isfinite(values_(i, k))) {
          throw Error(ErrorCode::InvalidArgument, "non-finite observed value");
        }
      } else {
        values_(i, k) = 0.0;
      }
    }
  }
}

std::optional<double> Panel::cell(int unit, int outcome) const {
  if (!observed_(unit, outcome)) return std::nullopt;
  return values_(unit, outcome);
}

IndexSet Panel::observed_set(int unit) const {
  IndexSet out;
  for (int k = 0; k < n_outcomes(); ++k) {
    if (observed_(unit, k)) out.push_back(k);
  }
  return out;
}

int Panel::n_observed_cells() const { return static_cast<int>(observed_.count()); }

Panel read_long_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto fields = split_commas(view);
    if (fields.size() != 3 || fields[0] != "unit_id" || fields[1] != "outcome_id" ||
        fields[2] != "value") {
      throw Error(ErrorCode::ParseError, "expected header 'unit_id,outcome_id,value'");
    }
    have_header = true;
  }
  if (!have_header) throw Error(ErrorCode::EmptyInput, "no header");

  std::vector<std::string> unit_ids;
  std::unordered_map<std::string, int> unit_row;
  std::vector<RawCell> cells;
  std::map<std::string, int> outcome_col;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": malformed row");
    }
    const double value = parse_real(fields[2], line_no);
    std::string unit(fields[0]);
    auto [it, inserted] = unit_row.try_emplace(unit, static_cast<int>(unit_ids.size()));
    if (inserted) unit_ids.push_back(unit);
    outcome_col.emplace(std::string(fields[1]), 0);
    cells.push_back({it->second, std::string(fields[1]), value});
  }
  if (cells.empty()) throw Error(ErrorCode::EmptyInput, "no data rows");

  std::vector<std::string> outcome_ids;
  outcome_ids.reserve(outcome_col.size());
  for (auto& [id, col] : outcome_col) {
    col = static_cast<int>(outcome_ids.size());
    outcome_ids.push_back(id);
  }

  const auto n = static_cast<Eigen::Index>(unit_ids.size());
  const auto t = static_cast<Eigen::Index>(outcome_ids.size());
  Matrix values = Matrix::Zero(n, t);
  ObservedMask observed = ObservedMask::Constant(n, t, false);
  for (const auto& c : cells) {
    const int col = outcome_col.at(c.outcome);
    if (observed(c.unit, col)) {
      throw Error(ErrorCode::DuplicateCell,
                  "(" + unit_ids[c.unit] + ", " + c.outcome + ") appears more than once");
    }
    observed(c.unit, col) = true;
    values(c.unit, col) = c.value;
  }
  return Panel(std::move(unit_ids), std::move(outcome_ids), std::move(values), std::move(observed));
}

Panel load_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_long_csv(in);
}

void write_long_csv(const Panel& panel, std::ostream& out) {
  out << "unit_id,outcome_id,value\n";
  char buf[64];
  for (int i = 0; i < panel.n_units(); ++i) {
    for (int k = 0; k < panel.n_outcomes(); ++k) {
      if (!panel.is_observed(i, k)) continue;
      std::snprintf(buf, sizeof buf, "%.17g", panel.values()(i, k));
      out << panel.unit_ids()[i] << ',' << panel.outcome_ids()[k] << ',' << buf << '\n';
    }
  }
}

void save_long_csv(const Panel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  write_long_csv(panel, out);
}

Matrix CohortIndex::mask(int cohort) const {
  return selector(cohorts.at(cohort).observed, n_outcomes);
}

int CohortIndex::find(const IndexSet& observed) const {
  for (int c = 0; c < n_cohorts(); ++c) {
    if (cohorts[c].observed == observed) return c;
  }
  return -1;
}

CohortIndex cohortize(const Panel& panel, int min_cohort_size) {
  if (min_cohort_size < 1) {
    throw Error(ErrorCode::InvalidArgument, "min_cohort_size must be at least 1");
  }
  std::map<IndexSet, std::vector<int>> groups;
  for (int i = 0; i < panel.n_units(); ++i) groups[panel.observed_set(i)].push_back(i);

  CohortIndex index;
  index.n_units = panel.n_units();
  index.n_outcomes = panel.n_outcomes();
  index.unit_cohort.assign(panel.n_units(), -1);
  for (auto& [observed, members] : groups) {
    if (static_cast<int>(members.size()) < min_cohort_size) {
      index.dropped_units.insert(index.dropped_units.end(), members.begin(), members.end());
      continue;
    }
    const int c = index.n_cohorts();
    for (int i : members) index.unit_cohort[i] = c;
    index.cohorts.push_back({observed, std::move(members)});
  }
  std::sort(index.dropped_units.begin(), index.dropped_units.end());
  if (index.cohorts.empty()) {
    throw Error(ErrorCode::AllCohortsDropped,
                "no cohort has at least " + std::to_string(min_cohort_size) + " units");
  }
  return index;
}

MaskResult mask_cell(const Panel& panel, const CohortIndex& index, int cohort, int outcome) {
  if (cohort < 0 || cohort >= index.n_cohorts()) {
    throw Error(ErrorCode::InvalidArgument, "cohort out of range");
  }
  const Cohort& target = index.cohorts[cohort];
  if (target.members.empty()) throw Error(ErrorCode::EmptyCohort, "cohort has no members");
  if (!std::binary_search(target.observed.begin(), target.observed.end(), outcome)) {
    throw Error(ErrorCode::NotObserved, "outcome " + std::to_string(outcome) +
                                            " is not observed for cohort " + std::to_string(cohort));
  }

  MaskResult result;
  double sum = 0.0;
  for (int i : target.members) sum += panel.values()(i, outcome);
  result.ground_truth_mean = sum / static_cast<double>(target.members.size());
  result.degenerate = target.observed.size() == 1;

  std::vector<char> in_target(panel.n_units(), 0);
  for (int i : target.members) {
    in_target[i] = 1;
    result.masked_units.push_back(panel.unit_ids()[i]);
  }

  std::vector<int> keep;
  for (int i = 0; i < panel.n_units(); ++i) {
    if (!(result.degenerate && in_target[i])) keep.push_back(i);
  }
  std::vector<std::string> ids;
  Matrix values(keep.size(), panel.n_outcomes());
  ObservedMask observed(keep.size(), panel.n_outcomes());
  for (std::size_t row = 0; row < keep.size(); ++row) {
    const int i = keep[row];
    ids.push_back(panel.unit_ids()[i]);
    values.row(row) = panel.values().row(i);
    observed.row(row) = panel.observed().row(i);
    if (in_target[i]) {
      observed(row, outcome) = false;
      values(row, outcome) = 0.0;
    }
  }
  result.panel = Panel(std::move(ids), panel.outcome_ids(), std::move(values), std::move(observed));
  return result;
}

}  // namespace apm
