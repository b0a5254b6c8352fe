#pragma once

#include "apm/panel.hpp"
#include "apm/sim.hpp"

#include <Eigen/Dense>

#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace apm::testing {

using Row = std::tuple<std::string, std::string, double>;

inline Panel panel_from_rows(const std::vector<Row>& rows) {
  std::ostringstream csv;
  csv.precision(17);
  csv << "unit_id,outcome_id,value\n";
  for (const auto& [u, t, v] : rows) csv << u << ',' << t << ',' << v << '\n';
  std::istringstream in(csv.str());
  return read_long_csv(in);
}

// Homoskedastic rank-r truth with unit loading covariance.
inline DgpTruth make_truth(const Matrix& gamma, const std::vector<IndexSet>& sets,
                           const std::vector<Vector>& means, double noise_var,
                           std::vector<double> probs = {}) {
  DgpTruth truth;
  truth.gamma = gamma;
  const int r = static_cast<int>(gamma.cols());
  if (probs.empty()) probs.assign(sets.size(), 1.0 / static_cast<double>(sets.size()));
  for (std::size_t c = 0; c < sets.size(); ++c) {
    CohortDgp k;
    k.prob = probs[c];
    k.loading_mean = means[c];
    k.loading_cov = Matrix::Identity(r, r);
    k.t_set = sets[c];
    k.noise_var = noise_var;
    truth.cohorts.push_back(k);
  }
  return truth;
}

// Index with `size` units per cohort, units numbered cohort by cohort.
inline CohortIndex index_from_sets(const std::vector<IndexSet>& sets, int t, int size = 1) {
  CohortIndex idx;
  idx.n_outcomes = t;
  int unit = 0;
  for (const auto& s : sets) {
    Cohort c;
    c.observed = s;
    for (int k = 0; k < size; ++k) {
      c.members.push_back(unit++);
      idx.unit_cohort.push_back(idx.n_cohorts());
    }
    idx.cohorts.push_back(c);
  }
  idx.n_units = unit;
  return idx;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(xs.size());
  int k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

inline Matrix col(std::initializer_list<double> xs) { return vec(xs); }

// Frobenius distance between the projectors onto col(a) and col(b).
inline double projection_distance(const Matrix& a, const Matrix& b) {
  const Matrix pa = a * (a.transpose() * a).ldlt().solve(a.transpose());
  const Matrix pb = b * (b.transpose() * b).ldlt().solve(b.transpose());
  return (pa - pb).norm();
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int a = 0; a < rows; ++a) {
    for (int b = 0; b < cols; ++b) m(a, b) = n(rng);
  }
  return m;
}

inline Matrix random_symmetric(int d, std::mt19937_64& rng) {
  const Matrix m = random_matrix(d, d, rng);
  return (m + m.transpose()) / 2.0;
}

}  // namespace apm::testing
