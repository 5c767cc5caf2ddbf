#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qfolio/types.hpp"

namespace qfolio::portfolio {

// One candidate bond. If selected (x_i = 1) it enters the portfolio in the
// fixed quantity lot_count * lot_size.
struct Bond {
  int id = 0;
  double lot_size = 1.0;  // > 0
  int lot_count = 1;      // >= 1
  double price = 1.0;     // normalized, > 0
  std::vector<int> class_of;                // class index, one per dimension
  std::vector<std::vector<double>> weight;  // [dimension][metric]
};

// Parameters of the synthetic-universe generator. Targets are anchored on a
// hidden reference portfolio and perturbed, so at least one feasible
// selection always exists.
struct GeneratorConfig {
  int n_bonds = 16;
  std::vector<int> classes_per_dim = {3, 2};
  int n_metrics = 2;
  std::uint64_t seed = 1;
  double guardrail_fraction = 0.5;  // share of (class, metric) pairs guarded
  double target_noise = 0.05;       // target offset, relative to class scale
  double guardrail_margin = 0.25;   // slack beyond the reference deviation
  double budget_headroom = 0.15;    // budget above the reference spend
  double lot_size_min = 1000.0, lot_size_max = 5000.0;
  int lot_count_min = 1, lot_count_max = 5;
  double price_min = 0.8, price_max = 1.2;
  double weight_min = 0.5, weight_max = 1.5;

  void validate() const;
};

// Target and optional guardrail half-width for one (class, metric) pair.
struct ClassMetricTarget {
  double target = 0.0;
  std::optional<double> guardrail;  // half-width epsilon >= 0
};

struct PortfolioInstance {
  std::vector<Bond> bonds;
  std::vector<int> classes_per_dim;
  int n_metrics = 0;
  // targets[dim][cls][metric]
  std::vector<std::vector<std::vector<ClassMetricTarget>>> targets;
  double budget = 0.0;
  std::optional<GeneratorConfig> generator;  // provenance when generated

  int n_bonds() const { return static_cast<int>(bonds.size()); }
  int n_dimensions() const { return static_cast<int>(classes_per_dim.size()); }
  int guardrail_count() const;
  void validate() const;
};

// Matrix form of the penalized problem:
//   cost(x) = constant + x^T Q x + sum_j max(0, s_j * (A_j . x - b_j))
// Q is symmetric with the linear terms folded onto the diagonal (valid since
// x_i^2 = x_i); `constant` carries the expansion offset sum of tau^2 so costs
// stay on the same scale as objective_cost.
struct PenalizedProblem {
  int n = 0;
  int m = 0;
  double constant = 0.0;
  std::vector<double> q;  // n*n, row-major, symmetric
  std::vector<double> a;  // m*n, row-major
  std::vector<double> b;  // m
  std::vector<double> s;  // m penalty scales; empty until chosen

  bool scales_set() const { return !s.empty(); }
  double quadratic_cost(Bitstring x) const;  // constant + x^T Q x
  double constraint_value(int row, Bitstring x) const;  // A_row . x - b_row
  bool feasible(Bitstring x) const;
};

PortfolioInstance build_instance(const GeneratorConfig& config);

double objective_cost(const PortfolioInstance& instance, Bitstring x);

// Builds Q, constant, A, b. Constraint rows: budget first, then for each
// guarded (dim, cls, metric) in index order the upper bound then the lower
// bound, both rewritten as <=.
PenalizedProblem to_matrix_form(const PortfolioInstance& instance);

// s_j = kappa * B / v_j with B = sum |Q_kl| and v_j the smallest nonzero
// |A_jk|. Throws if a constraint row is all zeros with b_j < 0.
PenalizedProblem choose_penalty_scales(PenalizedProblem problem,
                                       double kappa = 10.0);

double penalized_cost(const PenalizedProblem& problem, Bitstring x);

// Instance file format: JSON, schema in the README; round-trips bit-exactly.
void write_instance(std::ostream& os, const PortfolioInstance& instance);
PortfolioInstance read_instance(std::istream& is);
void write_problem(std::ostream& os, const PenalizedProblem& problem);
PenalizedProblem read_problem(std::istream& is);

}  // namespace qfolio::portfolio
