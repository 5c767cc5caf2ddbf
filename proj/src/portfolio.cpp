#include "qfolio/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qfolio/rng.hpp"

namespace qfolio::portfolio {

namespace {

using json = nlohmann::ordered_json;

// Effective contribution of bond i to a class-metric sum: w * delta * c.
double holding(const Bond& bond, int dim, int metric) {
  return bond.weight[dim][metric] * bond.lot_size * bond.lot_count;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (n_bonds < 2) {
    throw std::invalid_argument("generator: n_bonds must be >= 2");
  }
  if (n_bonds > 64) {
    throw std::invalid_argument("generator: n_bonds must be <= 64");
  }
  if (classes_per_dim.empty()) {
    throw std::invalid_argument("generator: at least one dimension required");
  }
  for (int k : classes_per_dim) {
    if (k < 1) {
      throw std::invalid_argument("generator: a dimension has zero classes");
    }
    if (k > n_bonds) {
      throw std::invalid_argument(
          "generator: more classes than bonds in a dimension");
    }
  }
  if (n_metrics < 1) {
    throw std::invalid_argument("generator: n_metrics must be >= 1");
  }
  if (guardrail_fraction < 0.0 || guardrail_fraction > 1.0) {
    throw std::invalid_argument("generator: guardrail_fraction not in [0,1]");
  }
  if (lot_size_min <= 0.0 || lot_size_max < lot_size_min ||
      price_min <= 0.0 || price_max < price_min || lot_count_min < 1 ||
      lot_count_max < lot_count_min || weight_max < weight_min) {
    throw std::invalid_argument("generator: malformed range parameters");
  }
  if (target_noise < 0.0 || guardrail_margin <= 0.0 || budget_headroom < 0.0) {
    throw std::invalid_argument("generator: malformed noise parameters");
  }
}

int PortfolioInstance::guardrail_count() const {
  int count = 0;
  for (const auto& dim : targets) {
    for (const auto& cls : dim) {
      for (const auto& tm : cls) {
        if (tm.guardrail) ++count;
      }
    }
  }
  return count;
}

void PortfolioInstance::validate() const {
  const int n_dims = n_dimensions();
  if (n_dims == 0) throw std::invalid_argument("instance: no dimensions");
  if (n_metrics < 1) throw std::invalid_argument("instance: no metrics");
  if (n_bonds() < 2) throw std::invalid_argument("instance: fewer than 2 bonds");
  if (budget <= 0.0) throw std::invalid_argument("instance: budget must be > 0");
  std::vector<std::vector<int>> class_population(n_dims);
  for (int d = 0; d < n_dims; ++d) {
    if (classes_per_dim[d] < 1) {
      throw std::invalid_argument("instance: dimension with zero classes");
    }
    class_population[d].assign(classes_per_dim[d], 0);
  }
  for (const auto& bond : bonds) {
    if (bond.lot_size <= 0.0 || bond.price <= 0.0 || bond.lot_count < 1) {
      throw std::invalid_argument("instance: bond with non-positive terms");
    }
    if (static_cast<int>(bond.class_of.size()) != n_dims ||
        static_cast<int>(bond.weight.size()) != n_dims) {
      throw std::invalid_argument(
          "instance: bond must have exactly one class and weight row per dimension");
    }
    for (int d = 0; d < n_dims; ++d) {
      const int cls = bond.class_of[d];
      if (cls < 0 || cls >= classes_per_dim[d]) {
        throw std::invalid_argument("instance: bond class out of range");
      }
      ++class_population[d][cls];
      if (static_cast<int>(bond.weight[d].size()) != n_metrics) {
        throw std::invalid_argument("instance: bond weight row size mismatch");
      }
    }
  }
  if (static_cast<int>(targets.size()) != n_dims) {
    throw std::invalid_argument("instance: target table dimension mismatch");
  }
  for (int d = 0; d < n_dims; ++d) {
    if (static_cast<int>(targets[d].size()) != classes_per_dim[d]) {
      throw std::invalid_argument("instance: target table class mismatch");
    }
    for (int cls = 0; cls < classes_per_dim[d]; ++cls) {
      if (class_population[d][cls] == 0) {
        throw std::invalid_argument("instance: empty class");
      }
      if (static_cast<int>(targets[d][cls].size()) != n_metrics) {
        throw std::invalid_argument("instance: target table metric mismatch");
      }
      for (const auto& tm : targets[d][cls]) {
        if (tm.guardrail && *tm.guardrail < 0.0) {
          throw std::invalid_argument("instance: negative guardrail width");
        }
      }
    }
  }
}

PortfolioInstance build_instance(const GeneratorConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n = config.n_bonds;
  const int n_dims = static_cast<int>(config.classes_per_dim.size());

  PortfolioInstance inst;
  inst.generator = config;
  inst.classes_per_dim = config.classes_per_dim;
  inst.n_metrics = config.n_metrics;
  inst.bonds.resize(n);

  for (int i = 0; i < n; ++i) {
    Bond& bond = inst.bonds[i];
    bond.id = i;
    bond.lot_size = rng.uniform(config.lot_size_min, config.lot_size_max);
    bond.lot_count =
        config.lot_count_min +
        static_cast<int>(rng.uniform_int(
            static_cast<std::uint64_t>(config.lot_count_max - config.lot_count_min + 1)));
    bond.price = rng.uniform(config.price_min, config.price_max);
    bond.class_of.resize(n_dims);
    bond.weight.resize(n_dims);
    for (int d = 0; d < n_dims; ++d) {
      bond.weight[d].resize(config.n_metrics);
      for (int j = 0; j < config.n_metrics; ++j) {
        bond.weight[d][j] = rng.uniform(config.weight_min, config.weight_max);
      }
    }
  }

  // Class memberships: a shuffled prefix pins one bond per class so no class
  // is empty, the rest draw uniformly.
  for (int d = 0; d < n_dims; ++d) {
    const int k = config.classes_per_dim[d];
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int r = 0; r < n; ++r) {
      inst.bonds[order[r]].class_of[d] =
          r < k ? r : static_cast<int>(rng.uniform_int(k));
    }
  }

  // Hidden feasible reference portfolio with a balanced fill.
  Bitstring reference = 0;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Bitstring x = 0;
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5)) x |= Bitstring{1} << i;
    }
    const int pop = popcount(x);
    if (4 * pop >= n && 4 * pop <= 3 * n) {
      reference = x;
      break;
    }
  }
  if (reference == 0) reference = 1;  // degenerate fallback, still feasible

  // Targets anchored on the reference portfolio, then perturbed at the class
  // scale; guardrails are kept wide enough that the reference stays feasible.
  inst.targets.resize(n_dims);
  for (int d = 0; d < n_dims; ++d) {
    inst.targets[d].resize(config.classes_per_dim[d]);
    for (int cls = 0; cls < config.classes_per_dim[d]; ++cls) {
      inst.targets[d][cls].resize(config.n_metrics);
      for (int j = 0; j < config.n_metrics; ++j) {
        double attained = 0.0;
        double scale = 0.0;
        int members = 0;
        for (int i = 0; i < n; ++i) {
          if (inst.bonds[i].class_of[d] != cls) continue;
          const double h = holding(inst.bonds[i], d, j);
          scale += std::abs(h);
          ++members;
          if (bit(reference, i)) attained += h;
        }
        scale /= std::max(members, 1);
        auto& tm = inst.targets[d][cls][j];
        tm.target = attained + config.target_noise * scale * rng.uniform(-1.0, 1.0);
        if (rng.bernoulli(config.guardrail_fraction)) {
          tm.guardrail =
              std::abs(attained - tm.target) + config.guardrail_margin * scale;
        }
      }
    }
  }

  double reference_spend = 0.0;
  for (int i = 0; i < n; ++i) {
    if (bit(reference, i)) {
      reference_spend +=
          inst.bonds[i].price * inst.bonds[i].lot_size * inst.bonds[i].lot_count;
    }
  }
  inst.budget = reference_spend * (1.0 + config.budget_headroom);

  inst.validate();
  return inst;
}

double objective_cost(const PortfolioInstance& instance, Bitstring x) {
  check_bitstring_length(x, instance.n_bonds(), "objective_cost");
  double total = 0.0;
  const int n_dims = instance.n_dimensions();
  for (int d = 0; d < n_dims; ++d) {
    for (int cls = 0; cls < instance.classes_per_dim[d]; ++cls) {
      for (int j = 0; j < instance.n_metrics; ++j) {
        double acc = instance.targets[d][cls][j].target;
        for (int i = 0; i < instance.n_bonds(); ++i) {
          if (instance.bonds[i].class_of[d] == cls && bit(x, i)) {
            acc -= holding(instance.bonds[i], d, j);
          }
        }
        total += acc * acc;
      }
    }
  }
  return total;
}

PenalizedProblem to_matrix_form(const PortfolioInstance& instance) {
  instance.validate();
  const int n = instance.n_bonds();
  const int n_dims = instance.n_dimensions();

  PenalizedProblem p;
  p.n = n;
  p.q.assign(static_cast<std::size_t>(n) * n, 0.0);

  // Objective: sum over (dim, class, metric) of (tau - sum_i a_i x_i)^2 with
  // a_i = w * delta * c. Expansion: tau^2 into the constant, -2 tau a_i onto
  // the diagonal, a_i a_k onto the (i, k) entries.
  std::vector<double> coeff(n);
  for (int d = 0; d < n_dims; ++d) {
    for (int cls = 0; cls < instance.classes_per_dim[d]; ++cls) {
      for (int j = 0; j < instance.n_metrics; ++j) {
        const double tau = instance.targets[d][cls][j].target;
        p.constant += tau * tau;
        std::vector<int> members;
        for (int i = 0; i < n; ++i) {
          if (instance.bonds[i].class_of[d] == cls) {
            members.push_back(i);
            coeff[i] = holding(instance.bonds[i], d, j);
          }
        }
        for (int i : members) {
          p.q[static_cast<std::size_t>(i) * n + i] +=
              coeff[i] * coeff[i] - 2.0 * tau * coeff[i];
          for (int k : members) {
            if (k != i) {
              p.q[static_cast<std::size_t>(i) * n + k] += coeff[i] * coeff[k];
            }
          }
        }
      }
    }
  }

  // Budget row.
  for (int i = 0; i < n; ++i) {
    const Bond& bond = instance.bonds[i];
    p.a.push_back(bond.price * bond.lot_size * bond.lot_count);
  }
  p.b.push_back(instance.budget);

  // Guardrails: tau - eps <= sum a_i x_i <= tau + eps, as two <= rows.
  for (int d = 0; d < n_dims; ++d) {
    for (int cls = 0; cls < instance.classes_per_dim[d]; ++cls) {
      for (int j = 0; j < instance.n_metrics; ++j) {
        const auto& tm = instance.targets[d][cls][j];
        if (!tm.guardrail) continue;
        std::vector<double> row(n, 0.0);
        for (int i = 0; i < n; ++i) {
          if (instance.bonds[i].class_of[d] == cls) {
            row[i] = holding(instance.bonds[i], d, j);
          }
        }
        p.a.insert(p.a.end(), row.begin(), row.end());
        p.b.push_back(tm.target + *tm.guardrail);
        for (double& r : row) r = -r;
        p.a.insert(p.a.end(), row.begin(), row.end());
        p.b.push_back(*tm.guardrail - tm.target);
      }
    }
  }
  p.m = static_cast<int>(p.b.size());
  return p;
}

double PenalizedProblem::quadratic_cost(Bitstring x) const {
  check_bitstring_length(x, n, "quadratic_cost");
  double acc = constant;
  for (Bitstring rest = x; rest != 0; rest &= rest - 1) {
    const int i = std::countr_zero(rest);
    const double* row = q.data() + static_cast<std::size_t>(i) * n;
    for (Bitstring inner = x; inner != 0; inner &= inner - 1) {
      acc += row[std::countr_zero(inner)];
    }
  }
  return acc;
}

double PenalizedProblem::constraint_value(int row, Bitstring x) const {
  const double* r = a.data() + static_cast<std::size_t>(row) * n;
  double acc = -b[row];
  for (Bitstring rest = x; rest != 0; rest &= rest - 1) {
    acc += r[std::countr_zero(rest)];
  }
  return acc;
}

bool PenalizedProblem::feasible(Bitstring x) const {
  check_bitstring_length(x, n, "feasible");
  for (int j = 0; j < m; ++j) {
    if (constraint_value(j, x) > 0.0) return false;
  }
  return true;
}

PenalizedProblem choose_penalty_scales(PenalizedProblem problem, double kappa) {
  if (kappa <= 0.0) {
    throw std::invalid_argument("choose_penalty_scales: kappa must be > 0");
  }
  if (problem.q.empty() || problem.b.empty()) {
    throw std::invalid_argument("choose_penalty_scales: Q, A, b must be set");
  }
  double objective_bound = 0.0;
  for (double v : problem.q) objective_bound += std::abs(v);
  if (objective_bound <= 0.0) objective_bound = 1.0;

  problem.s.assign(problem.m, 0.0);
  for (int j = 0; j < problem.m; ++j) {
    double smallest = 0.0;
    for (int k = 0; k < problem.n; ++k) {
      const double v = std::abs(problem.a[static_cast<std::size_t>(j) * problem.n + k]);
      if (v > 0.0 && (smallest == 0.0 || v < smallest)) smallest = v;
    }
    if (smallest == 0.0) {
      if (problem.b[j] < 0.0) {
        throw std::runtime_error(
            "choose_penalty_scales: constraint row " + std::to_string(j) +
            " is all zeros with negative bound; problem is unsatisfiable");
      }
      smallest = 1.0;  // vacuous row, any positive scale works
    }
    problem.s[j] = kappa * objective_bound / smallest;
  }
  return problem;
}

double penalized_cost(const PenalizedProblem& problem, Bitstring x) {
  if (!problem.scales_set()) {
    throw std::logic_error("penalized_cost: penalty scales not set");
  }
  check_bitstring_length(x, problem.n, "penalized_cost");
  double acc = problem.quadratic_cost(x);
  for (int j = 0; j < problem.m; ++j) {
    const double violation = problem.constraint_value(j, x);
    if (violation > 0.0) acc += problem.s[j] * violation;
  }
  return acc;
}

namespace {

json config_to_json(const GeneratorConfig& config) {
  return json{{"n_bonds", config.n_bonds},
              {"classes_per_dim", config.classes_per_dim},
              {"n_metrics", config.n_metrics},
              {"seed", config.seed},
              {"guardrail_fraction", config.guardrail_fraction},
              {"target_noise", config.target_noise},
              {"guardrail_margin", config.guardrail_margin},
              {"budget_headroom", config.budget_headroom},
              {"lot_size_min", config.lot_size_min},
              {"lot_size_max", config.lot_size_max},
              {"lot_count_min", config.lot_count_min},
              {"lot_count_max", config.lot_count_max},
              {"price_min", config.price_min},
              {"price_max", config.price_max},
              {"weight_min", config.weight_min},
              {"weight_max", config.weight_max}};
}

GeneratorConfig config_from_json(const json& j) {
  GeneratorConfig config;
  config.n_bonds = j.at("n_bonds").get<int>();
  config.classes_per_dim = j.at("classes_per_dim").get<std::vector<int>>();
  config.n_metrics = j.at("n_metrics").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.guardrail_fraction = j.at("guardrail_fraction").get<double>();
  config.target_noise = j.at("target_noise").get<double>();
  config.guardrail_margin = j.at("guardrail_margin").get<double>();
  config.budget_headroom = j.at("budget_headroom").get<double>();
  config.lot_size_min = j.at("lot_size_min").get<double>();
  config.lot_size_max = j.at("lot_size_max").get<double>();
  config.lot_count_min = j.at("lot_count_min").get<int>();
  config.lot_count_max = j.at("lot_count_max").get<int>();
  config.price_min = j.at("price_min").get<double>();
  config.price_max = j.at("price_max").get<double>();
  config.weight_min = j.at("weight_min").get<double>();
  config.weight_max = j.at("weight_max").get<double>();
  return config;
}

}  // namespace

void write_instance(std::ostream& os, const PortfolioInstance& instance) {
  json j;
  j["format"] = "qfolio-instance-v1";
  j["generator"] = instance.generator ? config_to_json(*instance.generator)
                                      : json(nullptr);
  j["classes_per_dim"] = instance.classes_per_dim;
  j["n_metrics"] = instance.n_metrics;
  j["budget"] = instance.budget;
  json bonds = json::array();
  for (const auto& bond : instance.bonds) {
    bonds.push_back(json{{"id", bond.id},
                         {"lot_size", bond.lot_size},
                         {"lot_count", bond.lot_count},
                         {"price", bond.price},
                         {"class_of", bond.class_of},
                         {"weight", bond.weight}});
  }
  j["bonds"] = std::move(bonds);
  json targets = json::array();
  for (int d = 0; d < instance.n_dimensions(); ++d) {
    for (int cls = 0; cls < instance.classes_per_dim[d]; ++cls) {
      for (int mj = 0; mj < instance.n_metrics; ++mj) {
        const auto& tm = instance.targets[d][cls][mj];
        json entry{{"dim", d}, {"cls", cls}, {"metric", mj},
                   {"target", tm.target}};
        entry["guardrail"] = tm.guardrail ? json(*tm.guardrail) : json(nullptr);
        targets.push_back(std::move(entry));
      }
    }
  }
  j["targets"] = std::move(targets);
  os << j.dump(2) << "\n";
}

PortfolioInstance read_instance(std::istream& is) {
  const json j = json::parse(is);
  if (j.at("format").get<std::string>() != "qfolio-instance-v1") {
    throw std::runtime_error("instance file: unknown format tag");
  }
  PortfolioInstance inst;
  if (!j.at("generator").is_null()) {
    inst.generator = config_from_json(j.at("generator"));
  }
  inst.classes_per_dim = j.at("classes_per_dim").get<std::vector<int>>();
  inst.n_metrics = j.at("n_metrics").get<int>();
  inst.budget = j.at("budget").get<double>();
  for (const auto& bj : j.at("bonds")) {
    Bond bond;
    bond.id = bj.at("id").get<int>();
    bond.lot_size = bj.at("lot_size").get<double>();
    bond.lot_count = bj.at("lot_count").get<int>();
    bond.price = bj.at("price").get<double>();
    bond.class_of = bj.at("class_of").get<std::vector<int>>();
    bond.weight = bj.at("weight").get<std::vector<std::vector<double>>>();
    inst.bonds.push_back(std::move(bond));
  }
  inst.targets.resize(inst.n_dimensions());
  for (int d = 0; d < inst.n_dimensions(); ++d) {
    inst.targets[d].resize(inst.classes_per_dim[d]);
    for (auto& cls : inst.targets[d]) cls.resize(inst.n_metrics);
  }
  for (const auto& tj : j.at("targets")) {
    auto& tm = inst.targets.at(tj.at("dim").get<int>())
                   .at(tj.at("cls").get<int>())
                   .at(tj.at("metric").get<int>());
    tm.target = tj.at("target").get<double>();
    if (!tj.at("guardrail").is_null()) {
      tm.guardrail = tj.at("guardrail").get<double>();
    }
  }
  inst.validate();
  return inst;
}

void write_problem(std::ostream& os, const PenalizedProblem& problem) {
  json j;
  j["format"] = "qfolio-problem-v1";
  j["n"] = problem.n;
  j["m"] = problem.m;
  j["constant"] = problem.constant;
  j["q"] = problem.q;
  j["a"] = problem.a;
  j["b"] = problem.b;
  j["s"] = problem.s;
  os << j.dump(2) << "\n";
}

PenalizedProblem read_problem(std::istream& is) {
  const json j = json::parse(is);
  if (j.at("format").get<std::string>() != "qfolio-problem-v1") {
    throw std::runtime_error("problem file: unknown format tag");
  }
  PenalizedProblem p;
  p.n = j.at("n").get<int>();
  p.m = j.at("m").get<int>();
  p.constant = j.at("constant").get<double>();
  p.q = j.at("q").get<std::vector<double>>();
  p.a = j.at("a").get<std::vector<double>>();
  p.b = j.at("b").get<std::vector<double>>();
  p.s = j.at("s").get<std::vector<double>>();
  if (p.q.size() != static_cast<std::size_t>(p.n) * p.n ||
      p.a.size() != static_cast<std::size_t>(p.m) * p.n ||
      p.b.size() != static_cast<std::size_t>(p.m) ||
      (!p.s.empty() && p.s.size() != static_cast<std::size_t>(p.m))) {
    throw std::runtime_error("problem file: inconsistent matrix sizes");
  }
  return p;
}

}  // namespace qfolio::portfolio
