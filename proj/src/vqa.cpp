#include "qfolio/vqa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qfolio/rng.hpp"
#include "qfolio/statevector.hpp"

namespace qfolio::vqa {

namespace {

double wrap_two_pi(double x) {
  const double two_pi = 2.0 * kPi;
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  return r;
}

int tail_count(double alpha, int n) {
  const int k = static_cast<int>(std::ceil(alpha * n));
  return std::clamp(k, 1, n);
}

}  // namespace

void CvarConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("cvar: alpha must be in (0, 1]");
  }
  if (n_shots < 1) throw std::invalid_argument("cvar: n_shots must be >= 1");
}

void OptimizerConfig::validate() const {
  if (max_epochs < 0) throw std::invalid_argument("optimizer: max_epochs < 0");
  if (cutoff < 0.0) throw std::invalid_argument("optimizer: cutoff < 0");
}

double cvar(std::vector<double> costs, double alpha) {
  if (costs.empty()) throw std::invalid_argument("cvar: empty cost list");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("cvar: alpha must be in (0, 1]");
  }
  const int k = tail_count(alpha, static_cast<int>(costs.size()));
  std::nth_element(costs.begin(), costs.begin() + (k - 1), costs.end());
  const double sum = std::accumulate(costs.begin(), costs.begin() + k, 0.0);
  return sum / k;
}

CircuitEvaluator::CircuitEvaluator(const ansatz::AnsatzCircuit& circuit,
                                   CostFn cost, CvarConfig cvar_config,
                                   double cutoff, std::uint64_t sampling_seed,
                                   bool exact_expectation)
    : circuit_(circuit),
      cost_cache_(std::move(cost)),
      cvar_config_(cvar_config),
      cutoff_(cutoff),
      sampling_seed_(sampling_seed),
      exact_(exact_expectation) {
  cvar_config_.validate();
  if (exact_) {
    if (circuit.n_qubits > 20) {
      throw std::invalid_argument(
          "exact-expectation mode is limited to 20 qubits");
    }
    const std::size_t dim = std::size_t{1} << circuit.n_qubits;
    cost_table_.resize(dim);
    for (std::size_t x = 0; x < dim; ++x) {
      cost_table_[x] = cost_cache_(static_cast<Bitstring>(x));
    }
    cost_order_.resize(dim);
    std::iota(cost_order_.begin(), cost_order_.end(), 0u);
    std::stable_sort(cost_order_.begin(), cost_order_.end(),
                     [&](std::uint32_t lhs, std::uint32_t rhs) {
                       return cost_table_[lhs] < cost_table_[rhs];
                     });
  }
}

EvalResult CircuitEvaluator::evaluate(std::span<const double> theta) {
  const auto bound = ansatz::bind(circuit_, theta, cutoff_);
  const sim::StateVector state = sim::run_circuit(bound, circuit_.n_qubits);
  const std::uint64_t eval_index = circuit_evals_++;

  EvalResult result;
  if (exact_) {
    const std::vector<double> probs = state.probabilities();
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    double remaining = cvar_config_.alpha * total;
    double acc = 0.0;
    bool best_found = false;
    for (const std::uint32_t x : cost_order_) {
      const double p = probs[x];
      if (p <= 1e-12) continue;
      if (!best_found) {
        result.best_cost = cost_table_[x];
        result.best_x = x;
        best_found = true;
      }
      if (remaining > 0.0) {
        const double take = std::min(p, remaining);
        acc += take * cost_table_[x];
        remaining -= take;
      } else {
        break;
      }
    }
    result.cvar = acc / (cvar_config_.alpha * total);
    // Record the most probable outcomes, best first by probability.
    std::vector<std::uint32_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0u);
    const std::size_t keep = std::min<std::size_t>(64, order.size());
    std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                      [&](std::uint32_t lhs, std::uint32_t rhs) {
                        if (probs[lhs] != probs[rhs]) return probs[lhs] > probs[rhs];
                        return lhs < rhs;
                      });
    for (std::size_t i = 0; i < keep; ++i) {
      const std::uint32_t x = order[i];
      if (probs[x] <= 1e-12) break;
      result.samples.push_back({x, 1, cost_table_[x]});
    }
    return result;
  }

  const auto counts = sim::sample_counts(state, cvar_config_.n_shots,
                                         mix_seed(sampling_seed_, eval_index));
  result.samples.reserve(counts.size());
  std::vector<std::pair<double, int>> cost_count;
  cost_count.reserve(counts.size());
  bool first = true;
  for (const auto& [x, count] : counts) {
    const double cost = cost_cache_(x);
    result.samples.push_back({x, count, cost});
    cost_count.push_back({cost, count});
    if (first || cost < result.best_cost) {
      result.best_cost = cost;
      result.best_x = x;
      first = false;
    }
  }
  std::sort(cost_count.begin(), cost_count.end());
  const int k = tail_count(cvar_config_.alpha, cvar_config_.n_shots);
  int remaining = k;
  double acc = 0.0;
  for (const auto& [cost, count] : cost_count) {
    const int take = std::min(count, remaining);
    acc += cost * take;
    remaining -= take;
    if (remaining == 0) break;
  }
  result.cvar = acc / k;
  return result;
}

SweepResult nft_sweep(std::vector<double>& theta, const Objective& objective,
                      std::uint64_t epoch_seed, std::optional<double>& center,
                      const StepCallback& on_step) {
  const int m = static_cast<int>(theta.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(epoch_seed);
  rng.shuffle(order);

  SweepResult result;
  result.steps.reserve(m);
  const double half_pi = kPi / 2.0;

  for (const int slot : order) {
    NftStep step;
    step.slot = slot;
    step.old_value = theta[slot];

    if (!center) {
      center = objective(theta);
      ++step.circuit_evals;
    }
    const double f0 = *center;
    const double saved = theta[slot];
    theta[slot] = saved + half_pi;
    const double f_plus = objective(theta);
    theta[slot] = saved - half_pi;
    const double f_minus = objective(theta);
    theta[slot] = saved;
    step.circuit_evals += 2;

    // f(phi) = a + R cos(phi - c) through the three probes.
    const double a = 0.5 * (f_plus + f_minus);
    const double u = f0 - a;                 // R cos(saved - c)
    const double v = 0.5 * (f_minus - f_plus);  // R sin(saved - c)
    const double amplitude = std::hypot(u, v);
    if (amplitude < 1e-12) {
      step.updated = false;  // degenerate fit, leave the slot alone
      step.new_value = saved;
    } else {
      const double new_value = wrap_two_pi(saved - std::atan2(v, u) + kPi);
      theta[slot] = new_value;
      step.new_value = new_value;
      step.updated = new_value != saved;
      center = a - amplitude;  // fitted minimum, no re-evaluation
    }
    step.center_after = *center;
    result.circuit_evals += step.circuit_evals;
    result.any_update = result.any_update || step.updated;
    result.steps.push_back(step);
    if (on_step) on_step(step);
  }
  return result;
}

RunHistory run(const ansatz::AnsatzCircuit& circuit, CostFn cost,
               CvarConfig cvar_config, OptimizerConfig optimizer,
               std::uint64_t sampling_seed, std::uint64_t shuffle_seed) {
  cvar_config.validate();
  optimizer.validate();

  CircuitEvaluator evaluator(circuit, std::move(cost), cvar_config,
                             optimizer.cutoff, sampling_seed,
                             optimizer.exact_expectation);

  RunHistory history;
  history.n_qubits = circuit.n_qubits;
  history.slot_count = circuit.slot_count;

  std::vector<double> theta(circuit.slot_count, optimizer.theta0);

  // Samples observed since the last recorded iteration, deduplicated.
  std::vector<SampleRecord> staged;
  std::unordered_map<Bitstring, std::size_t> staged_index;
  auto stage = [&](const EvalResult& eval) {
    for (const auto& record : eval.samples) {
      auto [it, inserted] = staged_index.try_emplace(record.x, staged.size());
      if (inserted) {
        staged.push_back(record);
      } else {
        staged[it->second].count += record.count;
      }
    }
  };

  bool best_valid = false;
  auto observe_best = [&](const EvalResult& eval) {
    if (!eval.samples.empty() &&
        (!best_valid || eval.best_cost < history.best_cost)) {
      history.best_cost = eval.best_cost;
      history.best_x = eval.best_x;
      best_valid = true;
    }
  };

  int iteration = 0;
  auto record_iteration = [&](int epoch, int slot, double cvar_value) {
    IterationRecord rec;
    rec.iteration = iteration++;
    rec.epoch = epoch;
    rec.slot = slot;
    rec.cvar = cvar_value;
    rec.best_cost = history.best_cost;
    rec.cum_circuit_evals = evaluator.circuit_evaluations();
    rec.cum_cost_evals = evaluator.cost_evaluations();
    rec.new_samples = std::move(staged);
    staged.clear();
    staged_index.clear();
    rec.theta = theta;
    history.iterations.push_back(std::move(rec));
  };

  // Initial evaluation at theta0 seeds the NFT center and the history.
  const EvalResult initial = evaluator.evaluate(theta);
  stage(initial);
  observe_best(initial);
  std::optional<double> center = initial.cvar;
  record_iteration(0, -1, initial.cvar);

  const Objective objective = [&](std::span<const double> t) {
    const EvalResult eval = evaluator.evaluate(t);
    stage(eval);
    observe_best(eval);
    return eval.cvar;
  };

  for (int epoch = 1; epoch <= optimizer.max_epochs; ++epoch) {
    const SweepResult sweep = nft_sweep(
        theta, objective, mix_seed(shuffle_seed, epoch), center,
        [&](const NftStep& step) {
          record_iteration(epoch, step.slot, step.center_after);
        });
    history.epochs_run = epoch;
    if (!sweep.any_update) {
      history.converged = true;
      break;
    }
  }

  history.circuit_evaluations = evaluator.circuit_evaluations();
  history.cost_evaluations = evaluator.cost_evaluations();
  return history;
}

RunHistory run(const portfolio::PenalizedProblem& problem,
               const ansatz::AnsatzSpec& spec, CvarConfig cvar_config,
               OptimizerConfig optimizer, std::uint64_t sampling_seed,
               std::uint64_t shuffle_seed) {
  if (!problem.scales_set()) {
    throw std::invalid_argument("run: penalty scales not set");
  }
  if (problem.n != spec.n_qubits) {
    throw std::invalid_argument("run: problem size != qubit count");
  }
  const ansatz::AnsatzCircuit circuit = ansatz::build(spec);
  return run(
      circuit,
      [&problem](Bitstring x) { return portfolio::penalized_cost(problem, x); },
      cvar_config, optimizer, sampling_seed, shuffle_seed);
}

}  // namespace qfolio::vqa
