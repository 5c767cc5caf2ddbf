#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "qfolio/ansatz.hpp"
#include "qfolio/portfolio.hpp"
#include "qfolio/types.hpp"

namespace qfolio::vqa {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct CvarConfig {
  double alpha = 0.1;   // in (0, 1]
  int n_shots = 8192;   // 2^13

  void validate() const;
};

// Mean of the lowest ceil(alpha*N) values (at least one).
double cvar(std::vector<double> costs, double alpha);

using CostFn = std::function<double(Bitstring)>;

// Memoizing cost wrapper; distinct evaluations are the budget unit used for
// classical/quantum comparisons.
class CostCache {
 public:
  explicit CostCache(CostFn fn) : fn_(std::move(fn)) {}

  double operator()(Bitstring x) {
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    ++misses_;
    const double value = fn_(x);
    cache_.emplace(x, value);
    return value;
  }

  std::uint64_t distinct_evaluations() const { return misses_; }

 private:
  CostFn fn_;
  std::unordered_map<Bitstring, double> cache_;
  std::uint64_t misses_ = 0;
};

struct SampleRecord {
  Bitstring x = 0;
  int count = 0;  // shots that produced x (1 for exact-mode records)
  double cost = 0.0;
};

struct EvalResult {
  double cvar = 0.0;
  std::vector<SampleRecord> samples;  // unique outcomes, ordered by value
  double best_cost = 0.0;
  Bitstring best_x = 0;
};

// Evaluates theta -> CVaR by binding the circuit, simulating, sampling and
// scoring. Owns the seed stream (one sub-seed per evaluation) and the cost
// cache. In exact-expectation mode the full output distribution replaces
// sampling; only available for n <= 20.
class CircuitEvaluator {
 public:
  CircuitEvaluator(const ansatz::AnsatzCircuit& circuit, CostFn cost,
                   CvarConfig cvar_config, double cutoff,
                   std::uint64_t sampling_seed, bool exact_expectation);

  EvalResult evaluate(std::span<const double> theta);

  std::uint64_t circuit_evaluations() const { return circuit_evals_; }
  std::uint64_t cost_evaluations() const { return cost_cache_.distinct_evaluations(); }

 private:
  const ansatz::AnsatzCircuit& circuit_;
  CostCache cost_cache_;
  CvarConfig cvar_config_;
  double cutoff_;
  std::uint64_t sampling_seed_;
  bool exact_;
  std::uint64_t circuit_evals_ = 0;
  // exact mode: costs of all basis states and the cost-ascending order
  std::vector<double> cost_table_;
  std::vector<std::uint32_t> cost_order_;
};

struct NftStep {
  int slot = -1;
  double old_value = 0.0;
  double new_value = 0.0;
  double center_after = 0.0;  // objective estimate at the updated theta
  int circuit_evals = 0;
  bool updated = false;
};

struct SweepResult {
  std::vector<NftStep> steps;
  bool any_update = false;
  int circuit_evals = 0;
};

using Objective = std::function<double(std::span<const double>)>;
using StepCallback = std::function<void(const NftStep&)>;

// One NFT epoch: every slot visited once in a seeded random order. Each step
// fits f(phi) = a + R cos(phi - c) through the center value and probes at
// +-pi/2, then moves the slot to the fitted minimum c + pi (mod 2 pi).
// `center` carries f(theta) across steps so an epoch costs 2m evaluations
// (2m+1 when entered without a center). Fits with R < 1e-12 leave the slot
// unchanged.
SweepResult nft_sweep(std::vector<double>& theta, const Objective& objective,
                      std::uint64_t epoch_seed, std::optional<double>& center,
                      const StepCallback& on_step = {});

struct OptimizerConfig {
  int max_epochs = 30;
  double cutoff = 0.0;
  double theta0 = kPi / 3.0;
  bool exact_expectation = false;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;  // 0 is the initial evaluation at theta0
  int epoch = 0;      // 0 initial, then 1-based
  int slot = -1;
  double cvar = 0.0;       // objective estimate after the step
  double best_cost = 0.0;  // best sampled cost so far (non-increasing)
  std::uint64_t cum_circuit_evals = 0;
  std::uint64_t cum_cost_evals = 0;
  std::vector<SampleRecord> new_samples;  // unique outcomes seen this step
  std::vector<double> theta;              // snapshot after the step
};

struct RunHistory {
  int n_qubits = 0;
  int slot_count = 0;
  std::vector<IterationRecord> iterations;
  double best_cost = 0.0;
  Bitstring best_x = 0;
  bool converged = false;  // an epoch left every parameter unchanged
  int epochs_run = 0;
  std::uint64_t circuit_evaluations = 0;
  std::uint64_t cost_evaluations = 0;
};

// Full optimization loop over an explicit circuit and cost function.
RunHistory run(const ansatz::AnsatzCircuit& circuit, CostFn cost,
               CvarConfig cvar_config, OptimizerConfig optimizer,
               std::uint64_t sampling_seed, std::uint64_t shuffle_seed);

// Convenience wrapper: builds the ansatz and scores with penalized_cost.
RunHistory run(const portfolio::PenalizedProblem& problem,
               const ansatz::AnsatzSpec& spec, CvarConfig cvar_config,
               OptimizerConfig optimizer, std::uint64_t sampling_seed,
               std::uint64_t shuffle_seed);

}  // namespace qfolio::vqa
