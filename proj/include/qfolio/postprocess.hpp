#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qfolio/portfolio.hpp"
#include "qfolio/types.hpp"
#include "qfolio/vqa.hpp"

namespace qfolio::postprocess {

struct PolishResult {
  Bitstring input = 0;
  Bitstring output = 0;
  double input_cost = 0.0;
  double output_cost = 0.0;  // <= input_cost, 1-flip locally optimal
  int flips_accepted = 0;
  std::uint64_t cost_evaluations = 0;
};

// Greedy 1-flip descent: scan the variables in a seeded random order, accept
// the first strict improvement and restart the scan with a fresh shuffle;
// stop when a full scan finds none.
PolishResult local_search(Bitstring start, int n_vars,
                          const std::function<double(Bitstring)>& cost,
                          std::uint64_t seed);
PolishResult local_search(Bitstring start,
                          const portfolio::PenalizedProblem& problem,
                          std::uint64_t seed);

struct PolishedSample {
  int origin_iteration = -1;
  PolishResult result;
};

struct PolishSummary {
  std::vector<PolishedSample> items;
  double best_cost = 0.0;
  Bitstring best_x = 0;
  double best_raw_cost = 0.0;  // best input cost over the polished scope
  std::uint64_t cost_evaluations = 0;
  bool budget_exhausted = false;
};

// Polishes every unique sampled bitstring from the last `last_k` iterations
// of the history (all iterations when last_k is empty). An optional budget
// caps total cost evaluations; candidates beyond it are skipped.
PolishSummary polish_history(
    const vqa::RunHistory& history, const portfolio::PenalizedProblem& problem,
    std::optional<int> last_k, std::uint64_t seed,
    std::optional<std::uint64_t> max_cost_evals = std::nullopt);

// Polishes an explicit candidate list (used for baselines built from a
// single iteration's samples).
PolishSummary polish_candidates(
    const std::vector<std::pair<int, Bitstring>>& candidates,
    const portfolio::PenalizedProblem& problem, std::uint64_t seed,
    std::optional<std::uint64_t> max_cost_evals = std::nullopt);

struct BruteForceResult {
  Bitstring x = 0;
  double cost = 0.0;
};

inline constexpr int kBruteForceMaxVars = 22;

// Exact argmin over {0,1}^n; ties resolve to the lowest bitstring value.
BruteForceResult brute_force(int n_vars,
                             const std::function<double(Bitstring)>& cost);
BruteForceResult brute_force(const portfolio::PenalizedProblem& problem);

// |found - optimal| / |optimal|; optimal must be nonzero.
double relative_gap(double found_cost, double optimal_cost);

struct BaselineResult {
  PolishResult best;
  std::uint64_t cost_evaluations = 0;
  int starts_run = 0;
};

// Local search from uniformly random starts; stops after n_starts searches
// or when the evaluation budget runs out, whichever happens first.
BaselineResult random_baseline(
    const portfolio::PenalizedProblem& problem, int n_starts,
    std::uint64_t seed,
    std::optional<std::uint64_t> max_cost_evals = std::nullopt);

}  // namespace qfolio::postprocess
