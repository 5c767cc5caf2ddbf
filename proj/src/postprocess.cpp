#include "qfolio/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "qfolio/rng.hpp"

namespace qfolio::postprocess {

PolishResult local_search(Bitstring start, int n_vars,
                          const std::function<double(Bitstring)>& cost,
                          std::uint64_t seed) {
  check_bitstring_length(start, n_vars, "local_search");
  Rng rng(seed);
  std::vector<int> order(n_vars);
  std::iota(order.begin(), order.end(), 0);

  PolishResult result;
  result.input = start;
  result.output = start;
  result.input_cost = cost(start);
  result.output_cost = result.input_cost;
  ++result.cost_evaluations;

  bool improved = true;
  while (improved) {
    improved = false;
    rng.shuffle(order);
    for (const int k : order) {
      const Bitstring candidate = flip_bit(result.output, k);
      const double candidate_cost = cost(candidate);
      ++result.cost_evaluations;
      if (candidate_cost < result.output_cost) {
        result.output = candidate;
        result.output_cost = candidate_cost;
        ++result.flips_accepted;
        improved = true;  // restart the scan from the new point
        break;
      }
    }
  }
  return result;
}

PolishResult local_search(Bitstring start,
                          const portfolio::PenalizedProblem& problem,
                          std::uint64_t seed) {
  return local_search(
      start, problem.n,
      [&problem](Bitstring x) { return portfolio::penalized_cost(problem, x); },
      seed);
}

namespace {

PolishSummary polish_list(const std::vector<std::pair<int, Bitstring>>& scope,
                          const portfolio::PenalizedProblem& problem,
                          std::uint64_t seed,
                          std::optional<std::uint64_t> max_cost_evals) {
  PolishSummary summary;
  std::unordered_set<Bitstring> seen;
  std::uint64_t candidate_index = 0;
  bool first = true;
  for (const auto& [origin, x] : scope) {
    if (!seen.insert(x).second) continue;
    if (max_cost_evals && summary.cost_evaluations >= *max_cost_evals) {
      summary.budget_exhausted = true;
      break;
    }
    PolishResult polished =
        local_search(x, problem, mix_seed(seed, candidate_index++));
    summary.cost_evaluations += polished.cost_evaluations;
    if (first || polished.output_cost < summary.best_cost) {
      summary.best_cost = polished.output_cost;
      summary.best_x = polished.output;
    }
    if (first || polished.input_cost < summary.best_raw_cost) {
      summary.best_raw_cost = polished.input_cost;
    }
    first = false;
    summary.items.push_back({origin, std::move(polished)});
  }
  return summary;
}

}  // namespace

PolishSummary polish_history(const vqa::RunHistory& history,
                             const portfolio::PenalizedProblem& problem,
                             std::optional<int> last_k, std::uint64_t seed,
                             std::optional<std::uint64_t> max_cost_evals) {
  if (history.iterations.empty()) {
    throw std::invalid_argument("polish_history: empty history");
  }
  std::size_t begin = 0;
  if (last_k) {
    if (*last_k < 0) throw std::invalid_argument("polish_history: last_k < 0");
    const std::size_t k = static_cast<std::size_t>(*last_k);
    begin = k >= history.iterations.size() ? 0 : history.iterations.size() - k;
  }
  std::vector<std::pair<int, Bitstring>> scope;
  for (std::size_t i = begin; i < history.iterations.size(); ++i) {
    const auto& record = history.iterations[i];
    for (const auto& sample : record.new_samples) {
      scope.push_back({record.iteration, sample.x});
    }
  }
  return polish_list(scope, problem, seed, max_cost_evals);
}

PolishSummary polish_candidates(
    const std::vector<std::pair<int, Bitstring>>& candidates,
    const portfolio::PenalizedProblem& problem, std::uint64_t seed,
    std::optional<std::uint64_t> max_cost_evals) {
  return polish_list(candidates, problem, seed, max_cost_evals);
}

BruteForceResult brute_force(int n_vars,
                             const std::function<double(Bitstring)>& cost) {
  if (n_vars < 1) throw std::invalid_argument("brute_force: n_vars < 1");
  if (n_vars > kBruteForceMaxVars) {
    throw std::invalid_argument("brute_force: " + std::to_string(n_vars) +
                                " variables exceeds the 2^" +
                                std::to_string(kBruteForceMaxVars) + " guard");
  }
  BruteForceResult best{0, cost(0)};
  const Bitstring end = Bitstring{1} << n_vars;
  for (Bitstring x = 1; x < end; ++x) {
    const double c = cost(x);
    if (c < best.cost) {  // strict: ties keep the lowest bitstring value
      best.cost = c;
      best.x = x;
    }
  }
  return best;
}

BruteForceResult brute_force(const portfolio::PenalizedProblem& problem) {
  if (!problem.scales_set()) {
    throw std::invalid_argument("brute_force: penalty scales not set");
  }
  return brute_force(problem.n, [&problem](Bitstring x) {
    return portfolio::penalized_cost(problem, x);
  });
}

double relative_gap(double found_cost, double optimal_cost) {
  if (optimal_cost == 0.0) {
    throw std::invalid_argument("relative_gap: optimal cost is zero");
  }
  return std::abs(found_cost - optimal_cost) / std::abs(optimal_cost);
}

BaselineResult random_baseline(const portfolio::PenalizedProblem& problem,
                               int n_starts, std::uint64_t seed,
                               std::optional<std::uint64_t> max_cost_evals) {
  if (n_starts < 1) throw std::invalid_argument("random_baseline: n_starts < 1");
  Rng rng(mix_seed(seed, 0));
  BaselineResult result;
  const Bitstring mask =
      problem.n >= 64 ? ~Bitstring{0} : (Bitstring{1} << problem.n) - 1;
  for (int start = 0; start < n_starts; ++start) {
    if (max_cost_evals && result.cost_evaluations >= *max_cost_evals) break;
    Bitstring x = 0;
    for (int k = 0; k < problem.n; ++k) {
      if (rng.bernoulli(0.5)) x |= Bitstring{1} << k;
    }
    x &= mask;
    PolishResult polished = local_search(x, problem, mix_seed(seed, start + 1));
    result.cost_evaluations += polished.cost_evaluations;
    if (result.starts_run == 0 || polished.output_cost < result.best.output_cost) {
      result.best = polished;
    }
    ++result.starts_run;
  }
  return result;
}

}  // namespace qfolio::postprocess
