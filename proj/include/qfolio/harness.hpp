#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qfolio/ansatz.hpp"
#include "qfolio/kernels.hpp"
#include "qfolio/portfolio.hpp"
#include "qfolio/postprocess.hpp"
#include "qfolio/vqa.hpp"

namespace qfolio::harness {

// One experiment, fully specified. Every random choice is pinned by one of
// four explicit seeds: instance (inside generator), circuit sampling, NFT
// shuffle, local search.
struct ExperimentConfig {
  // Instance source: a file wins over the generator when set.
  std::optional<std::string> instance_file;
  portfolio::GeneratorConfig generator;
  double kappa = 10.0;

  ansatz::Family family = ansatz::Family::TwoLocal;
  ansatz::Entanglement entanglement = ansatz::Entanglement::Bilinear;
  int repetitions = 2;
  double cutoff = 0.0;
  int hex_rows = 0;  // 0 = size the heavy-hex lattice automatically
  int hex_cols = 0;

  vqa::CvarConfig cvar;
  int max_epochs = 30;
  double theta0 = vqa::kPi / 3.0;
  bool exact_expectation = false;

  std::uint64_t seed_sampling = 2;
  std::uint64_t seed_shuffle = 3;
  std::uint64_t seed_search = 4;

  std::optional<int> last_k = 20;  // post-processing scope; empty = all
  int baseline_starts = 0;         // 0 = spend the same evaluation budget
  bool full_history = false;       // keep every iteration's samples on disk
  std::string kernels = "auto";
  bool skip_brute_force = false;

  void validate() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

// Builds the coupling graph the configured entanglement runs on.
topology::CouplingGraph build_coupling_graph(const ExperimentConfig& config,
                                             int n_qubits);

// History file (JSON). By default sample lists are kept only for iteration 0
// and the post-processing window; `full` keeps everything.
void write_history(std::ostream& os, const vqa::RunHistory& history,
                   std::optional<int> last_k, bool full);
vqa::RunHistory read_history(std::istream& is);

// CSV emitters (schemas in the README).
void write_history_csv(std::ostream& os, const vqa::RunHistory& history);
void write_polished_csv(std::ostream& os,
                        const postprocess::PolishSummary& polish, int n_vars);

// Subcommand bodies. Each returns a process exit code and reports through
// `out` so tests can run them in-process.
int cmd_generate(const ExperimentConfig& config, const std::string& out_file,
                 std::ostream& out);
int cmd_run(const ExperimentConfig& config, const std::string& out_dir,
            std::ostream& out);
int cmd_compare(const std::string& run_dir, std::ostream& out);
int cmd_brute_force(const ExperimentConfig& config, std::ostream& out);

}  // namespace qfolio::harness
