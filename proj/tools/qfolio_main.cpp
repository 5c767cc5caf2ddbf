// Command-line entry point: generate / run / compare / brute-force.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qfolio/harness.hpp"

namespace {

using qfolio::harness::ExperimentConfig;

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> instance_file;
  std::optional<int> n_bonds;
  std::optional<std::string> ansatz;
  std::optional<std::string> entanglement;
  std::optional<int> reps;
  std::optional<double> cutoff;
  std::optional<int> hex_rows, hex_cols;
  std::optional<double> alpha;
  std::optional<int> shots;
  std::optional<int> epochs;
  std::optional<double> theta0;
  std::optional<bool> exact;
  std::optional<double> kappa;
  std::optional<std::uint64_t> seed_instance, seed_sampling, seed_shuffle,
      seed_search;
  std::optional<int> last_k;
  std::optional<bool> polish_all;
  std::optional<int> baseline_starts;
  std::optional<bool> full_history;
  std::optional<std::string> kernels;
  std::optional<bool> skip_brute_force;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config file (JSON)");
  cmd->add_option("--instance", f.instance_file, "load instance from file");
  cmd->add_option("-n,--bonds", f.n_bonds, "generated universe size");
  cmd->add_option("--ansatz", f.ansatz, "twolocal|bfcd");
  cmd->add_option("--entanglement", f.entanglement, "bilinear|color");
  cmd->add_option("--reps", f.reps, "ansatz repetitions r");
  cmd->add_option("--cutoff", f.cutoff, "parameter cut-off threshold");
  cmd->add_option("--hex-rows", f.hex_rows, "heavy-hex rows (0 = auto)");
  cmd->add_option("--hex-cols", f.hex_cols, "heavy-hex cols (0 = auto)");
  cmd->add_option("--alpha", f.alpha, "CVaR tail fraction in (0,1]");
  cmd->add_option("--shots", f.shots, "measurement shots per evaluation");
  cmd->add_option("--epochs", f.epochs, "max NFT epochs");
  cmd->add_option("--theta0", f.theta0, "initial value for every parameter");
  cmd->add_flag("--exact", f.exact, "exact-expectation mode (no shot noise)");
  cmd->add_option("--kappa", f.kappa, "penalty scale factor");
  cmd->add_option("--seed-instance", f.seed_instance, "instance generator seed");
  cmd->add_option("--seed-sampling", f.seed_sampling, "measurement seed");
  cmd->add_option("--seed-shuffle", f.seed_shuffle, "NFT shuffle seed");
  cmd->add_option("--seed-search", f.seed_search, "local search seed");
  cmd->add_option("--last-k", f.last_k, "polish samples from the last k iterations");
  cmd->add_flag("--polish-all", f.polish_all, "polish samples from every iteration");
  cmd->add_option("--baseline-starts", f.baseline_starts,
                  "random-baseline starts (0 = match evaluation budget)");
  cmd->add_flag("--full-history", f.full_history,
                "keep every iteration's samples in history.json");
  cmd->add_option("--kernels", f.kernels, "auto|scalar|avx2");
  cmd->add_flag("--skip-brute-force", f.skip_brute_force,
                "do not compute the exact optimum");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c;
  if (f.config_path) c = qfolio::harness::load_config(*f.config_path);
  if (f.instance_file) c.instance_file = *f.instance_file;
  if (f.n_bonds) c.generator.n_bonds = *f.n_bonds;
  if (f.ansatz) c.family = qfolio::ansatz::parse_family(*f.ansatz);
  if (f.entanglement) {
    c.entanglement = qfolio::ansatz::parse_entanglement(*f.entanglement);
  }
  if (f.reps) c.repetitions = *f.reps;
  if (f.cutoff) c.cutoff = *f.cutoff;
  if (f.hex_rows) c.hex_rows = *f.hex_rows;
  if (f.hex_cols) c.hex_cols = *f.hex_cols;
  if (f.alpha) c.cvar.alpha = *f.alpha;
  if (f.shots) c.cvar.n_shots = *f.shots;
  if (f.epochs) c.max_epochs = *f.epochs;
  if (f.theta0) c.theta0 = *f.theta0;
  if (f.exact) c.exact_expectation = *f.exact;
  if (f.kappa) c.kappa = *f.kappa;
  if (f.seed_instance) c.generator.seed = *f.seed_instance;
  if (f.seed_sampling) c.seed_sampling = *f.seed_sampling;
  if (f.seed_shuffle) c.seed_shuffle = *f.seed_shuffle;
  if (f.seed_search) c.seed_search = *f.seed_search;
  if (f.last_k) c.last_k = *f.last_k;
  if (f.polish_all && *f.polish_all) c.last_k.reset();
  if (f.baseline_starts) c.baseline_starts = *f.baseline_starts;
  if (f.full_history) c.full_history = *f.full_history;
  if (f.kernels) c.kernels = *f.kernels;
  if (f.skip_brute_force) c.skip_brute_force = *f.skip_brute_force;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfolio: sampling-based variational portfolio construction"};
  app.require_subcommand(1);

  CommonFlags gen_flags, run_flags, bf_flags;
  std::string gen_out = "instance.json";
  std::string run_out = "run";
  std::string compare_dir;

  CLI::App* gen = app.add_subcommand("generate", "write a synthetic instance file");
  add_common_flags(gen, gen_flags);
  gen->add_option("-o,--out", gen_out, "output instance file");

  CLI::App* run = app.add_subcommand("run", "optimize and post-process an instance");
  add_common_flags(run, run_flags);
  run->add_option("-o,--out", run_out, "output run directory");

  CLI::App* compare = app.add_subcommand(
      "compare", "equal-budget comparison against classical baselines");
  compare->add_option("run_dir", compare_dir, "completed run directory")
      ->required();

  CLI::App* bf = app.add_subcommand("brute-force", "exact optimum of an instance");
  add_common_flags(bf, bf_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return qfolio::harness::cmd_generate(resolve(gen_flags), gen_out, std::cout);
    }
    if (run->parsed()) {
      return qfolio::harness::cmd_run(resolve(run_flags), run_out, std::cout);
    }
    if (compare->parsed()) {
      return qfolio::harness::cmd_compare(compare_dir, std::cout);
    }
    if (bf->parsed()) {
      return qfolio::harness::cmd_brute_force(resolve(bf_flags), std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
