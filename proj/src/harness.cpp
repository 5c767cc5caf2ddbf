#include "qfolio/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qfolio/rng.hpp"
#include "qfolio/topology.hpp"

namespace qfolio::harness {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json generator_to_json(const portfolio::GeneratorConfig& g) {
  return json{{"n_bonds", g.n_bonds},
              {"classes_per_dim", g.classes_per_dim},
              {"n_metrics", g.n_metrics},
              {"seed", g.seed},
              {"guardrail_fraction", g.guardrail_fraction},
              {"target_noise", g.target_noise},
              {"guardrail_margin", g.guardrail_margin},
              {"budget_headroom", g.budget_headroom},
              {"lot_size_min", g.lot_size_min},
              {"lot_size_max", g.lot_size_max},
              {"lot_count_min", g.lot_count_min},
              {"lot_count_max", g.lot_count_max},
              {"price_min", g.price_min},
              {"price_max", g.price_max},
              {"weight_min", g.weight_min},
              {"weight_max", g.weight_max}};
}

void generator_from_json(const json& j, portfolio::GeneratorConfig& g) {
  g.n_bonds = j.value("n_bonds", g.n_bonds);
  if (j.contains("classes_per_dim")) {
    g.classes_per_dim = j.at("classes_per_dim").get<std::vector<int>>();
  }
  g.n_metrics = j.value("n_metrics", g.n_metrics);
  g.seed = j.value("seed", g.seed);
  g.guardrail_fraction = j.value("guardrail_fraction", g.guardrail_fraction);
  g.target_noise = j.value("target_noise", g.target_noise);
  g.guardrail_margin = j.value("guardrail_margin", g.guardrail_margin);
  g.budget_headroom = j.value("budget_headroom", g.budget_headroom);
  g.lot_size_min = j.value("lot_size_min", g.lot_size_min);
  g.lot_size_max = j.value("lot_size_max", g.lot_size_max);
  g.lot_count_min = j.value("lot_count_min", g.lot_count_min);
  g.lot_count_max = j.value("lot_count_max", g.lot_count_max);
  g.price_min = j.value("price_min", g.price_min);
  g.price_max = j.value("price_max", g.price_max);
  g.weight_min = j.value("weight_min", g.weight_min);
  g.weight_max = j.value("weight_max", g.weight_max);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  cvar.validate();
  if (repetitions < 1) throw std::invalid_argument("config: repetitions < 1");
  if (cutoff < 0.0) throw std::invalid_argument("config: cutoff < 0");
  if (max_epochs < 0) throw std::invalid_argument("config: max_epochs < 0");
  if (hex_rows < 0 || hex_cols < 0) {
    throw std::invalid_argument("config: negative heavy-hex size");
  }
  if ((hex_rows == 0) != (hex_cols == 0)) {
    throw std::invalid_argument("config: set both hex_rows and hex_cols or neither");
  }
  if (last_k && *last_k < 0) throw std::invalid_argument("config: last_k < 0");
  if (baseline_starts < 0) throw std::invalid_argument("config: baseline_starts < 0");
  if (kappa <= 0.0) throw std::invalid_argument("config: kappa must be > 0");
  kernels::parse_backend(kernels);
  if (!instance_file) generator.validate();
}

ExperimentConfig config_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  if (j.contains("instance_file") && !j.at("instance_file").is_null()) {
    c.instance_file = j.at("instance_file").get<std::string>();
  }
  if (j.contains("generator")) generator_from_json(j.at("generator"), c.generator);
  c.kappa = j.value("kappa", c.kappa);
  if (j.contains("ansatz")) {
    const json& a = j.at("ansatz");
    if (a.contains("family")) c.family = ansatz::parse_family(a.at("family"));
    if (a.contains("entanglement")) {
      c.entanglement = ansatz::parse_entanglement(a.at("entanglement"));
    }
    c.repetitions = a.value("reps", c.repetitions);
    c.cutoff = a.value("cutoff", c.cutoff);
    c.hex_rows = a.value("hex_rows", c.hex_rows);
    c.hex_cols = a.value("hex_cols", c.hex_cols);
  }
  if (j.contains("cvar")) {
    c.cvar.alpha = j.at("cvar").value("alpha", c.cvar.alpha);
    c.cvar.n_shots = j.at("cvar").value("n_shots", c.cvar.n_shots);
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    c.max_epochs = o.value("max_epochs", c.max_epochs);
    c.theta0 = o.value("theta0", c.theta0);
    c.exact_expectation = o.value("exact_expectation", c.exact_expectation);
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    c.generator.seed = s.value("instance", c.generator.seed);
    c.seed_sampling = s.value("sampling", c.seed_sampling);
    c.seed_shuffle = s.value("shuffle", c.seed_shuffle);
    c.seed_search = s.value("search", c.seed_search);
  }
  if (j.contains("postprocess")) {
    const json& p = j.at("postprocess");
    if (p.contains("last_k")) {
      if (p.at("last_k").is_null()) {
        c.last_k.reset();
      } else {
        c.last_k = p.at("last_k").get<int>();
      }
    }
    c.baseline_starts = p.value("baseline_starts", c.baseline_starts);
  }
  c.full_history = j.value("full_history", c.full_history);
  c.kernels = j.value("kernels", c.kernels);
  c.skip_brute_force = j.value("skip_brute_force", c.skip_brute_force);
  c.validate();
  return c;
}

std::string config_to_json_text(const ExperimentConfig& c) {
  json j;
  j["instance_file"] = c.instance_file ? json(*c.instance_file) : json(nullptr);
  j["generator"] = generator_to_json(c.generator);
  j["kappa"] = c.kappa;
  j["ansatz"] = json{{"family", ansatz::family_name(c.family)},
                     {"entanglement", ansatz::entanglement_name(c.entanglement)},
                     {"reps", c.repetitions},
                     {"cutoff", c.cutoff},
                     {"hex_rows", c.hex_rows},
                     {"hex_cols", c.hex_cols}};
  j["cvar"] = json{{"alpha", c.cvar.alpha}, {"n_shots", c.cvar.n_shots}};
  j["optimizer"] = json{{"max_epochs", c.max_epochs},
                        {"theta0", c.theta0},
                        {"exact_expectation", c.exact_expectation}};
  j["seeds"] = json{{"instance", c.generator.seed},
                    {"sampling", c.seed_sampling},
                    {"shuffle", c.seed_shuffle},
                    {"search", c.seed_search}};
  j["postprocess"] = json{{"last_k", c.last_k ? json(*c.last_k) : json(nullptr)},
                          {"baseline_starts", c.baseline_starts}};
  j["full_history"] = c.full_history;
  j["kernels"] = c.kernels;
  j["skip_brute_force"] = c.skip_brute_force;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_json_text(read_text_file(path));
}

topology::CouplingGraph build_coupling_graph(const ExperimentConfig& config,
                                             int n_qubits) {
  if (config.entanglement == ansatz::Entanglement::Bilinear) {
    return topology::line_graph(n_qubits);
  }
  topology::CouplingGraph device =
      config.hex_rows > 0 ? topology::heavy_hex_graph(config.hex_rows, config.hex_cols)
                          : topology::heavy_hex_covering(n_qubits);
  if (device.node_count < n_qubits) {
    throw std::invalid_argument("heavy-hex lattice smaller than the instance");
  }
  return topology::color_edges(topology::trim_to_size(device, n_qubits));
}

void write_history(std::ostream& os, const vqa::RunHistory& history,
                   std::optional<int> last_k, bool full) {
  json j;
  j["format"] = "qfolio-history-v1";
  j["n_qubits"] = history.n_qubits;
  j["slot_count"] = history.slot_count;
  j["best_cost"] = history.best_cost;
  j["best_x"] = bitstring_to_string(history.best_x, history.n_qubits);
  j["converged"] = history.converged;
  j["epochs_run"] = history.epochs_run;
  j["circuit_evaluations"] = history.circuit_evaluations;
  j["cost_evaluations"] = history.cost_evaluations;

  // Sample lists are bulky; by default keep them only where the
  // post-processing stage can ask for them (iteration 0 and the last_k
  // window, at least 20 iterations). A scope of "all" keeps everything.
  std::size_t keep_from = 0;
  if (!full && last_k) {
    const std::size_t keep = static_cast<std::size_t>(std::max(*last_k, 20));
    keep_from = history.iterations.size() > keep
                    ? history.iterations.size() - keep
                    : 0;
  }
  json iterations = json::array();
  for (std::size_t i = 0; i < history.iterations.size(); ++i) {
    const auto& rec = history.iterations[i];
    json rj{{"iteration", rec.iteration},
            {"epoch", rec.epoch},
            {"slot", rec.slot},
            {"cvar", rec.cvar},
            {"best_cost", rec.best_cost},
            {"cum_circuit_evals", rec.cum_circuit_evals},
            {"cum_cost_evals", rec.cum_cost_evals},
            {"theta", rec.theta}};
    if (i == 0 || i >= keep_from) {
      json samples = json::array();
      for (const auto& s : rec.new_samples) {
        samples.push_back(json::array(
            {bitstring_to_string(s.x, history.n_qubits), s.count, s.cost}));
      }
      rj["samples"] = std::move(samples);
    } else {
      rj["samples"] = nullptr;  // thinned
    }
    iterations.push_back(std::move(rj));
  }
  j["iterations"] = std::move(iterations);
  os << j.dump() << "\n";
}

vqa::RunHistory read_history(std::istream& is) {
  const json j = json::parse(is);
  if (j.at("format").get<std::string>() != "qfolio-history-v1") {
    throw std::runtime_error("history file: unknown format tag");
  }
  vqa::RunHistory h;
  h.n_qubits = j.at("n_qubits").get<int>();
  h.slot_count = j.at("slot_count").get<int>();
  h.best_cost = j.at("best_cost").get<double>();
  h.best_x = parse_bitstring(j.at("best_x").get<std::string>());
  h.converged = j.at("converged").get<bool>();
  h.epochs_run = j.at("epochs_run").get<int>();
  h.circuit_evaluations = j.at("circuit_evaluations").get<std::uint64_t>();
  h.cost_evaluations = j.at("cost_evaluations").get<std::uint64_t>();
  for (const auto& rj : j.at("iterations")) {
    vqa::IterationRecord rec;
    rec.iteration = rj.at("iteration").get<int>();
    rec.epoch = rj.at("epoch").get<int>();
    rec.slot = rj.at("slot").get<int>();
    rec.cvar = rj.at("cvar").get<double>();
    rec.best_cost = rj.at("best_cost").get<double>();
    rec.cum_circuit_evals = rj.at("cum_circuit_evals").get<std::uint64_t>();
    rec.cum_cost_evals = rj.at("cum_cost_evals").get<std::uint64_t>();
    rec.theta = rj.at("theta").get<std::vector<double>>();
    if (!rj.at("samples").is_null()) {
      for (const auto& sj : rj.at("samples")) {
        vqa::SampleRecord s;
        s.x = parse_bitstring(sj.at(0).get<std::string>());
        s.count = sj.at(1).get<int>();
        s.cost = sj.at(2).get<double>();
        rec.new_samples.push_back(s);
      }
    }
    h.iterations.push_back(std::move(rec));
  }
  return h;
}

void write_history_csv(std::ostream& os, const vqa::RunHistory& history) {
  os << "iteration,epoch,slot,cvar,best_cost,cum_circuit_evals,cum_cost_evals\n";
  for (const auto& rec : history.iterations) {
    os << rec.iteration << "," << rec.epoch << "," << rec.slot << ","
       << fmt_double(rec.cvar) << "," << fmt_double(rec.best_cost) << ","
       << rec.cum_circuit_evals << "," << rec.cum_cost_evals << "\n";
  }
}

void write_polished_csv(std::ostream& os,
                        const postprocess::PolishSummary& polish, int n_vars) {
  os << "origin_iteration,raw_cost,polished_cost,flips,evaluations,input,output\n";
  for (const auto& item : polish.items) {
    os << item.origin_iteration << "," << fmt_double(item.result.input_cost)
       << "," << fmt_double(item.result.output_cost) << ","
       << item.result.flips_accepted << "," << item.result.cost_evaluations
       << "," << bitstring_to_string(item.result.input, n_vars) << ","
       << bitstring_to_string(item.result.output, n_vars) << "\n";
  }
}

namespace {

portfolio::PortfolioInstance obtain_instance(const ExperimentConfig& config) {
  if (config.instance_file) {
    std::ifstream is(*config.instance_file);
    if (!is) {
      throw std::runtime_error("cannot open instance file " +
                               *config.instance_file);
    }
    return portfolio::read_instance(is);
  }
  return portfolio::build_instance(config.generator);
}

int target_count(const portfolio::PortfolioInstance& instance) {
  int count = 0;
  for (int d = 0; d < instance.n_dimensions(); ++d) {
    count += instance.classes_per_dim[d] * instance.n_metrics;
  }
  return count;
}

}  // namespace

int cmd_generate(const ExperimentConfig& config, const std::string& out_file,
                 std::ostream& out) {
  config.validate();
  const auto instance = portfolio::build_instance(config.generator);
  const auto problem = portfolio::to_matrix_form(instance);
  std::ostringstream text;
  portfolio::write_instance(text, instance);
  write_text_file(out_file, text.str());
  out << "wrote " << out_file << "\n"
      << "bonds " << instance.n_bonds() << "\n"
      << "targets " << target_count(instance) << "\n"
      << "constraints " << problem.m << "\n";
  return 0;
}

int cmd_run(const ExperimentConfig& config, const std::string& out_dir,
            std::ostream& out) {
  config.validate();
  kernels::select(kernels::parse_backend(config.kernels));
  const auto t_start = std::chrono::steady_clock::now();

  const auto instance = obtain_instance(config);
  const int n = instance.n_bonds();
  if (n > sim::StateVector::kMaxQubits) {
    out << "error: " << n << " bonds need " << n
        << " qubits, beyond the dense statevector limit of "
        << sim::StateVector::kMaxQubits
        << "; larger instances need a tensor-network simulator, which this "
           "project does not include\n";
    return 2;
  }

  const auto problem = portfolio::choose_penalty_scales(
      portfolio::to_matrix_form(instance), config.kappa);
  const auto graph = build_coupling_graph(config, n);
  const ansatz::AnsatzSpec spec{config.family, config.entanglement, graph,
                                config.repetitions, n};
  const auto circuit = ansatz::build(spec);

  const vqa::OptimizerConfig optimizer{config.max_epochs, config.cutoff,
                                       config.theta0, config.exact_expectation};
  const auto history = vqa::run(problem, spec, config.cvar, optimizer,
                                config.seed_sampling, config.seed_shuffle);
  const auto polish = postprocess::polish_history(history, problem,
                                                  config.last_k,
                                                  config.seed_search);

  std::optional<postprocess::BruteForceResult> optimum;
  if (!config.skip_brute_force && n <= postprocess::kBruteForceMaxVars) {
    optimum = postprocess::brute_force(problem);
  }

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "config.json", config_to_json_text(config));
  {
    std::ostringstream text;
    portfolio::write_instance(text, instance);
    write_text_file(dir / "instance.json", text.str());
  }
  {
    std::ostringstream text;
    portfolio::write_problem(text, problem);
    write_text_file(dir / "problem.json", text.str());
  }
  write_text_file(dir / "graph.txt", topology::to_text(graph));
  {
    std::ostringstream text;
    sim::write_circuit(text, circuit.gates, circuit.n_qubits);
    write_text_file(dir / "circuit.txt", text.str());
  }
  {
    std::ostringstream text;
    write_history_csv(text, history);
    write_text_file(dir / "history.csv", text.str());
  }
  {
    std::ostringstream text;
    write_history(text, history, config.last_k, config.full_history);
    write_text_file(dir / "history.json", text.str());
  }
  {
    std::ostringstream text;
    write_polished_csv(text, polish, n);
    write_text_file(dir / "polished.csv", text.str());
  }

  const double wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();

  json summary;
  summary["format"] = "qfolio-summary-v1";
  summary["instance"] = json{{"n_bonds", n},
                             {"targets", target_count(instance)},
                             {"constraints", problem.m}};
  summary["circuit"] = json{{"family", ansatz::family_name(config.family)},
                            {"entanglement", ansatz::entanglement_name(config.entanglement)},
                            {"reps", config.repetitions},
                            {"parameter_slots", circuit.slot_count},
                            {"two_qubit_gates", circuit.two_qubit_gate_count},
                            {"total_gates", circuit.gates.size()}};
  json result;
  result["optimal_cost"] = optimum ? json(optimum->cost) : json(nullptr);
  result["optimal_x"] =
      optimum ? json(bitstring_to_string(optimum->x, n)) : json(nullptr);
  result["raw_best_cost"] = history.best_cost;
  result["raw_best_x"] = bitstring_to_string(history.best_x, n);
  result["polished_best_cost"] = polish.best_cost;
  result["polished_best_x"] = bitstring_to_string(polish.best_x, n);
  if (optimum && optimum->cost != 0.0) {
    result["gap_raw"] = postprocess::relative_gap(history.best_cost, optimum->cost);
    result["gap_polished"] =
        postprocess::relative_gap(polish.best_cost, optimum->cost);
  } else {
    result["gap_raw"] = nullptr;
    result["gap_polished"] = nullptr;
  }
  result["epochs_run"] = history.epochs_run;
  result["converged"] = history.converged;
  result["iterations"] = history.iterations.size();
  result["circuit_evaluations"] = history.circuit_evaluations;
  result["cost_evaluations"] = history.cost_evaluations;
  result["polish_cost_evaluations"] = polish.cost_evaluations;
  result["polish_candidates"] = polish.items.size();
  summary["result"] = std::move(result);
  summary["kernels"] = kernels::active().name;
  // Excluded from reproducibility comparisons (see README).
  summary["timing"] = json{{"wall_seconds", wall_seconds}};
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");

  out << "run " << out_dir << "\n";
  out << "  n=" << n << " slots=" << circuit.slot_count
      << " epochs=" << history.epochs_run
      << " circuit_evals=" << history.circuit_evaluations << "\n";
  if (optimum) {
    out << "  optimal   " << fmt_double(optimum->cost) << "\n";
  }
  out << "  raw best  " << fmt_double(history.best_cost);
  if (optimum && optimum->cost != 0.0) {
    out << "  (gap "
        << fmt_double(postprocess::relative_gap(history.best_cost, optimum->cost))
        << ")";
  }
  out << "\n  polished  " << fmt_double(polish.best_cost);
  if (optimum && optimum->cost != 0.0) {
    out << "  (gap "
        << fmt_double(postprocess::relative_gap(polish.best_cost, optimum->cost))
        << ")";
  }
  out << "\n  wall " << fmt_double(wall_seconds) << " s\n";
  return 0;
}

int cmd_compare(const std::string& run_dir, std::ostream& out) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "history.json")) {
    out << "error: " << run_dir << " does not contain a completed run\n";
    return 2;
  }
  const auto config = config_from_json_text(read_text_file(dir / "config.json"));
  portfolio::PortfolioInstance instance;
  {
    std::ifstream is(dir / "instance.json");
    instance = portfolio::read_instance(is);
  }
  const auto problem = portfolio::choose_penalty_scales(
      portfolio::to_matrix_form(instance), config.kappa);
  vqa::RunHistory history;
  {
    std::ifstream is(dir / "history.json");
    history = read_history(is);
  }
  std::optional<double> optimal_cost;
  {
    const json summary = json::parse(read_text_file(dir / "summary.json"));
    if (!summary.at("result").at("optimal_cost").is_null()) {
      optimal_cost = summary.at("result").at("optimal_cost").get<double>();
    }
  }

  // Trained-sample polishing fixes the evaluation budget for both baselines.
  const auto trained = postprocess::polish_history(history, problem,
                                                   config.last_k,
                                                   config.seed_search);
  const std::uint64_t budget = trained.cost_evaluations;

  std::vector<std::pair<int, Bitstring>> initial;
  for (const auto& sample : history.iterations.front().new_samples) {
    initial.push_back({0, sample.x});
  }
  const auto untrained = postprocess::polish_candidates(
      initial, problem, mix_seed(config.seed_search, 101), budget);

  const int starts = config.baseline_starts > 0
                         ? config.baseline_starts
                         : std::numeric_limits<int>::max();
  const auto random = postprocess::random_baseline(
      problem, starts, mix_seed(config.seed_search, 202), budget);

  auto gap_of = [&](double cost) -> json {
    if (optimal_cost && *optimal_cost != 0.0) {
      return postprocess::relative_gap(cost, *optimal_cost);
    }
    return nullptr;
  };

  json j;
  j["format"] = "qfolio-compare-v1";
  j["budget_cost_evaluations"] = budget;
  j["optimal_cost"] = optimal_cost ? json(*optimal_cost) : json(nullptr);
  j["trained"] = json{{"best_cost", trained.best_cost},
                      {"gap", gap_of(trained.best_cost)},
                      {"candidates", trained.items.size()},
                      {"cost_evaluations", trained.cost_evaluations}};
  j["untrained"] = json{{"best_cost", untrained.best_cost},
                        {"gap", gap_of(untrained.best_cost)},
                        {"candidates", untrained.items.size()},
                        {"cost_evaluations", untrained.cost_evaluations}};
  j["random"] = json{{"best_cost", random.best.output_cost},
                     {"gap", gap_of(random.best.output_cost)},
                     {"starts", random.starts_run},
                     {"cost_evaluations", random.cost_evaluations}};
  const std::string text = j.dump(2) + "\n";
  write_text_file(dir / "compare.json", text);
  out << text;
  return 0;
}

int cmd_brute_force(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const auto instance = obtain_instance(config);
  if (instance.n_bonds() > postprocess::kBruteForceMaxVars) {
    out << "error: brute force is guarded to n <= "
        << postprocess::kBruteForceMaxVars << " variables\n";
    return 2;
  }
  const auto problem = portfolio::choose_penalty_scales(
      portfolio::to_matrix_form(instance), config.kappa);
  const auto result = postprocess::brute_force(problem);
  json j;
  j["optimal_cost"] = result.cost;
  j["optimal_x"] = bitstring_to_string(result.x, problem.n);
  j["feasible"] = problem.feasible(result.x);
  out << j.dump(2) << "\n";
  return 0;
}

}  // namespace qfolio::harness
