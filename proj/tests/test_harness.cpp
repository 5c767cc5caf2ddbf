#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfolio/harness.hpp"

using namespace qfolio;
using namespace qfolio::harness;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.generator.n_bonds = 8;
  config.generator.classes_per_dim = {2, 2};
  config.generator.seed = 11;
  config.cvar.n_shots = 256;
  config.max_epochs = 2;
  config.last_k = 5;
  return config;
}

// summary.json with the timing block removed (wall time varies run to run).
json summary_without_timing(const fs::path& dir) {
  json j = json::parse(slurp(dir / "summary.json"));
  j.erase("timing");
  return j;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qfolio_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config JSON round trip keeps every field") {
  ExperimentConfig config = tiny_config();
  config.family = ansatz::Family::Bfcd;
  config.entanglement = ansatz::Entanglement::Colored;
  config.cvar.alpha = 0.25;
  config.cutoff = 0.06;
  config.seed_sampling = 77;
  config.last_k.reset();
  config.kernels = "scalar";
  const std::string text = config_to_json_text(config);
  const ExperimentConfig back = config_from_json_text(text);
  CHECK(config_to_json_text(back) == text);
  CHECK(back.family == ansatz::Family::Bfcd);
  CHECK(back.cvar.alpha == 0.25);
  CHECK(!back.last_k.has_value());
  CHECK(back.seed_sampling == 77);
}

TEST_CASE("config validation rejects bad values") {
  auto config = tiny_config();
  config.cvar.alpha = 0.0;
  CHECK_THROWS(config.validate());
  config = tiny_config();
  config.kernels = "gpu";
  CHECK_THROWS(config.validate());
  config = tiny_config();
  config.hex_rows = 2;  // cols left at 0
  CHECK_THROWS(config.validate());
}

TEST_CASE("build_coupling_graph honors the entanglement choice") {
  auto config = tiny_config();
  const auto line = build_coupling_graph(config, 8);
  CHECK(line.edges == topology::line_graph(8).edges);
  config.entanglement = ansatz::Entanglement::Colored;
  const auto colored = build_coupling_graph(config, 8);
  CHECK(colored.node_count == 8);
  CHECK(colored.edge_colors.has_value());
}

TEST_CASE("cmd_generate is reproducible and validates input") {
  const auto dir = temp_dir("generate");
  std::ostringstream out;
  const auto config = tiny_config();
  CHECK(cmd_generate(config, (dir / "a.json").string(), out) == 0);
  CHECK(cmd_generate(config, (dir / "b.json").string(), out) == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(out.str().find("bonds 8") != std::string::npos);

  std::ifstream is(dir / "a.json");
  const auto inst = portfolio::read_instance(is);
  CHECK(inst.n_bonds() == 8);

  auto bad = config;
  bad.generator.n_bonds = 1;
  CHECK_THROWS(cmd_generate(bad, (dir / "c.json").string(), out));
}

TEST_CASE("cmd_run produces a complete, reproducible run directory") {
  const auto config = tiny_config();
  const auto dir_a = temp_dir("run_a");
  const auto dir_b = temp_dir("run_b");
  std::ostringstream out_a, out_b;
  REQUIRE(cmd_run(config, dir_a.string(), out_a) == 0);
  REQUIRE(cmd_run(config, dir_b.string(), out_b) == 0);

  for (const char* name :
       {"config.json", "instance.json", "problem.json", "graph.txt",
        "circuit.txt", "history.csv", "history.json", "polished.csv",
        "summary.json"}) {
    CHECK(fs::exists(dir_a / name));
  }

  SUBCASE("summary structure") {
    const json summary = json::parse(slurp(dir_a / "summary.json"));
    CHECK(summary.at("format") == "qfolio-summary-v1");
    CHECK(summary.at("instance").at("n_bonds") == 8);
    CHECK(!summary.at("result").at("optimal_cost").is_null());
    CHECK(!summary.at("result").at("gap_polished").is_null());
    CHECK(summary.at("result").at("polished_best_cost").is_number());
    const double raw = summary.at("result").at("raw_best_cost").get<double>();
    const double polished =
        summary.at("result").at("polished_best_cost").get<double>();
    CHECK(polished <= raw + 1e-9);
  }

  SUBCASE("identical config gives identical outputs modulo timing") {
    for (const char* name :
         {"config.json", "instance.json", "problem.json", "graph.txt",
          "circuit.txt", "history.csv", "history.json", "polished.csv"}) {
      CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }
    CHECK(summary_without_timing(dir_a) == summary_without_timing(dir_b));
  }

  SUBCASE("history CSV header is stable") {
    std::istringstream csv(slurp(dir_a / "history.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "iteration,epoch,slot,cvar,best_cost,cum_circuit_evals,cum_cost_evals");
  }

  SUBCASE("history JSON round trips through the reader") {
    std::ifstream is(dir_a / "history.json");
    const auto history = read_history(is);
    CHECK(history.n_qubits == 8);
    CHECK(!history.iterations.empty());
    CHECK(!history.iterations.front().new_samples.empty());  // iteration 0 kept
  }

  SUBCASE("compare runs against the stored artifacts") {
    std::ostringstream out;
    REQUIRE(cmd_compare(dir_a.string(), out) == 0);
    const json cmp = json::parse(slurp(dir_a / "compare.json"));
    CHECK(cmp.at("format") == "qfolio-compare-v1");
    CHECK(cmp.at("budget_cost_evaluations").get<std::uint64_t>() > 0);
    for (const char* key : {"trained", "untrained", "random"}) {
      CHECK(cmp.at(key).at("best_cost").is_number());
      CHECK(cmp.at(key).at("cost_evaluations").is_number());
    }
    // compare's replayed polish must spend exactly what the run's did.
    const auto budget = cmp.at("budget_cost_evaluations").get<std::uint64_t>();
    CHECK(cmp.at("trained").at("cost_evaluations").get<std::uint64_t>() == budget);
    const json summary = json::parse(slurp(dir_a / "summary.json"));
    CHECK(summary.at("result").at("polish_cost_evaluations").get<std::uint64_t>() ==
          budget);
  }
}

TEST_CASE("cmd_run refuses oversized instances before allocating") {
  auto config = tiny_config();
  config.generator.n_bonds = 26;
  config.generator.classes_per_dim = {3, 2};
  std::ostringstream out;
  CHECK(cmd_run(config, temp_dir("run_too_big").string(), out) == 2);
  CHECK(out.str().find("tensor-network") != std::string::npos);
}

TEST_CASE("cmd_compare without a run directory fails cleanly") {
  std::ostringstream out;
  CHECK(cmd_compare(temp_dir("no_run").string(), out) == 2);
}

TEST_CASE("cmd_brute_force reports the optimum as JSON") {
  std::ostringstream out;
  REQUIRE(cmd_brute_force(tiny_config(), out) == 0);
  const json j = json::parse(out.str());
  CHECK(j.at("feasible").get<bool>());
  CHECK(j.at("optimal_x").get<std::string>().size() == 8);
}

TEST_CASE("full history mode keeps every iteration's samples") {
  auto config = tiny_config();
  config.full_history = true;
  const auto dir = temp_dir("run_full");
  std::ostringstream out;
  REQUIRE(cmd_run(config, dir.string(), out) == 0);
  std::ifstream is(dir / "history.json");
  const auto history = read_history(is);
  for (const auto& rec : history.iterations) {
    CHECK(!rec.new_samples.empty());
  }
}

TEST_CASE("polish-all scope survives the history file") {
  // With an unbounded polish scope the file must retain every sample list,
  // or compare would replay a smaller budget than the run used.
  auto config = tiny_config();
  config.last_k.reset();
  const auto dir = temp_dir("run_polish_all");
  std::ostringstream out;
  REQUIRE(cmd_run(config, dir.string(), out) == 0);
  REQUIRE(cmd_compare(dir.string(), out) == 0);
  const json cmp = json::parse(slurp(dir / "compare.json"));
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(cmp.at("budget_cost_evaluations").get<std::uint64_t>() ==
        summary.at("result").at("polish_cost_evaluations").get<std::uint64_t>());
}
