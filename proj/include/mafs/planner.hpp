#pragma once

// One entry point for every algorithm, producing a uniform run report.

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mafs/ppastar.hpp"
#include "mafs/sim_driver.hpp"
#include "mafs/validate.hpp"

namespace mafs {

enum class Algorithm { kMafs, kMadAStar, kAStar, kPPAStar };

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "mafs") return Algorithm::kMafs;
  if (s == "mad-astar") return Algorithm::kMadAStar;
  if (s == "astar") return Algorithm::kAStar;
  if (s == "pp-astar") return Algorithm::kPPAStar;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kMafs: return "mafs";
    case Algorithm::kMadAStar: return "mad-astar";
    case Algorithm::kAStar: return "astar";
    case Algorithm::kPPAStar: return "pp-astar";
  }
  return "?";
}

inline bool is_distributed(Algorithm a) { return a == Algorithm::kMafs || a == Algorithm::kMadAStar; }

struct PlannerConfig {
  Algorithm algorithm = Algorithm::kMadAStar;
  std::optional<HeuristicKind> heuristic;  // default: ff for mafs, hmax otherwise
  bool pb_pruning = true;                  // pp-astar only
  std::uint64_t seed = 1;
  double timeout_seconds = 60.0;
  std::size_t memory_limit_bytes = std::size_t{1} << 30;
  PrivacyMode privacy = PrivacyMode::kPlain;
  SendTiming timing = SendTiming::kLazy;
  std::uint64_t max_delay = 3;
  bool robustness = false;

  HeuristicKind effective_heuristic() const {
    if (heuristic) return *heuristic;
    return algorithm == Algorithm::kMafs ? HeuristicKind::kFF : HeuristicKind::kMax;
  }
};

struct RunReport {
  std::string instance;
  std::string algorithm;
  std::string heuristic;
  int agents = 0;
  Outcome outcome = Outcome::kRunning;
  std::optional<Cost> cost;
  std::vector<ActionId> plan;
  double seconds = 0;
  std::vector<std::uint64_t> expansions;  // per agent (one entry when centralized)
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t seed = 0;
  std::optional<double> efficiency;
  bool plan_valid = false;

  std::uint64_t total_expansions() const {
    std::uint64_t s = 0;
    for (auto e : expansions) s += e;
    return s;
  }
};

inline int exit_code(Outcome o) {
  switch (o) {
    case Outcome::kSolved: return 0;
    case Outcome::kUnsolvable: return 10;
    case Outcome::kTimeout: return 20;
    case Outcome::kMemory: return 30;
    case Outcome::kRunning: return 1;
  }
  return 1;
}

inline SimRunConfig sim_config_for(const PlannerConfig& cfg) {
  SimRunConfig sc;
  sc.agent.mode = cfg.algorithm == Algorithm::kMafs ? SearchMode::kSatisficing : SearchMode::kOptimal;
  sc.agent.heuristic = cfg.effective_heuristic();
  sc.agent.privacy = cfg.privacy;
  sc.agent.timing = cfg.timing;
  sc.agent.seed = cfg.seed;
  sc.agent.robustness = cfg.robustness;
  sc.net.seed = cfg.seed;
  sc.net.max_delay = cfg.max_delay;
  sc.schedule_seed = cfg.seed;
  sc.timeout_seconds = cfg.timeout_seconds;
  sc.memory_limit_bytes = cfg.memory_limit_bytes;
  return sc;
}

inline RunReport run_planner(const Task& task, const Classification& cls, const PlannerConfig& cfg,
                             const std::string& instance = "") {
  RunReport rep;
  rep.instance = instance;
  rep.algorithm = algorithm_name(cfg.algorithm);
  rep.heuristic = heuristic_name(cfg.effective_heuristic());
  rep.agents = task.num_agents();
  rep.seed = cfg.seed;
  if (is_distributed(cfg.algorithm)) {
    const RunResult r = run_sim(task, cls, sim_config_for(cfg));
    rep.outcome = r.outcome;
    rep.plan = r.plan;
    rep.seconds = r.seconds;
    for (const auto& a : r.agents) rep.expansions.push_back(a.expansions);
    rep.messages = r.total_messages();
    rep.bytes = r.total_bytes();
  } else {
    SearchLimits lim;
    lim.timeout_seconds = cfg.timeout_seconds;
    // rough per-node footprint: the state twice (key + copy) plus bookkeeping
    lim.max_nodes = std::max<std::size_t>(
        1000, cfg.memory_limit_bytes / (2 * sizeof(Value) * task.num_vars() + 160));
    const SearchResult r =
        cfg.algorithm == Algorithm::kAStar
            ? astar(task, cfg.effective_heuristic(), lim)
            : pp_astar(task, cfg.pb_pruning ? pb_pruning(task, cls) : allow_all(),
                       cfg.effective_heuristic(), lim);
    rep.outcome = r.outcome;
    rep.plan = r.plan;
    rep.seconds = r.seconds;
    rep.expansions = {r.expansions};
  }
  if (rep.outcome == Outcome::kSolved) {
    const PlanCheck check = validate_plan(task, rep.plan);
    rep.plan_valid = check.valid;
    rep.cost = check.cost;
  }
  return rep;
}

inline nlohmann::ordered_json report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["instance"] = r.instance;
  j["algorithm"] = r.algorithm;
  j["heuristic"] = r.heuristic;
  j["agents"] = r.agents;
  j["seed"] = r.seed;
  j["outcome"] = r.outcome == Outcome::kRunning ? "error" : outcome_name(r.outcome);
  j["cost"] = r.cost ? nlohmann::ordered_json(*r.cost) : nlohmann::ordered_json(nullptr);
  j["seconds"] = r.seconds;
  j["expansions"] = r.expansions;
  j["total_expansions"] = r.total_expansions();
  j["messages"] = r.messages;
  j["bytes"] = r.bytes;
  j["efficiency"] = r.efficiency ? nlohmann::ordered_json(*r.efficiency) : nlohmann::ordered_json(nullptr);
  j["plan_valid"] = r.plan_valid;
  return j;
}

}  // namespace mafs
