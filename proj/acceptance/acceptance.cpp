// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [LOGISTICS_SAS PARTITION_JSON]
// (or MAFS_LOGISTICS40_SAS / MAFS_LOGISTICS40_PARTITION in the environment).

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mafs/ingest.hpp"
#include "mafs/planner.hpp"
#include "mafs/two_agent_example.hpp"
#include "oracles.hpp"

using namespace mafs;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Instance {
  std::string name;
  Task task;
  Classification cls;
  std::vector<State> states;
  std::optional<Cost> cost;  // independent oracle
};

Instance make(std::string name, Task t, std::vector<State> states) {
  Instance in{std::move(name), std::move(t), {}, std::move(states), std::nullopt};
  in.cls = classify(in.task);
  in.cost = oracle::optimal_cost(in.task, in.states);
  return in;
}

// 50 solvable tasks: three domains, 2-4 agents, unit and random costs, each
// at most 10^5 reachable states.
std::vector<Instance> solvable_suite() {
  std::vector<Instance> out;
  for (std::uint64_t i = 0; out.size() < 50; ++i) {
    GeneratorParams p;
    p.domain = i % 3 == 0 ? "logistics" : i % 3 == 1 ? "random" : "chain";
    p.num_agents = 2 + static_cast<int>(i % 3);
    p.random_costs = (i / 3) % 2 == 1;
    p.packages = 2 + static_cast<int>((i / 3) % 3);
    p.locations = 3 + static_cast<int>((i / 9) % 2);
    p.length = 3 + static_cast<int>((i / 3) % 5);
    p.variables = 4 + static_cast<int>((i / 3) % 4);
    p.actions = 4 + static_cast<int>((i / 3) % 3);
    p.seed = 100 + i;
    Task t = generate_instance(p);
    auto states = oracle::reachable(t, 100'000);
    if (!states) continue;
    out.push_back(make(p.domain + "-" + std::to_string(p.seed), std::move(t), std::move(*states)));
    if (!out.back().cost) throw std::logic_error("generator produced an unsolvable task");
  }
  return out;
}

struct CentralRuns {
  std::vector<SearchResult> astar, ppastar;
};

void optimality(const std::vector<Instance>& suite, CentralRuns& runs) {
  const auto t0 = std::chrono::steady_clock::now();
  int equal = 0;
  std::string first_bad;
  for (const auto& in : suite) {
    SimRunConfig c;
    c.agent.heuristic = HeuristicKind::kMax;
    const RunResult mad = run_sim(in.task, in.cls, c);
    runs.astar.push_back(astar(in.task, HeuristicKind::kMax));
    runs.ppastar.push_back(pp_astar(in.task, pb_pruning(in.task, in.cls), HeuristicKind::kMax));
    const auto& a = runs.astar.back();
    const auto& pp = runs.ppastar.back();
    const bool ok = mad.outcome == Outcome::kSolved && a.outcome == Outcome::kSolved &&
                    pp.outcome == Outcome::kSolved && mad.cost == *in.cost && a.cost == *in.cost &&
                    pp.cost == *in.cost && oracle::plan_reaches_goal(in.task, mad.plan) &&
                    oracle::plan_cost(in.task, mad.plan) == mad.cost;
    equal += ok;
    if (!ok && first_bad.empty())
      first_bad = in.name + " oracle " + std::to_string(*in.cost) + " mad " + std::to_string(mad.cost) +
                  " astar " + std::to_string(a.cost) + " pp " + std::to_string(pp.cost);
  }
  const double secs = since(t0);
  std::ostringstream d;
  d << equal << "/" << suite.size() << " instances with MAD-A* = A* = PP-A*+PB = oracle, " << std::fixed
    << std::setprecision(1) << secs << " s (limit 300 s)";
  if (!first_bad.empty()) d << "; first mismatch " << first_bad;
  report("optimality-equivalence", equal == static_cast<int>(suite.size()) && secs < 300, d.str());
}

void safety_fuzz(const std::vector<Instance>& suite) {
  std::uint64_t violations = 0, fifo = 0, wrong = 0, confirmations = 0, runs = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& in = suite[i * (suite.size() / 10)];
    for (std::uint64_t k = 0; k < 20; ++k) {
      const std::uint64_t seed = 7919 * (i + 1) + k;
      SimRunConfig c;
      c.net = SimConfig{seed, k % 3, k % 3 + 1 + seed % 9};
      c.schedule_seed = seed * 31 + 1;
      c.skip_probability = 0.05 * static_cast<double>(k % 6);
      c.agent.seed = seed;
      c.agent.timing = k % 4 == 3 ? SendTiming::kEager : SendTiming::kLazy;
      const RunResult r = run_sim(in.task, in.cls, c);
      violations += r.safety_violations;
      fifo += r.fifo_violations;
      confirmations += r.confirmations;
      wrong += r.outcome != Outcome::kSolved || r.cost != *in.cost;
      ++runs;
    }
  }
  std::ostringstream d;
  d << runs << " schedules over 10 instances, " << confirmations << " confirmations, " << violations
    << " safety violations, " << fifo << " FIFO violations, " << wrong << " wrong costs";
  report("termination-safety-fuzz", runs == 200 && violations == 0 && fifo == 0 && wrong == 0, d.str());
}

void pb_dominance(const std::vector<Instance>& suite, const CentralRuns& runs) {
  std::size_t le = 0, strict = 0, below_le = 0;
  std::string exceptions;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& a = runs.astar[i];
    const auto& pp = runs.ppastar[i];
    le += pp.expansions <= a.expansions;
    strict += pp.expansions < a.expansions;
    below_le += pp.expansions - pp.top_layer_expansions <= a.expansions - a.top_layer_expansions;
    if (pp.expansions > a.expansions)
      exceptions += " " + suite[i].name + " (" + std::to_string(a.expansions) + " vs " +
                    std::to_string(pp.expansions) + ")";
  }
  const double share = static_cast<double>(strict) / static_cast<double>(suite.size());
  std::ostringstream d;
  d << le << "/" << suite.size() << " with PP-A* <= A* expansions, " << strict << " strictly fewer ("
    << std::fixed << std::setprecision(0) << 100 * share << "%, need >= 30%); below the final f layer "
    << below_le << "/" << suite.size();
  if (!exceptions.empty()) d << "; more expansions on" << exceptions;
  report("pb-dominance", le == suite.size() && share >= 0.30, d.str());
}

void relevance_counts() {
  const Task t = two_agent_example();
  const Classification cls = classify(t);
  const auto all = oracle::reachable(t, 1000);
  SimRunConfig c;
  c.agent.explore = true;
  const RunResult r = run_sim(t, cls, c);
  std::ostringstream d;
  d << "reachable " << all->size() << " (expect 31), created by agents " << r.own_states() << " (expect 16)";
  report("relevance-pruning-count", all->size() == 31 && r.own_states() == 16, d.str());
}

void satisficing(const std::vector<Instance>& suite, std::vector<std::vector<ActionId>>& mafs_plans) {
  int solved = 0, wrong = 0, unsat_ok = 0;
  for (const auto& in : suite) {
    SimRunConfig c;
    c.agent.mode = SearchMode::kSatisficing;
    c.agent.heuristic = HeuristicKind::kFF;
    const RunResult r = run_sim(in.task, in.cls, c);
    const bool valid = r.outcome == Outcome::kSolved && oracle::plan_reaches_goal(in.task, r.plan);
    solved += valid;
    wrong += r.outcome == Outcome::kSolved && !valid;
    mafs_plans.push_back(r.plan);
  }
  for (std::uint64_t i = 0; i < 10; ++i) {
    GeneratorParams p;
    p.domain = i % 3 == 0 ? "logistics" : i % 3 == 1 ? "random" : "chain";
    p.num_agents = 2 + static_cast<int>(i % 3);
    p.solvable = false;
    p.seed = 500 + i;
    const Task t = generate_instance(p);
    if (oracle::optimal_cost(t)) throw std::logic_error("generator produced a solvable task");
    const Classification cls = classify(t);
    SimRunConfig c;
    c.agent.mode = SearchMode::kSatisficing;
    c.agent.heuristic = HeuristicKind::kFF;
    const RunResult r = run_sim(t, cls, c);
    unsat_ok += r.outcome == Outcome::kUnsolvable;
    wrong += r.outcome == Outcome::kSolved;
  }
  std::ostringstream d;
  d << solved << "/" << suite.size() << " solved with valid plans, " << unsat_ok
    << "/10 unsolvable reported, " << wrong << " wrong answers";
  report("satisficing-completeness", solved == static_cast<int>(suite.size()) && unsat_ok == 10 && wrong == 0,
         d.str());
}

void robustness(const std::vector<Instance>& suite) {
  int reachable_ok = 0, reachable_total = 0, unreachable_ok = 0, unreachable_total = 0;
  std::string first_bad;
  for (std::size_t i = 0; i < suite.size() * 4 && (reachable_total < 20 || unreachable_total < 5); ++i) {
    const auto& in = suite[i % suite.size()];
    const int n = in.task.num_agents();
    if (static_cast<int>(i / suite.size()) >= n) continue;
    const AgentId victim = static_cast<AgentId>((i + i / suite.size()) % n);
    const Task rest = without_agent_actions(in.task, victim);
    const auto truth = oracle::optimal_cost(rest, 100'000);
    if (truth ? reachable_total >= 20 : unreachable_total >= 5) continue;
    SimRunConfig c;
    c.agent.robustness = true;
    c.net.seed = 40 + i;
    c.schedule_seed = 40 + i;
    const RunResult clean = run_sim(in.task, in.cls, c);
    c.fail_agent = victim;
    c.fail_at_tick = clean.ticks / 2;
    const RunResult r = run_sim(in.task, in.cls, c);
    bool ok;
    if (truth) {
      ++reachable_total;
      bool excludes = true;
      for (ActionId a : r.plan) excludes &= in.task.actions[a].owner != victim;
      ok = r.outcome == Outcome::kSolved && excludes && oracle::plan_reaches_goal(in.task, r.plan) &&
           r.cost == *truth;
      reachable_ok += ok;
    } else {
      ++unreachable_total;
      ok = r.outcome == Outcome::kUnsolvable;
      unreachable_ok += ok;
    }
    if (!ok && first_bad.empty()) first_bad = in.name + " without agent " + std::to_string(victim);
  }
  std::ostringstream d;
  d << reachable_ok << "/" << reachable_total << " reachable-without-agent cases optimal and agent-free, "
    << unreachable_ok << "/" << unreachable_total << " unreachable cases reported unsolvable";
  if (!first_bad.empty()) d << "; first failure " << first_bad;
  report("robustness-mode",
         reachable_total == 20 && reachable_ok == 20 && unreachable_ok == unreachable_total, d.str());
}

void commutation_and_shape(const std::vector<Instance>& suite, const std::vector<std::vector<ActionId>>& mafs_plans,
                           const CentralRuns& runs) {
  std::uint64_t pairs = 0, broken = 0;
  int checked = 0;
  std::vector<const Instance*> small;
  const Instance fig = make("two-agent", two_agent_example(), *oracle::reachable(two_agent_example(), 1000));
  small.push_back(&fig);
  for (const auto& in : suite)
    if (in.states.size() <= 10'000) small.push_back(&in);
  for (const Instance* in : small) {
    const Task& t = in->task;
    ++checked;
    for (const State& s : in->states)
      for (ActionId a = 0; a < t.num_actions(); ++a) {
        if (!oracle::ok(t.actions[a], s)) continue;
        for (ActionId b = 0; b < t.num_actions(); ++b) {
          if (t.actions[a].owner == t.actions[b].owner) continue;
          if (in->cls.action_public[a] && in->cls.action_public[b]) continue;
          if (!oracle::ok(t.actions[b], s)) continue;
          ++pairs;
          broken += oracle::step(t.actions[b], oracle::step(t.actions[a], s)) !=
                    oracle::step(t.actions[a], oracle::step(t.actions[b], s));
        }
      }
  }
  std::size_t shaped = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    shaped += oracle::same_agent_segments(suite[i].task, suite[i].cls.action_public, mafs_plans[i]);
    shaped += oracle::same_agent_segments(suite[i].task, suite[i].cls.action_public, runs.ppastar[i].plan);
  }
  std::ostringstream d;
  d << pairs << " commuting pairs checked on " << checked << " instances, " << broken << " broken; "
    << shaped << "/" << 2 * suite.size() << " MAFS/PP-A* plans with the restricted shape";
  report("commutation-and-plan-shape", broken == 0 && pairs > 0 && shaped == 2 * suite.size(), d.str());
}

void admissibility(const std::vector<Instance>& suite) {
  std::uint64_t evaluations = 0, over = 0;
  int checked = 0;
  for (const auto& in : suite) {
    if (in.states.size() > 10'000) continue;
    ++checked;
    const auto remaining = oracle::remaining_costs(in.task, in.states);
    for (AgentId k = 0; k < in.task.num_agents(); ++k) {
      Heuristic h(build_heuristic_task(in.task, in.cls, k), HeuristicKind::kMax);
      for (const State& s : in.states) {
        const Cost e = h.evaluate(s).value;
        ++evaluations;
        over += e > remaining.at(s);
      }
    }
  }
  std::ostringstream d;
  d << evaluations << " (state, agent) evaluations on " << checked << " instances, " << over
    << " above the true remaining cost";
  report("hmax-admissibility", over == 0 && checked > 0, d.str());
}

void logistics(int argc, char** argv) {
  std::string sas, part;
  if (argc >= 3) {
    sas = argv[1];
    part = argv[2];
  } else if (const char* s = std::getenv("MAFS_LOGISTICS40_SAS")) {
    sas = s;
    if (const char* p = std::getenv("MAFS_LOGISTICS40_PARTITION")) part = p;
  }
  Task t;
  std::string source;
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  try {
    if (!sas.empty()) {
      if (part.empty()) throw std::runtime_error("a partition file is required with the SAS+ file");
      t = parse_partition(slurp(part), parse_sas(slurp(sas)));
      source = "supplied SAS+ file " + sas;
    } else {
      t = load_task_json(slurp(MAFS_SOURCE_DIR "/demos/logistics4-0.json"));
      source = "bundled hand-grounded encoding (no SAS+ file supplied)";
    }
  } catch (const std::exception& e) {
    report("logistics4-0-cost", false, e.what());
    return;
  }
  const Classification cls = classify(t);
  PlannerConfig cfg;
  cfg.algorithm = Algorithm::kMadAStar;
  cfg.timeout_seconds = 300;
  const RunReport mad = run_planner(t, cls, cfg);
  cfg.algorithm = Algorithm::kAStar;
  const RunReport a = run_planner(t, cls, cfg);
  std::ostringstream d;
  d << source << ", " << t.num_agents() << " agents: MAD-A* " << (mad.cost ? std::to_string(*mad.cost) : "none")
    << ", A* " << (a.cost ? std::to_string(*a.cost) : "none") << " (expect 20)";
  report("logistics4-0-cost", mad.cost == 20 && a.cost == 20 && mad.plan_valid && a.plan_valid, d.str());
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void socket_smoke() {
  const fs::path dir = fs::temp_directory_path() / ("mafs-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  GeneratorParams p;
  p.num_agents = 3;
  p.packages = 2;
  p.seed = 11;
  p.random_costs = true;
  const Task t = generate_instance(p);
  std::ofstream(dir / "task.json") << dump_task_json(t);
  const Classification cls = classify(t);
  PlannerConfig cfg;
  const RunReport sim = run_planner(t, cls, cfg);
  const std::string cli = MAFS_CLI_PATH;
  const int rc = run_command(cli + " plan " + (dir / "task.json").string() +
                             " --algorithm mad-astar --transport tcp --privacy token --timeout 120 -o " +
                             (dir / "tcp.plan").string() + " --report " + (dir / "tcp.json").string() +
                             " >/dev/null 2>" + (dir / "err.txt").string());
  std::optional<Cost> tcp_cost;
  std::uint64_t messages = 0;
  bool valid = false;
  try {
    std::ifstream in(dir / "tcp.json");
    const auto j = nlohmann::json::parse(in);
    if (!j["cost"].is_null()) tcp_cost = j["cost"].get<Cost>();
    messages = j["messages"].get<std::uint64_t>();
    std::ifstream pf(dir / "tcp.plan");
    const auto plan = parse_plan(std::string(std::istreambuf_iterator<char>(pf), {}), t);
    valid = oracle::plan_reaches_goal(t, plan) && tcp_cost && oracle::plan_cost(t, plan) == *tcp_cost;
  } catch (const std::exception&) {
  }
  std::ostringstream d;
  d << "3 serve-agent processes, exit " << rc << ", tcp cost " << (tcp_cost ? std::to_string(*tcp_cost) : "none")
    << ", sim cost " << (sim.cost ? std::to_string(*sim.cost) : "none") << ", " << messages << " messages";
  report("socket-mode-smoke", rc == 0 && valid && tcp_cost && tcp_cost == sim.cost, d.str());
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Instance> suite = solvable_suite();
  std::size_t largest = 0;
  for (const auto& in : suite) largest = std::max(largest, in.states.size());
  std::size_t total = 0;
  for (const auto& in : suite) total += in.states.size();
  std::cout << "suite: " << suite.size() << " instances, " << total << " states in all, largest " << largest
            << std::endl;

  CentralRuns runs;
  std::vector<std::vector<ActionId>> mafs_plans;
  optimality(suite, runs);
  safety_fuzz(suite);
  pb_dominance(suite, runs);
  relevance_counts();
  satisficing(suite, mafs_plans);
  robustness(suite);
  commutation_and_shape(suite, mafs_plans, runs);
  admissibility(suite);
  logistics(argc, argv);
  socket_smoke();

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
            << std::fixed << std::setprecision(1) << since(t0) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
