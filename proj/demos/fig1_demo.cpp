// Walks through the two-agent example: classification, the full state
// space against what distributed search actually creates, and the plans
// found by each planner.

#include <iostream>

#include "mafs/oracle.hpp"
#include "mafs/planner.hpp"
#include "mafs/two_agent_example.hpp"

int main() {
  using namespace mafs;
  const Task task = two_agent_example();
  const Classification cls = classify(task);

  for (ActionId a = 0; a < task.num_actions(); ++a)
    std::cout << task.actions[a].name << " (" << task.agents[task.actions[a].owner].name << ") "
              << (cls.action_public[a] ? "public" : "private") << "\n";

  const StateSpace space = explore_state_space(task, 1000);
  SimRunConfig explore;
  explore.agent.explore = true;
  const RunResult forest = run_sim(task, cls, explore);
  std::cout << "reachable states: " << space.states.size() << "\n"
            << "states created by the agents: " << forest.own_states() << "\n";

  for (Algorithm alg : {Algorithm::kAStar, Algorithm::kPPAStar, Algorithm::kMadAStar, Algorithm::kMafs}) {
    PlannerConfig cfg;
    cfg.algorithm = alg;
    const RunReport r = run_planner(task, cls, cfg, "two-agent");
    std::cout << algorithm_name(alg) << ": cost " << (r.cost ? *r.cost : -1) << ", "
              << r.total_expansions() << " expansions, " << r.messages << " messages\n  ";
    for (ActionId a : r.plan) std::cout << task.actions[a].name << " ";
    std::cout << "\n";
  }
}
