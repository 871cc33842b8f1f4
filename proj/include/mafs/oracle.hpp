#pragma once

// Ground truth by explicit-state uniform-cost search. Shares nothing with the
// heuristic search code on purpose.

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "mafs/model.hpp"
#include "mafs/search_core.hpp"

namespace mafs {

enum class OracleStatus { kSolved, kUnsolvable, kTooLarge };

struct OracleResult {
  OracleStatus status = OracleStatus::kUnsolvable;
  Cost cost = kInfiniteCost;
  std::vector<ActionId> plan;
  std::size_t states = 0;
};

inline constexpr std::size_t kDefaultStateLimit = 1'000'000;

inline OracleResult oracle_optimal_cost(const Task& task,
                                        std::size_t state_limit = kDefaultStateLimit) {
  struct Entry {
    Cost g;
    ActionId via;
    std::int64_t parent;
  };
  std::vector<State> states;
  std::vector<Entry> info;
  std::unordered_map<State, std::int64_t, StateHash> index;
  using Item = std::pair<Cost, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;

  index.emplace(task.init, 0);
  states.push_back(task.init);
  info.push_back({0, -1, -1});
  queue.push({0, 0});
  std::vector<bool> done(1, false);

  OracleResult out;
  while (!queue.empty()) {
    auto [g, id] = queue.top();
    queue.pop();
    if (done[id] || g > info[id].g) continue;
    done[id] = true;
    if (goal_holds(task, states[id])) {
      out.status = OracleStatus::kSolved;
      out.cost = g;
      for (std::int64_t at = id; info[at].parent >= 0; at = info[at].parent)
        out.plan.push_back(info[at].via);
      std::reverse(out.plan.begin(), out.plan.end());
      out.states = states.size();
      return out;
    }
    for (ActionId a = 0; a < task.num_actions(); ++a) {
      const Action& act = task.actions[a];
      if (!applicable(act, states[id])) continue;
      State next = states[id];
      apply_in_place(act, next);
      const Cost ng = g + act.cost;
      auto [it, fresh] = index.emplace(std::move(next), static_cast<std::int64_t>(states.size()));
      if (fresh) {
        if (states.size() >= state_limit) {
          out.status = OracleStatus::kTooLarge;
          out.states = states.size();
          return out;
        }
        states.push_back(it->first);
        info.push_back({ng, a, id});
        done.push_back(false);
        queue.push({ng, it->second});
      } else if (ng < info[it->second].g) {
        info[it->second] = {ng, a, id};
        queue.push({ng, it->second});
      }
    }
  }
  out.states = states.size();
  return out;
}

// Explicit reachable state graph with exact remaining cost for every state.
struct StateSpace {
  std::vector<State> states;  // states[0] is the initial state
  std::unordered_map<State, std::size_t, StateHash> index;
  std::vector<std::vector<std::pair<ActionId, std::size_t>>> successors;
  std::vector<Cost> remaining;  // optimal cost to a goal, kInfiniteCost on dead ends
  bool complete = true;         // false when the limit cut exploration short
};

inline StateSpace explore_state_space(const Task& task, std::size_t state_limit) {
  StateSpace sp;
  sp.states.push_back(task.init);
  sp.index.emplace(task.init, 0);
  for (std::size_t i = 0; i < sp.states.size(); ++i) {
    sp.successors.emplace_back();
    for (ActionId a = 0; a < task.num_actions(); ++a) {
      const Action& act = task.actions[a];
      if (!applicable(act, sp.states[i])) continue;
      State next = sp.states[i];
      apply_in_place(act, next);
      auto it = sp.index.find(next);
      if (it == sp.index.end()) {
        if (sp.states.size() >= state_limit) {
          sp.complete = false;
          return sp;
        }
        it = sp.index.emplace(next, sp.states.size()).first;
        sp.states.push_back(std::move(next));
      }
      sp.successors[i].push_back({a, it->second});
    }
  }
  // backward Dijkstra from all goal states
  const std::size_t n = sp.states.size();
  std::vector<std::vector<std::pair<Cost, std::size_t>>> preds(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto [a, j] : sp.successors[i]) preds[j].push_back({task.actions[a].cost, i});
  sp.remaining.assign(n, kInfiniteCost);
  using Item = std::pair<Cost, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (goal_holds(task, sp.states[i])) {
      sp.remaining[i] = 0;
      queue.push({0, i});
    }
  while (!queue.empty()) {
    auto [c, j] = queue.top();
    queue.pop();
    if (c > sp.remaining[j]) continue;
    for (auto [w, i] : preds[j])
      if (c + w < sp.remaining[i]) {
        sp.remaining[i] = c + w;
        queue.push({c + w, i});
      }
  }
  return sp;
}

// Copy of the task with one agent's actions removed (agent roster unchanged).
inline Task without_agent_actions(const Task& task, AgentId agent) {
  Task out = task;
  out.actions.clear();
  for (const auto& a : task.actions)
    if (a.owner != agent) out.actions.push_back(a);
  return out;
}

}  // namespace mafs
