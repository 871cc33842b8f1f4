#pragma once

// Centralized A* and PP-A*, the variant whose nodes remember the set of
// equally cheap last actions so that a pruning rule depending only on the
// last action stays optimal.

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mafs/heuristics.hpp"
#include "mafs/model.hpp"
#include "mafs/search_core.hpp"

namespace mafs {

inline constexpr ActionId kStartAction = -1;  // virtual action before the first step

struct SearchLimits {
  double timeout_seconds = 60.0;
  std::size_t max_nodes = 20'000'000;
};

struct SearchResult {
  Outcome outcome = Outcome::kUnsolvable;
  std::vector<ActionId> plan;
  Cost cost = 0;
  std::uint64_t expansions = 0;
  std::uint64_t generated = 0;
  std::uint64_t top_layer_expansions = 0;  // expansions at the f value of the last expansion
  Cost top_layer_f = 0;
  double seconds = 0;
};

namespace detail {
class Deadline {
 public:
  explicit Deadline(double seconds)
      : end_(std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double>(seconds))) {}
  bool passed() {
    if ((++calls_ & 1023) != 0) return false;
    return std::chrono::steady_clock::now() > end_;
  }

 private:
  std::chrono::steady_clock::time_point end_;
  std::uint64_t calls_ = 0;
};
}  // namespace detail

inline SearchResult astar(const Task& task, HeuristicKind kind = HeuristicKind::kMax,
                          SearchLimits limits = {}) {
  const auto start = std::chrono::steady_clock::now();
  Heuristic h(full_heuristic_task(task), kind);
  SearchSpace<State, StateHash> space(Policy::kAStar);
  std::vector<std::pair<NodeId, ActionId>> parent;  // by node id
  detail::Deadline deadline(limits.timeout_seconds);
  SearchResult res;
  auto finish = [&](Outcome o) {
    res.outcome = o;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  };

  const Estimate h0 = h.evaluate(task.init);
  if (h0.infinite()) return finish(Outcome::kUnsolvable);
  space.insert(task.init, 0, h0.value);
  parent.push_back({0, kStartAction});

  while (auto id = space.extract_min()) {
    if (deadline.passed()) return finish(Outcome::kTimeout);
    if (space.size() > limits.max_nodes) return finish(Outcome::kMemory);
    space.move_to_closed(*id);
    const NodeInfo info = space.node(*id);
    ++res.expansions;
    if (res.expansions == 1 || info.f() != res.top_layer_f) res.top_layer_expansions = 0;
    res.top_layer_f = info.f();
    ++res.top_layer_expansions;
    if (goal_holds(task, space.key(*id))) {
      for (NodeId at = *id; parent[at].second != kStartAction; at = parent[at].first)
        res.plan.push_back(parent[at].second);
      std::reverse(res.plan.begin(), res.plan.end());
      res.cost = info.g;
      return finish(Outcome::kSolved);
    }
    const State s = space.key(*id);
    for (ActionId a = 0; a < task.num_actions(); ++a) {
      const Action& act = task.actions[a];
      if (!applicable(act, s)) continue;
      State next = s;
      apply_in_place(act, next);
      ++res.generated;
      const Estimate e = h.evaluate(next);
      if (e.infinite()) continue;
      auto [cid, outcome] = space.push(next, add_cost(info.g, act.cost), e.value);
      if (outcome == PushOutcome::kDiscarded) continue;
      if (cid >= parent.size()) parent.resize(cid + 1);
      parent[cid] = {*id, a};
    }
  }
  return finish(Outcome::kUnsolvable);
}

// A pruning rule that looks only at the previous action.
struct PruningMethod {
  std::function<bool(ActionId prev, ActionId next)> allowed_after;
};

inline bool pb_allowed(const Task& task, const Classification& cls, ActionId prev, ActionId next) {
  if (prev == kStartAction) return true;
  if (cls.action_public[prev]) return true;
  return task.actions[prev].owner == task.actions[next].owner;
}

inline PruningMethod pb_pruning(const Task& task, const Classification& cls) {
  return {[&task, &cls](ActionId prev, ActionId next) { return pb_allowed(task, cls, prev, next); }};
}

inline PruningMethod allow_all() {
  return {[](ActionId, ActionId) { return true; }};
}

inline SearchResult pp_astar(const Task& task, const PruningMethod& pruning,
                             HeuristicKind kind = HeuristicKind::kMax, SearchLimits limits = {}) {
  const auto start = std::chrono::steady_clock::now();
  Heuristic h(full_heuristic_task(task), kind);
  SearchSpace<State, StateHash> space(Policy::kAStar);

  // Each way of reaching a node at its current g is a record, so the plan
  // can be read back through the exact last action that allowed each step.
  struct Rec {
    ActionId action;
    std::uint32_t parent;
  };
  std::vector<Rec> records{{kStartAction, 0}};
  struct PPData {
    std::vector<std::pair<ActionId, std::uint32_t>> last;  // A, sorted by action id
    std::vector<ActionId> expanded_with;                    // A at the previous expansion
    bool expanded = false;
  };
  std::vector<PPData> data;
  detail::Deadline deadline(limits.timeout_seconds);
  SearchResult res;
  auto finish = [&](Outcome o) {
    res.outcome = o;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  };
  auto allowed_by = [&](const auto& prevs, ActionId next, auto project) {
    for (const auto& p : prevs)
      if (pruning.allowed_after(project(p), next)) return true;
    return false;
  };
  auto first = [](const std::pair<ActionId, std::uint32_t>& p) { return p.first; };
  auto self = [](ActionId a) { return a; };

  const Estimate h0 = h.evaluate(task.init);
  if (h0.infinite()) return finish(Outcome::kUnsolvable);
  space.insert(task.init, 0, h0.value);
  data.push_back({{{kStartAction, 0}}, {}, false});

  while (auto id = space.extract_min()) {
    if (deadline.passed()) return finish(Outcome::kTimeout);
    if (space.size() > limits.max_nodes) return finish(Outcome::kMemory);
    space.move_to_closed(*id);
    const NodeInfo info = space.node(*id);
    ++res.expansions;
    if (res.expansions == 1 || info.f() != res.top_layer_f) res.top_layer_expansions = 0;
    res.top_layer_f = info.f();
    ++res.top_layer_expansions;
    if (goal_holds(task, space.key(*id))) {
      std::uint32_t earliest = data[*id].last.front().second;
      for (const auto& [b, r] : data[*id].last) earliest = std::min(earliest, r);
      for (std::uint32_t r = earliest; records[r].action != kStartAction;
           r = records[r].parent)
        res.plan.push_back(records[r].action);
      std::reverse(res.plan.begin(), res.plan.end());
      res.cost = info.g;
      return finish(Outcome::kSolved);
    }
    const State s = space.key(*id);
    const PPData node = data[*id];  // copy: data may grow below
    for (ActionId a = 0; a < task.num_actions(); ++a) {
      const Action& act = task.actions[a];
      if (!applicable(act, s)) continue;
      if (!allowed_by(node.last, a, first)) continue;
      if (node.expanded && allowed_by(node.expanded_with, a, self)) continue;  // done before
      // parent record: the earliest arrival whose last action allows `a`
      std::uint32_t via = std::numeric_limits<std::uint32_t>::max();
      for (const auto& [b, r] : node.last)
        if (r < via && pruning.allowed_after(b, a)) via = r;
      State next = s;
      apply_in_place(act, next);
      ++res.generated;
      const Cost g = add_cost(info.g, act.cost);
      auto known = space.lookup(next);
      if (!known) {
        const Estimate e = h.evaluate(next);
        if (e.infinite()) continue;
        records.push_back({a, via});
        const NodeId cid = space.insert(next, g, e.value);
        if (cid >= data.size()) data.resize(cid + 1);
        data[cid] = {{{a, static_cast<std::uint32_t>(records.size() - 1)}}, {}, false};
        continue;
      }
      const NodeId cid = *known;
      const NodeInfo& c = space.node(cid);
      if (g < c.g) {
        records.push_back({a, via});
        data[cid] = {{{a, static_cast<std::uint32_t>(records.size() - 1)}}, {}, false};
        space.set_open(cid, g, c.h);
      } else if (g == c.g) {
        auto& d = data[cid];
        auto pos = std::lower_bound(d.last.begin(), d.last.end(), a,
                                    [](const auto& p, ActionId x) { return p.first < x; });
        if (pos != d.last.end() && pos->first == a) continue;
        records.push_back({a, via});
        d.last.insert(pos, {a, static_cast<std::uint32_t>(records.size() - 1)});
        if (c.status != NodeStatus::kClosed) continue;
        // reopen only if the new last action unlocks something
        bool unlocks = false;
        for (ActionId x = 0; x < task.num_actions() && !unlocks; ++x)
          unlocks = pruning.allowed_after(a, x) && !allowed_by(d.expanded_with, x, self);
        if (unlocks) space.set_open(cid, c.g, c.h);
      }
    }
    auto& d = data[*id];
    d.expanded = true;
    d.expanded_with.clear();
    for (const auto& p : node.last) d.expanded_with.push_back(p.first);
  }
  return finish(Outcome::kUnsolvable);
}

}  // namespace mafs
