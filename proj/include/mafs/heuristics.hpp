#pragma once

// Delete-relaxation heuristics evaluated over an agent's view of the task:
// its own variables and actions plus the public projections of everyone else.

#include <algorithm>
#include <memory>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mafs/model.hpp"

namespace mafs {

struct HeuristicTask {
  AgentId owner = kPublic;  // kPublic: the unprojected full task
  std::vector<VarId> vars;  // full-task variable ids, ascending
  std::vector<bool> has_var;
  std::vector<int> domain;  // by full variable id, 0 when absent
  std::vector<Action> actions;
  std::vector<ActionId> source;  // full-task id each local action came from
  std::vector<Fact> goal;
};

inline HeuristicTask full_heuristic_task(const Task& task) {
  HeuristicTask h;
  for (VarId v = 0; v < task.num_vars(); ++v) {
    h.vars.push_back(v);
    h.domain.push_back(task.variables[v].domain_size());
  }
  h.has_var.assign(task.num_vars(), true);
  h.actions = task.actions;
  for (ActionId a = 0; a < task.num_actions(); ++a) h.source.push_back(a);
  h.goal = task.goal;
  return h;
}

inline HeuristicTask build_heuristic_task(const Task& task, const Classification& cls,
                                          AgentId agent) {
  HeuristicTask h;
  h.owner = agent;
  h.has_var.assign(task.num_vars(), false);
  h.domain.assign(task.num_vars(), 0);
  for (VarId v = 0; v < task.num_vars(); ++v) {
    if (cls.var_owner[v] == kPublic || cls.var_owner[v] == agent) {
      h.vars.push_back(v);
      h.has_var[v] = true;
      h.domain[v] = task.variables[v].domain_size();
    }
  }
  auto restrict = [&](const std::vector<Fact>& facts) {
    std::vector<Fact> out;
    for (const auto& f : facts)
      if (h.has_var[f.var]) out.push_back(f);
    return out;
  };
  for (ActionId a = 0; a < task.num_actions(); ++a) {
    const Action& act = task.actions[a];
    if (act.owner == agent) {
      // own private facts can sit on a mixed (public) variable; keep them
      Action copy = act;
      copy.pre = restrict(act.pre);
      copy.eff = restrict(act.eff);
      h.actions.push_back(std::move(copy));
    } else if (cls.action_public[a]) {
      Action proj = *cls.projections[a];
      proj.pre = restrict(proj.pre);
      proj.eff = restrict(proj.eff);
      h.actions.push_back(std::move(proj));
    } else {
      continue;
    }
    h.source.push_back(a);
  }
  h.goal = restrict(task.goal);
  return h;
}

struct Estimate {
  Cost value = 0;
  bool admissible = false;
  bool infinite() const { return value >= kInfiniteCost; }
  bool operator==(const Estimate&) const = default;
};

enum class HeuristicKind { kMax, kAdd, kFF, kGoalCount, kBlind };

inline HeuristicKind parse_heuristic_kind(std::string_view name) {
  if (name == "hmax") return HeuristicKind::kMax;
  if (name == "hadd") return HeuristicKind::kAdd;
  if (name == "ff") return HeuristicKind::kFF;
  if (name == "goalcount") return HeuristicKind::kGoalCount;
  if (name == "blind") return HeuristicKind::kBlind;
  throw std::invalid_argument("unknown heuristic '" + std::string(name) + "'");
}

inline const char* heuristic_name(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::kMax: return "hmax";
    case HeuristicKind::kAdd: return "hadd";
    case HeuristicKind::kFF: return "ff";
    case HeuristicKind::kGoalCount: return "goalcount";
    case HeuristicKind::kBlind: return "blind";
  }
  return "?";
}

inline bool is_admissible(HeuristicKind k) {
  return k == HeuristicKind::kMax || k == HeuristicKind::kBlind;
}

// Relaxed exploration over facts. Evaluators are stateful scratch space and
// must not be shared between agents.
class RelaxedExplorer {
 public:
  explicit RelaxedExplorer(const HeuristicTask& htask) : htask_(htask) {
    const int n = static_cast<int>(htask.domain.size());
    offset_.assign(n + 1, 0);
    for (int v = 0; v < n; ++v) offset_[v + 1] = offset_[v] + htask.domain[v];
    precondition_of_.resize(offset_[n]);
    for (int a = 0; a < static_cast<int>(htask.actions.size()); ++a) {
      const auto& act = htask.actions[a];
      if (act.pre.empty()) no_pre_.push_back(a);
      for (const auto& f : act.pre) precondition_of_[fact_index(f)].push_back(a);
    }
    fact_cost_.resize(offset_[n]);
    supporter_.resize(offset_[n]);
    settled_.resize(offset_[n]);
    unsatisfied_.resize(htask.actions.size());
    pre_cost_.resize(htask.actions.size());
    blind_cost_ = kInfiniteCost;
    for (const auto& act : htask.actions) blind_cost_ = std::min(blind_cost_, act.cost);
    if (htask.actions.empty()) blind_cost_ = 0;
  }

  int fact_index(Fact f) const { return offset_[f.var] + f.val; }

  // Runs generalized Dijkstra; `additive` selects sum vs max aggregation.
  void explore(std::span<const Value> state, bool additive) {
    std::fill(fact_cost_.begin(), fact_cost_.end(), kInfiniteCost);
    std::fill(supporter_.begin(), supporter_.end(), -1);
    std::fill(settled_.begin(), settled_.end(), false);
    for (std::size_t a = 0; a < htask_.actions.size(); ++a) {
      unsatisfied_[a] = static_cast<int>(htask_.actions[a].pre.size());
      pre_cost_[a] = 0;
    }
    using Item = std::pair<Cost, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (VarId v : htask_.vars) {
      const int idx = fact_index({v, state[v]});
      fact_cost_[idx] = 0;
      queue.push({0, idx});
    }
    auto fire = [&](int a) {
      const Action& act = htask_.actions[a];
      const Cost c = add_cost(pre_cost_[a], act.cost);
      for (const auto& f : act.eff) {
        const int q = fact_index(f);
        if (settled_[q]) continue;
        if (c < fact_cost_[q] || (c == fact_cost_[q] && supporter_[q] > a)) {
          if (c < fact_cost_[q]) queue.push({c, q});
          fact_cost_[q] = c;
          supporter_[q] = a;
        }
      }
    };
    for (int a : no_pre_) fire(a);
    while (!queue.empty()) {
      auto [c, p] = queue.top();
      queue.pop();
      if (settled_[p] || c > fact_cost_[p]) continue;
      settled_[p] = true;
      for (int a : precondition_of_[p]) {
        pre_cost_[a] = additive ? add_cost(pre_cost_[a], c) : std::max(pre_cost_[a], c);
        if (--unsatisfied_[a] == 0) fire(a);
      }
    }
  }

  Cost fact_cost(Fact f) const { return fact_cost_[fact_index(f)]; }

  Cost goal_cost(bool additive) const {
    Cost total = 0;
    for (const auto& g : htask_.goal) {
      const Cost c = fact_cost(g);
      total = additive ? add_cost(total, c) : std::max(total, c);
    }
    return total;
  }

  // Relaxed plan from the best supporters of the last additive exploration.
  Cost relaxed_plan_cost() {
    std::vector<bool> marked(htask_.actions.size(), false);
    std::vector<bool> visited(fact_cost_.size(), false);
    std::vector<int> stack;
    for (const auto& g : htask_.goal) stack.push_back(fact_index(g));
    Cost total = 0;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      if (visited[p]) continue;
      visited[p] = true;
      if (fact_cost_[p] >= kInfiniteCost) return kInfiniteCost;
      const int a = supporter_[p];
      if (a < 0 || marked[a]) continue;  // initial fact or already counted
      marked[a] = true;
      total = add_cost(total, htask_.actions[a].cost);
      for (const auto& f : htask_.actions[a].pre) stack.push_back(fact_index(f));
    }
    return total;
  }

  Cost blind_cost() const { return blind_cost_; }

 private:
  const HeuristicTask& htask_;
  std::vector<int> offset_;
  std::vector<std::vector<int>> precondition_of_;
  std::vector<int> no_pre_;
  std::vector<Cost> fact_cost_;
  std::vector<int> supporter_;
  std::vector<bool> settled_;
  std::vector<int> unsatisfied_;
  std::vector<Cost> pre_cost_;
  Cost blind_cost_;
};

class Heuristic {
 public:
  Heuristic(HeuristicTask htask, HeuristicKind kind)
      : htask_(std::make_unique<HeuristicTask>(std::move(htask))),
        kind_(kind),
        explorer_(*htask_) {}

  HeuristicKind kind() const { return kind_; }
  bool admissible() const { return is_admissible(kind_); }
  const HeuristicTask& task() const { return *htask_; }

  // `state` is indexed by full-task variable; slots outside the agent's view
  // are never read.
  Estimate evaluate(std::span<const Value> state) {
    const bool adm = admissible();
    if (holds(htask_->goal, state)) return {0, adm};
    const bool additive = kind_ != HeuristicKind::kMax;
    explorer_.explore(state, additive);
    const Cost reach = explorer_.goal_cost(additive);
    if (reach >= kInfiniteCost) return {kInfiniteCost, adm};
    switch (kind_) {
      case HeuristicKind::kMax:
      case HeuristicKind::kAdd:
        return {reach, adm};
      case HeuristicKind::kFF:
        return {explorer_.relaxed_plan_cost(), adm};
      case HeuristicKind::kGoalCount: {
        Cost unmet = 0;
        for (const auto& g : htask_->goal)
          if (state[g.var] != g.val) ++unmet;
        return {unmet, adm};
      }
      case HeuristicKind::kBlind:
        return {explorer_.blind_cost(), adm};
    }
    return {0, false};
  }

 private:
  std::unique_ptr<HeuristicTask> htask_;  // explorer_ holds a reference into it
  HeuristicKind kind_;
  RelaxedExplorer explorer_;
};

inline Estimate h_max(const HeuristicTask& t, std::span<const Value> s) {
  return Heuristic(t, HeuristicKind::kMax).evaluate(s);
}
inline Estimate h_add(const HeuristicTask& t, std::span<const Value> s) {
  return Heuristic(t, HeuristicKind::kAdd).evaluate(s);
}
inline Estimate h_ff(const HeuristicTask& t, std::span<const Value> s) {
  return Heuristic(t, HeuristicKind::kFF).evaluate(s);
}
inline Estimate h_goalcount(const HeuristicTask& t, std::span<const Value> s) {
  return Heuristic(t, HeuristicKind::kGoalCount).evaluate(s);
}
inline Estimate h_blind(const HeuristicTask& t, std::span<const Value> s) {
  return Heuristic(t, HeuristicKind::kBlind).evaluate(s);
}

enum class CombinePolicy { kMax, kLocalOnly, kReceivedOnly };

inline Estimate combine_received(Estimate local, Estimate received,
                                 CombinePolicy policy = CombinePolicy::kMax) {
  const bool adm = local.admissible && received.admissible;
  if (adm) return {std::max(local.value, received.value), true};
  switch (policy) {
    case CombinePolicy::kLocalOnly: return {local.value, false};
    case CombinePolicy::kReceivedOnly: return {received.value, false};
    case CombinePolicy::kMax: break;
  }
  return {std::max(local.value, received.value), false};
}

inline Cost pathmax(Cost parent_f, Cost child_g, Cost child_h) {
  if (child_h >= kInfiniteCost || parent_f >= kInfiniteCost) return kInfiniteCost;
  return std::max(child_h, parent_f - child_g);
}

}  // namespace mafs
