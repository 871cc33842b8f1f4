#pragma once

// Grounded multi-valued planning tasks, agent ownership of actions, and the
// private/public split that every distributed algorithm in this library
// relies on.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mafs {

using Cost = std::int64_t;
using VarId = std::int32_t;
using Value = std::int32_t;
using ActionId = std::int32_t;
using AgentId = std::int32_t;

/// Sentinel for "unreachable". Saturating arithmetic keeps it absorbing.
inline constexpr Cost kInfiniteCost = std::numeric_limits<Cost>::max() / 4;

inline Cost add_cost(Cost a, Cost b) {
  if (a >= kInfiniteCost || b >= kInfiniteCost) return kInfiniteCost;
  return std::min(a + b, kInfiniteCost);
}

struct Fact {
  VarId var = 0;
  Value val = 0;
  auto operator<=>(const Fact&) const = default;
};

struct Variable {
  std::string name;
  std::vector<std::string> values;  // one label per value; size == domain size
  int domain_size() const { return static_cast<int>(values.size()); }
};

struct Action {
  std::string name;
  AgentId owner = 0;
  std::vector<Fact> pre;
  std::vector<Fact> eff;
  Cost cost = 1;
  bool operator==(const Action&) const = default;
};

struct AgentInfo {
  std::string name;
  std::optional<std::string> address;  // host:port, socket deployments only
  bool operator==(const AgentInfo&) const = default;
};

using State = std::vector<Value>;

struct Task {
  std::vector<Variable> variables;
  State init;
  std::vector<Fact> goal;
  std::vector<Action> actions;
  std::vector<AgentInfo> agents;

  int num_vars() const { return static_cast<int>(variables.size()); }
  int num_agents() const { return static_cast<int>(agents.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }
};

inline bool operator==(const Variable& a, const Variable& b) {
  return a.name == b.name && a.values == b.values;
}
inline bool operator==(const Task& a, const Task& b) {
  return a.variables == b.variables && a.init == b.init && a.goal == b.goal &&
         a.actions == b.actions && a.agents == b.agents;
}

class TaskError : public std::runtime_error {
 public:
  explicit TaskError(const std::string& what, std::optional<ActionId> action = std::nullopt)
      : std::runtime_error(what), action_(action) {}
  std::optional<ActionId> action() const { return action_; }

 private:
  std::optional<ActionId> action_;
};

namespace detail {
inline bool has_duplicate_vars(const std::vector<Fact>& facts) {
  std::set<VarId> seen;
  for (const auto& f : facts)
    if (!seen.insert(f.var).second) return true;
  return false;
}
}  // namespace detail

/// Throws TaskError describing the first structural problem found.
inline void validate_task(const Task& task) {
  const int n = task.num_vars();
  auto check_fact = [&](const Fact& f, const std::string& where, std::optional<ActionId> a) {
    if (f.var < 0 || f.var >= n)
      throw TaskError(where + ": variable " + std::to_string(f.var) + " out of range", a);
    if (f.val < 0 || f.val >= task.variables[f.var].domain_size())
      throw TaskError(where + ": value " + std::to_string(f.val) + " out of range for variable " +
                          std::to_string(f.var),
                      a);
  };
  for (int v = 0; v < n; ++v)
    if (task.variables[v].domain_size() < 1)
      throw TaskError("variable " + std::to_string(v) + " has an empty domain");
  if (static_cast<int>(task.init.size()) != n)
    throw TaskError("initial state assigns " + std::to_string(task.init.size()) + " of " +
                    std::to_string(n) + " variables");
  for (int v = 0; v < n; ++v) check_fact({v, task.init[v]}, "init", std::nullopt);
  for (const auto& g : task.goal) check_fact(g, "goal", std::nullopt);
  if (detail::has_duplicate_vars(task.goal)) throw TaskError("goal mentions a variable twice");
  if (task.agents.empty()) throw TaskError("task has no agents");
  for (ActionId a = 0; a < task.num_actions(); ++a) {
    const auto& act = task.actions[a];
    const std::string where = "action " + std::to_string(a) + " (" + act.name + ")";
    if (act.owner < 0 || act.owner >= task.num_agents())
      throw TaskError(where + ": owner " + std::to_string(act.owner) + " is not an agent", a);
    if (act.cost < 0) throw TaskError(where + ": negative cost", a);
    if (detail::has_duplicate_vars(act.pre))
      throw TaskError(where + ": duplicate precondition variable", a);
    if (detail::has_duplicate_vars(act.eff))
      throw TaskError(where + ": duplicate effect variable", a);
    for (const auto& f : act.pre) check_fact(f, where, a);
    for (const auto& f : act.eff) check_fact(f, where, a);
  }
}

inline bool holds(std::span<const Fact> facts, std::span<const Value> state) {
  return std::all_of(facts.begin(), facts.end(),
                     [&](const Fact& f) { return state[f.var] == f.val; });
}

inline bool applicable(const Action& action, std::span<const Value> state) {
  return holds(action.pre, state);
}

inline bool goal_holds(const Task& task, std::span<const Value> state) {
  return holds(task.goal, state);
}

/// Overwrites effect variables in place; no applicability check.
inline void apply_in_place(const Action& action, std::span<Value> state) {
  for (const auto& f : action.eff) state[f.var] = f.val;
}

inline State apply(const Action& action, State state) {
  if (!applicable(action, state))
    throw std::logic_error("apply: action '" + action.name + "' is not applicable");
  apply_in_place(action, state);
  return state;
}

// --------------------------------------------------------------------------
// Classification

inline constexpr AgentId kPublic = -1;

struct Classification {
  /// fact_owner[var][val]: kPublic or the single agent that touches it.
  std::vector<std::vector<AgentId>> fact_owner;
  std::vector<bool> action_public;
  /// kPublic unless every value of the variable is private to one agent.
  std::vector<AgentId> var_owner;
  /// Facts no action touches; they are classified public. Goal facts among
  /// them are the interesting case and are reported separately.
  std::vector<Fact> untouched_facts;
  std::vector<Fact> goal_only_facts;
  /// Public projection of each public action (nullopt for private ones).
  std::vector<std::optional<Action>> projections;

  bool is_public(Fact f) const { return fact_owner[f.var][f.val] == kPublic; }
  bool is_public_action(ActionId a) const { return action_public[a]; }

  std::vector<VarId> private_vars(AgentId agent) const {
    std::vector<VarId> out;
    for (VarId v = 0; v < static_cast<VarId>(var_owner.size()); ++v)
      if (var_owner[v] == agent) out.push_back(v);
    return out;
  }
  std::vector<VarId> public_vars() const { return private_vars(kPublic); }

  /// Projected public actions of every agent other than `agent`.
  std::vector<ActionId> public_interface(const Task& task, AgentId agent) const {
    std::vector<ActionId> out;
    for (ActionId a = 0; a < task.num_actions(); ++a)
      if (action_public[a] && task.actions[a].owner != agent) out.push_back(a);
    return out;
  }
};

namespace detail {
// Facts an action requires, achieves, or destroys. Destroying means the
// action assigns a different value to the fact's variable.
template <typename Fn>
void for_each_touched_fact(const Task& task, const Action& act, Fn&& fn) {
  for (const auto& f : act.pre) fn(f);
  for (const auto& f : act.eff) {
    const int dom = task.variables[f.var].domain_size();
    for (Value x = 0; x < dom; ++x) fn(Fact{f.var, x});
  }
}
}  // namespace detail

namespace detail {
inline Action project_onto_public(const Action& action, const Classification& cls) {
  auto keep_public = [&](const std::vector<Fact>& in) {
    std::vector<Fact> out;
    for (const auto& f : in)
      if (cls.is_public(f)) out.push_back(f);
    return out;
  };
  Action out = action;
  out.pre = keep_public(action.pre);
  out.eff = keep_public(action.eff);
  return out;
}
}  // namespace detail

/// Copy of a public action with its private preconditions and effects removed.
inline Action public_projection(const Task& task, ActionId id, const Classification& cls) {
  if (!cls.action_public.at(id))
    throw TaskError("public_projection: action '" + task.actions.at(id).name + "' is private", id);
  return detail::project_onto_public(task.actions[id], cls);
}

inline Classification classify(const Task& task) {
  validate_task(task);
  const int n = task.num_vars();
  Classification cls;
  // touch[var][val] = set of agents requiring, achieving or destroying the fact
  std::vector<std::vector<std::set<AgentId>>> touch(n);
  for (int v = 0; v < n; ++v) touch[v].resize(task.variables[v].domain_size());
  for (const auto& act : task.actions)
    detail::for_each_touched_fact(task, act,
                                  [&](Fact f) { touch[f.var][f.val].insert(act.owner); });

  std::set<Fact> goal_facts(task.goal.begin(), task.goal.end());
  cls.fact_owner.resize(n);
  for (int v = 0; v < n; ++v) {
    const int dom = task.variables[v].domain_size();
    cls.fact_owner[v].assign(dom, kPublic);
    for (Value x = 0; x < dom; ++x) {
      const auto& who = touch[v][x];
      const bool in_goal = goal_facts.count({v, x}) > 0;
      if (who.empty()) {
        cls.untouched_facts.push_back({v, x});
        if (in_goal) cls.goal_only_facts.push_back({v, x});
      } else if (who.size() == 1 && !in_goal) {
        cls.fact_owner[v][x] = *who.begin();
      }
    }
  }

  cls.var_owner.assign(n, kPublic);
  for (int v = 0; v < n; ++v) {
    const auto& owners = cls.fact_owner[v];
    if (!owners.empty() && owners[0] != kPublic &&
        std::all_of(owners.begin(), owners.end(), [&](AgentId o) { return o == owners[0]; }))
      cls.var_owner[v] = owners[0];
  }

  cls.action_public.assign(task.num_actions(), false);
  cls.projections.assign(task.num_actions(), std::nullopt);
  for (ActionId a = 0; a < task.num_actions(); ++a) {
    bool pub = false;
    detail::for_each_touched_fact(task, task.actions[a], [&](Fact f) {
      if (cls.fact_owner[f.var][f.val] == kPublic) pub = true;
    });
    cls.action_public[a] = pub;
  }
  for (ActionId a = 0; a < task.num_actions(); ++a)
    if (cls.action_public[a]) cls.projections[a] = detail::project_onto_public(task.actions[a], cls);
  return cls;
}

}  // namespace mafs
