#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mafs/model.hpp"

namespace mafs {

struct PlanCheck {
  bool valid = false;
  Cost cost = 0;
  std::optional<std::size_t> failed_step;  // nullopt with !valid: goal not reached
  std::string reason;
};

inline PlanCheck validate_plan(const Task& task, const std::vector<ActionId>& plan) {
  PlanCheck out;
  State s = task.init;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const ActionId a = plan[i];
    if (a < 0 || a >= task.num_actions()) {
      out.failed_step = i;
      out.reason = "unknown action id " + std::to_string(a);
      return out;
    }
    const Action& act = task.actions[a];
    for (const auto& f : act.pre) {
      if (s[f.var] != f.val) {
        out.failed_step = i;
        out.reason = "'" + act.name + "' needs " + task.variables[f.var].name + "=" +
                     std::to_string(f.val) + " but it is " + std::to_string(s[f.var]);
        return out;
      }
    }
    apply_in_place(act, s);
    out.cost += act.cost;
  }
  for (const auto& g : task.goal) {
    if (s[g.var] != g.val) {
      out.reason = "goal " + task.variables[g.var].name + "=" + std::to_string(g.val) +
                   " does not hold at the end";
      return out;
    }
  }
  out.valid = true;
  return out;
}

// Between two consecutive public actions (and before the first / after the
// last) every action belongs to a single agent.
inline bool has_restricted_shape(const Task& task, const std::vector<bool>& action_public,
                                 const std::vector<ActionId>& plan) {
  std::optional<AgentId> segment_owner;
  for (ActionId a : plan) {
    const AgentId owner = task.actions[a].owner;
    if (segment_owner && *segment_owner != owner) return false;
    segment_owner = owner;
    if (action_public[a]) segment_owner.reset();
  }
  return true;
}

}  // namespace mafs
