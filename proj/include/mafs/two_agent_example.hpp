#pragma once

// The small two-agent task used to illustrate relevance pruning: agent 1
// counts v1 and v2 up to 2 and then flips the shared v4, agent 2 counts v3
// up to 2 and finishes v4.

#include "mafs/model.hpp"

namespace mafs {

inline Task two_agent_example() {
  Task t;
  for (const char* name : {"v1", "v2", "v3"}) t.variables.push_back({name, {"0", "1", "2"}});
  t.variables.push_back({"v4", {"0", "1", "2"}});
  t.init = {0, 0, 0, 0};
  t.goal = {{3, 2}};
  t.agents = {{"agent1", std::nullopt}, {"agent2", std::nullopt}};
  t.actions = {
      {"a1", 0, {{0, 0}}, {{0, 1}}, 1},
      {"a2", 0, {{0, 1}}, {{0, 2}}, 1},
      {"a3", 0, {{1, 0}}, {{1, 1}}, 1},
      {"a4", 0, {{1, 1}}, {{1, 2}}, 1},
      {"a5", 0, {{0, 2}, {1, 2}, {3, 0}}, {{3, 1}}, 1},
      {"a6", 1, {{2, 0}}, {{2, 1}}, 1},
      {"a7", 1, {{2, 1}}, {{2, 2}}, 1},
      {"a8", 1, {{2, 2}, {3, 1}}, {{3, 2}}, 1},
  };
  return t;
}

}  // namespace mafs
