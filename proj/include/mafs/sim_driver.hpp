#pragma once

// Runs all agents of a task in one process on the simulated network, with a
// seeded scheduler, optional crash injection, and a global observer that
// checks every confirmed solution against the true system state.

#include <chrono>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <unistd.h>
#include <vector>

#include "mafs/agent.hpp"
#include "mafs/ingest.hpp"
#include "mafs/transport.hpp"

namespace mafs {

struct SimRunConfig {
  AgentConfig agent;
  SimConfig net;
  std::uint64_t schedule_seed = 1;
  double skip_probability = 0.0;  // chance an agent sits out a tick
  std::uint64_t max_ticks = 50'000'000;
  double timeout_seconds = 60.0;
  std::size_t memory_limit_bytes = std::size_t{1} << 30;
  std::optional<AgentId> fail_agent;
  std::uint64_t fail_at_tick = 0;
};

struct RunResult {
  Outcome outcome = Outcome::kRunning;
  std::vector<ActionId> plan;
  Cost cost = 0;
  std::vector<AgentStats> agents;
  std::vector<TransportStats> transport;
  std::uint64_t ticks = 0;
  double seconds = 0;
  std::uint64_t confirmations = 0;
  std::uint64_t safety_violations = 0;  // confirmations while something cheaper was alive
  std::uint64_t fifo_violations = 0;

  std::uint64_t total_expansions() const {
    std::uint64_t s = 0;
    for (const auto& a : agents) s += a.expansions;
    return s;
  }
  std::uint64_t total_messages() const {
    std::uint64_t s = 0;
    for (const auto& t : transport) s += t.messages_sent;
    return s;
  }
  std::uint64_t total_bytes() const {
    std::uint64_t s = 0;
    for (const auto& t : transport) s += t.bytes_sent;
    return s;
  }
  std::uint64_t own_states() const {
    std::uint64_t s = 0;
    for (const auto& a : agents) s += a.own_states;
    return s;
  }
};

inline std::size_t resident_bytes() {
  std::ifstream in("/proc/self/statm");
  std::size_t pages_total = 0, pages_resident = 0;
  if (!(in >> pages_total >> pages_resident)) return 0;
  return pages_resident * static_cast<std::size_t>(sysconf(_SC_PAGESIZE));
}

inline RunResult run_sim(const Task& task, const Classification& cls, const SimRunConfig& cfg) {
  const int n = task.num_agents();
  SimRouter router(n, cfg.net);
  std::vector<std::unique_ptr<SimEndpoint>> endpoints;
  std::vector<std::unique_ptr<Agent>> agents;
  for (AgentId k = 0; k < n; ++k) {
    endpoints.push_back(std::make_unique<SimEndpoint>(router, k));
    AgentConfig ac = cfg.agent;
    ac.seed = cfg.agent.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k);
    agents.push_back(std::make_unique<Agent>(task, cls, k, *endpoints.back(), ac));
  }
  std::vector<bool> alive(n, true);
  std::uint64_t failed_mask = 0;

  RunResult res;
  auto observe = [&](AgentId, const Candidate& c) {
    ++res.confirmations;
    Cost truth = kInfiniteCost;
    for (AgentId k = 0; k < n; ++k)
      if (alive[k]) truth = std::min(truth, agents[k]->open_min_f());
    router.for_each_in_flight([&](AgentId from, AgentId to, const Message& m) {
      if (!alive[from] || !alive[to]) return;
      if (auto* s = std::get_if<StateMsg>(&m.body)) {
        if (cfg.agent.robustness && (s->participants & failed_mask)) return;
        truth = std::min(truth, add_cost(s->g, s->h));
      }
    });
    if (truth < c.cost) ++res.safety_violations;
  };
  if (cfg.agent.mode == SearchMode::kOptimal)
    for (auto& a : agents) a->set_confirm_hook(observe);

  std::mt19937_64 sched(cfg.schedule_seed);
  std::vector<AgentId> order(n);
  for (AgentId k = 0; k < n; ++k) order[k] = k;
  const auto start = std::chrono::steady_clock::now();
  int quiet_ticks = 0;
  std::optional<AgentId> done_by;

  for (std::uint64_t tick = 0; tick < cfg.max_ticks && !done_by; ++tick) {
    if (cfg.fail_agent && tick == cfg.fail_at_tick && alive[*cfg.fail_agent]) {
      const AgentId f = *cfg.fail_agent;
      alive[f] = false;
      failed_mask |= std::uint64_t{1} << f;
      router.purge(f);
      for (AgentId k = 0; k < n; ++k)
        if (alive[k]) agents[k]->handle_failure(f);
    }
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[detail::uniform(sched, 0, static_cast<std::uint64_t>(i))]);
    bool active = false;
    for (AgentId k : order) {
      if (!alive[k]) continue;
      if (cfg.skip_probability > 0 &&
          static_cast<double>(sched() >> 11) * 0x1.0p-53 < cfg.skip_probability) {
        active = true;  // a skipped agent may still have work
        continue;
      }
      if (agents[k]->step()) active = true;
      if (agents[k]->finished()) {
        done_by = k;
        break;
      }
    }
    router.advance();
    res.ticks = tick + 1;
    if (!active && router.in_flight() == 0) {
      if (++quiet_ticks > 2) throw std::logic_error("simulation stalled without an outcome");
    } else {
      quiet_ticks = 0;
    }
    if ((tick & 255) == 0) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (secs > cfg.timeout_seconds) {
        res.outcome = Outcome::kTimeout;
        break;
      }
      if ((tick & 4095) == 0 && resident_bytes() > cfg.memory_limit_bytes) {
        res.outcome = Outcome::kMemory;
        break;
      }
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (done_by) {
    res.outcome = agents[*done_by]->outcome();
    res.plan = agents[*done_by]->plan();
    for (ActionId a : res.plan) res.cost += task.actions[a].cost;
  } else if (res.outcome == Outcome::kRunning) {
    res.outcome = Outcome::kTimeout;
  }
  for (AgentId k = 0; k < n; ++k) {
    res.agents.push_back(agents[k]->stats());
    res.transport.push_back(endpoints[k]->stats());
  }
  res.fifo_violations = router.fifo_violations();
  return res;
}

}  // namespace mafs
