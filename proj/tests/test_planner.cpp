#include <gtest/gtest.h>

#include <deque>

#include "mafs/oracle.hpp"
#include "mafs/planner.hpp"
#include "mafs/two_agent_example.hpp"
#include "oracles.hpp"

using namespace mafs;

namespace {

// Endpoint for agent 0 of a two-agent task whose peer is driven by hand.
class FakeEndpoint : public Endpoint {
 public:
  AgentId id() const override { return 0; }
  int num_agents() const override { return 2; }
  void send(AgentId dest, const Message& m) override { sent.push_back({dest, m}); }
  std::vector<Message> poll() override {
    std::vector<Message> out(inbox.begin(), inbox.end());
    inbox.clear();
    return out;
  }
  template <typename T>
  std::vector<T> sent_of() const {
    std::vector<T> out;
    for (const auto& [d, m] : sent)
      if (auto* p = std::get_if<T>(&m.body)) out.push_back(*p);
    return out;
  }

  std::deque<Message> inbox;
  std::vector<std::pair<AgentId, Message>> sent;
};

// x starts at 0 and must become 1; only agent 1 can set it.
Task peer_sets_goal() {
  Task t;
  t.variables = {{"x", {"0", "1"}}};
  t.init = {0};
  t.goal = {{0, 1}};
  t.agents = {{"idle", std::nullopt}, {"worker", std::nullopt}};
  t.actions = {{"set", 1, {{0, 0}}, {{0, 1}}, 1}};
  return t;
}

struct SnapshotFixture {
  Task task = peer_sets_goal();
  Classification cls = classify(task);
  FakeEndpoint ep;
  Agent agent{task, cls, 0, ep, AgentConfig{}};
  const Candidate cand{1, 1, 5, 0};
  std::vector<Candidate> confirmed;

  // Agent 0 hears of the candidate and starts a snapshot.
  SnapshotId open() {
    agent.set_confirm_hook([this](AgentId, const Candidate& c) { confirmed.push_back(c); });
    ep.inbox.push_back(Message{1, GoalCandidateMsg{PackedState::plain({1}, 2), cand, 0}});
    agent.step();
    const auto markers = ep.sent_of<SnapshotMarkerMsg>();
    if (markers.size() != 1) throw std::logic_error("expected one marker");
    return markers[0].id;
  }
};

Task generated(const std::string& domain, int agents, std::uint64_t seed, bool costs = true) {
  GeneratorParams p;
  p.domain = domain;
  p.num_agents = agents;
  p.seed = seed;
  p.random_costs = costs;
  return generate_instance(p);
}

RunResult run(const Task& t, const Classification& cls, SearchMode mode, std::uint64_t seed,
              HeuristicKind h = HeuristicKind::kMax) {
  SimRunConfig c;
  c.agent.mode = mode;
  c.agent.heuristic = h;
  c.agent.seed = seed;
  c.net.seed = seed;
  c.schedule_seed = seed;
  return run_sim(t, cls, c);
}

}  // namespace

TEST(Snapshot, OpenStateInPeerBlocksConfirmation) {
  SnapshotFixture fx;
  const SnapshotId sid = fx.open();
  EXPECT_EQ(sid.initiator, 0);
  fx.ep.inbox.push_back(Message{1, SnapshotMarkerMsg{sid, 1}});
  fx.ep.inbox.push_back(Message{1, SnapshotReportMsg{sid, ReportRound::kSnapshot, 0, 1, fx.cand, true}});
  fx.agent.step();
  EXPECT_TRUE(fx.confirmed.empty());
  EXPECT_TRUE(fx.ep.sent_of<TracebackRequestMsg>().empty());
  EXPECT_FALSE(fx.agent.finished());
}

TEST(Snapshot, ConfirmsWhenNothingCheaperRemains) {
  SnapshotFixture fx;
  const SnapshotId sid = fx.open();
  fx.ep.inbox.push_back(Message{1, SnapshotMarkerMsg{sid, 1}});
  fx.ep.inbox.push_back(Message{1, SnapshotReportMsg{sid, ReportRound::kSnapshot, 1, 0, fx.cand, true}});
  fx.agent.step();
  ASSERT_EQ(fx.confirmed.size(), 1u);
  EXPECT_EQ(fx.confirmed[0], fx.cand);
  const auto req = fx.ep.sent_of<TracebackRequestMsg>();
  ASSERT_EQ(req.size(), 1u);
  EXPECT_EQ(req[0].record, 5u);
  EXPECT_EQ(req[0].initiator, 0);

  fx.ep.inbox.push_back(Message{1, TracebackSegmentMsg{{0}}});
  fx.agent.step();
  EXPECT_EQ(fx.agent.outcome(), Outcome::kSolved);
  EXPECT_EQ(fx.agent.plan(), (std::vector<ActionId>{0}));
  ASSERT_EQ(fx.ep.sent_of<TerminateMsg>().size(), 1u);
}

TEST(Snapshot, StateInFlightOnChannelCounts) {
  SnapshotFixture fx;
  const SnapshotId sid = fx.open();
  // a cheap state overtakes the marker on the recorded channel
  fx.ep.inbox.push_back(Message{1, StateMsg{PackedState::plain({0}, 2), 0, 0, true, 0, 0}});
  fx.ep.inbox.push_back(Message{1, SnapshotMarkerMsg{sid, 1}});
  fx.ep.inbox.push_back(Message{1, SnapshotReportMsg{sid, ReportRound::kSnapshot, 1, 0, fx.cand, true}});
  fx.agent.step();
  EXPECT_TRUE(fx.confirmed.empty());
}

TEST(Snapshot, StaleEpochIgnored) {
  SnapshotFixture fx;
  SnapshotId sid = fx.open();
  sid.epoch = 7;
  fx.ep.inbox.push_back(Message{1, SnapshotMarkerMsg{sid, 1}});
  fx.ep.inbox.push_back(Message{1, SnapshotReportMsg{sid, ReportRound::kSnapshot, 1, 0, fx.cand, true}});
  fx.agent.step();
  EXPECT_TRUE(fx.confirmed.empty());
}

TEST(Snapshot, SingleAgentConfirmsAlone) {
  GeneratorParams p;
  p.domain = "chain";
  p.num_agents = 1;
  const Task t = generate_instance(p);
  const Classification cls = classify(t);
  const RunResult r = run(t, cls, SearchMode::kOptimal, 1);
  ASSERT_EQ(r.outcome, Outcome::kSolved);
  EXPECT_EQ(r.cost, 3);
  EXPECT_GE(r.agents[0].snapshots_confirmed, 1u);
  EXPECT_EQ(r.total_messages(), 0u);
}

TEST(AckRound, SatisficingPeerAcknowledges) {
  const Task t = peer_sets_goal();
  const Classification cls = classify(t);
  FakeEndpoint ep;
  AgentConfig cfg;
  cfg.mode = SearchMode::kSatisficing;
  Agent agent(t, cls, 0, ep, cfg);
  ep.inbox.push_back(Message{1, GoalCandidateMsg{PackedState::plain({1}, 2), {4, 1, 2, 0}, 3}});
  agent.step();
  const auto acks = ep.sent_of<SnapshotReportMsg>();
  ASSERT_EQ(acks.size(), 1u);
  EXPECT_EQ(acks[0].round, ReportRound::kAck);
  EXPECT_EQ(acks[0].id.seq, 3u);
  EXPECT_EQ(acks[0].id.initiator, 1);
  EXPECT_TRUE(acks[0].confirm);
}

TEST(MadAStar, TwoAgentExampleOptimalAcrossAgents) {
  const Task t = two_agent_example();
  const Classification cls = classify(t);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunResult r = run(t, cls, SearchMode::kOptimal, seed);
    ASSERT_EQ(r.outcome, Outcome::kSolved);
    EXPECT_EQ(r.cost, 8);
    EXPECT_TRUE(oracle::plan_reaches_goal(t, r.plan));
    EXPECT_EQ(oracle::plan_cost(t, r.plan), 8);
    std::set<AgentId> owners;
    for (ActionId a : r.plan) owners.insert(t.actions[a].owner);
    EXPECT_EQ(owners.size(), 2u);
    EXPECT_EQ(r.safety_violations, 0u);
  }
}

TEST(MadAStar, ExploreCreatesOnlyTheForest) {
  const Task t = two_agent_example();
  const Classification cls = classify(t);
  EXPECT_EQ(oracle::reachable(t, 1000)->size(), 31u);
  SimRunConfig c;
  c.agent.explore = true;
  const RunResult r = run_sim(t, cls, c);
  EXPECT_EQ(r.own_states(), 16u);
}

TEST(MadAStar, RelevanceLimitsTraffic) {
  const Task t = two_agent_example();
  const Classification cls = classify(t);
  const RunResult r = run(t, cls, SearchMode::kOptimal, 2);
  // agent 2's only public action leads to the goal, which agent 1 cannot use
  EXPECT_GE(r.agents[0].states_sent, 1u);
  EXPECT_EQ(r.agents[1].states_sent, 0u);
}

TEST(MadAStar, MatchesOracleOnGeneratedTasks) {
  int checked = 0;
  for (const char* d : {"logistics", "random", "chain"})
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Task t = generated(d, 2 + static_cast<int>(seed % 2), seed);
      const auto truth = oracle::optimal_cost(t);
      ASSERT_TRUE(truth);
      const Classification cls = classify(t);
      const RunResult r = run(t, cls, SearchMode::kOptimal, seed);
      ASSERT_EQ(r.outcome, Outcome::kSolved) << d << " " << seed;
      EXPECT_EQ(r.cost, *truth) << d << " " << seed;
      EXPECT_TRUE(oracle::plan_reaches_goal(t, r.plan));
      EXPECT_EQ(oracle::plan_cost(t, r.plan), r.cost);
      EXPECT_EQ(r.safety_violations, 0u);
      EXPECT_EQ(r.fifo_violations, 0u);
      for (const auto& a : r.agents) EXPECT_EQ(a.f_decreases, 0u);
      ++checked;
    }
  EXPECT_EQ(checked, 15);
}

TEST(MadAStar, ScheduleDoesNotChangeCost) {
  const Task t = generated("logistics", 3, 9);
  const Classification cls = classify(t);
  const auto truth = oracle::optimal_cost(t);
  ASSERT_TRUE(truth);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimRunConfig c;
    c.net = SimConfig{seed, 0, 1 + seed % 6};
    c.schedule_seed = seed * 31;
    c.skip_probability = 0.2;
    const RunResult r = run_sim(t, cls, c);
    ASSERT_EQ(r.outcome, Outcome::kSolved);
    EXPECT_EQ(r.cost, *truth);
    EXPECT_EQ(r.safety_violations, 0u);
  }
}

TEST(MadAStar, SameSeedSameRun) {
  const Task t = generated("random", 3, 4);
  const Classification cls = classify(t);
  const RunResult a = run(t, cls, SearchMode::kOptimal, 6), b = run(t, cls, SearchMode::kOptimal, 6);
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_EQ(a.total_expansions(), b.total_expansions());
  EXPECT_EQ(a.total_messages(), b.total_messages());
  EXPECT_EQ(a.ticks, b.ticks);
}

TEST(MadAStar, UnsolvableDetected) {
  for (const char* d : {"logistics", "random", "chain"}) {
    GeneratorParams p;
    p.domain = d;
    p.num_agents = 2;
    p.solvable = false;
    const Task t = generate_instance(p);
    ASSERT_FALSE(oracle::optimal_cost(t));
    const Classification cls = classify(t);
    EXPECT_EQ(run(t, cls, SearchMode::kOptimal, 1).outcome, Outcome::kUnsolvable) << d;
    EXPECT_EQ(run(t, cls, SearchMode::kSatisficing, 1, HeuristicKind::kFF).outcome, Outcome::kUnsolvable) << d;
  }
}

TEST(MadAStar, EagerSendingSameCost) {
  const Task t = generated("logistics", 2, 3);
  const Classification cls = classify(t);
  SimRunConfig c;
  c.agent.timing = SendTiming::kEager;
  const RunResult r = run_sim(t, cls, c);
  ASSERT_EQ(r.outcome, Outcome::kSolved);
  EXPECT_EQ(r.cost, *oracle::optimal_cost(t));
}

TEST(MadAStar, PrivacyModesSameCost) {
  const Task t = generated("logistics", 3, 5);
  const Classification cls = classify(t);
  const Cost truth = *oracle::optimal_cost(t);
  for (PrivacyMode m : {PrivacyMode::kPlain, PrivacyMode::kDeterministic, PrivacyMode::kMultiToken}) {
    SimRunConfig c;
    c.agent.privacy = m;
    const RunResult r = run_sim(t, cls, c);
    ASSERT_EQ(r.outcome, Outcome::kSolved);
    EXPECT_EQ(r.cost, truth);
    EXPECT_TRUE(oracle::plan_reaches_goal(t, r.plan));
  }
}

TEST(Mafs, SatisficingPlansValid) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Task t = generated(seed % 2 ? "logistics" : "random", 2 + static_cast<int>(seed % 3), seed);
    const Classification cls = classify(t);
    const RunResult r = run(t, cls, SearchMode::kSatisficing, seed, HeuristicKind::kFF);
    ASSERT_EQ(r.outcome, Outcome::kSolved) << seed;
    EXPECT_TRUE(oracle::plan_reaches_goal(t, r.plan)) << seed;
    EXPECT_GE(r.cost, *oracle::optimal_cost(t));
  }
}

TEST(Robustness, CrashedAgentExcludedFromPlan) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Task t = generated(seed % 2 ? "logistics" : "random", 3, seed);
    const Classification cls = classify(t);
    const AgentId victim = static_cast<AgentId>(seed % 3);
    const auto truth = oracle::optimal_cost(without_agent_actions(t, victim));
    SimRunConfig c;
    c.agent.robustness = true;
    c.net.seed = seed;
    const RunResult clean = run_sim(t, cls, c);
    ASSERT_EQ(clean.outcome, Outcome::kSolved);
    c.fail_agent = victim;
    c.fail_at_tick = clean.ticks / 2;  // well before the undisturbed run would finish
    const RunResult r = run_sim(t, cls, c);
    if (!truth) {
      EXPECT_EQ(r.outcome, Outcome::kUnsolvable) << seed;
      continue;
    }
    ASSERT_EQ(r.outcome, Outcome::kSolved) << seed;
    EXPECT_EQ(r.cost, *truth) << seed;
    for (ActionId a : r.plan) EXPECT_NE(t.actions[a].owner, victim);
    EXPECT_TRUE(oracle::plan_reaches_goal(t, r.plan));
  }
}

TEST(Planner, CentralizedAndDistributedAgree) {
  const Task t = generated("logistics", 2, 2);
  const Classification cls = classify(t);
  std::optional<Cost> cost;
  for (Algorithm a : {Algorithm::kAStar, Algorithm::kPPAStar, Algorithm::kMadAStar}) {
    PlannerConfig cfg;
    cfg.algorithm = a;
    const RunReport r = run_planner(t, cls, cfg, "x");
    ASSERT_EQ(r.outcome, Outcome::kSolved);
    EXPECT_TRUE(r.plan_valid);
    if (cost) {
      EXPECT_EQ(r.cost, cost);
    }
    cost = r.cost;
  }
  EXPECT_EQ(cost, oracle::optimal_cost(t));
}

TEST(Planner, ExitCodes) {
  EXPECT_EQ(exit_code(Outcome::kSolved), 0);
  EXPECT_EQ(exit_code(Outcome::kUnsolvable), 10);
  EXPECT_EQ(exit_code(Outcome::kTimeout), 20);
  EXPECT_EQ(exit_code(Outcome::kMemory), 30);
}

TEST(Planner, DefaultHeuristicPerAlgorithm) {
  PlannerConfig c;
  c.algorithm = Algorithm::kMafs;
  EXPECT_EQ(c.effective_heuristic(), HeuristicKind::kFF);
  c.algorithm = Algorithm::kMadAStar;
  EXPECT_EQ(c.effective_heuristic(), HeuristicKind::kMax);
  EXPECT_THROW(parse_algorithm("bfs"), std::invalid_argument);
}

TEST(Planner, ReportJsonFields) {
  const Task t = two_agent_example();
  const Classification cls = classify(t);
  PlannerConfig cfg;
  const auto j = report_json(run_planner(t, cls, cfg, "fig"));
  for (const char* k : {"instance", "algorithm", "heuristic", "agents", "outcome", "cost", "seconds",
                        "expansions", "messages", "bytes", "seed"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["cost"], 8);
  EXPECT_EQ(j["outcome"], "solved");
}
