#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "mafs/ingest.hpp"
#include "mafs/tcp_transport.hpp"
#include "mafs/transport.hpp"

using namespace mafs;

namespace {

PackedState sample_state(int n_agents) {
  PackedState s = PackedState::plain({3, kOpaqueSlot, 0, 7}, n_agents);
  Token t;
  for (int i = 0; i < 16; ++i) t.bytes[i] = static_cast<std::uint8_t>(i * 13 + 1);
  s.tokens[1] = t;
  return s;
}

std::vector<Message> every_kind() {
  const Candidate c{42, 2, 17, 0b101};
  return {
      Message{0, StateMsg{sample_state(3), 5, 9, true, 33, 0b11}},
      Message{1, GoalCandidateMsg{sample_state(3), c, 4}},
      Message{2, SnapshotMarkerMsg{SnapshotId{2, 8, 1}, 42}},
      Message{0, SnapshotReportMsg{SnapshotId{2, 8, 1}, ReportRound::kSnapshot, 40, 12, c, false}},
      Message{0, SnapshotReportMsg{SnapshotId{1, 3, 0}, ReportRound::kAck, kInfiniteCost, 0, std::nullopt, true}},
      Message{1, TracebackRequestMsg{0, 99, {4, 3, 2}}},
      Message{2, TracebackSegmentMsg{{0, 1, 2, 3}}},
      Message{0, TerminateMsg{Outcome::kUnsolvable, {}}},
      Message{1, FailureNoticeMsg{2}},
  };
}

// Drains everything from a set of endpoints while the clock runs.
std::vector<std::vector<Message>> run_until_quiet(SimRouter& r, std::vector<SimEndpoint>& eps) {
  std::vector<std::vector<Message>> got(eps.size());
  for (int t = 0; t < 1000 && (r.in_flight() > 0 || t == 0); ++t) {
    for (std::size_t k = 0; k < eps.size(); ++k)
      for (auto& m : eps[k].poll()) got[k].push_back(std::move(m));
    r.advance();
  }
  return got;
}

}  // namespace

TEST(Wire, EveryKindRoundTrips) {
  for (const auto& m : every_kind()) {
    const auto frame = encode(m);
    EXPECT_EQ(decode(frame), m) << kind_name(m.kind());
  }
}

TEST(Wire, FrameLayout) {
  const Message m{2, FailureNoticeMsg{1}};
  const auto f = encode(m);
  ASSERT_GE(f.size(), 9u);
  const std::uint32_t len = (f[0] << 24) | (f[1] << 16) | (f[2] << 8) | f[3];
  EXPECT_EQ(len, f.size() - 4);
  EXPECT_EQ(f[4], 8);  // kind tag
  EXPECT_EQ(f[8], 2);  // sender, big-endian
}

TEST(Wire, TruncatedOrUnknownRejected) {
  auto f = encode(every_kind()[0]);
  auto cut = f;
  cut.resize(f.size() - 3);
  EXPECT_THROW(decode(cut), ProtocolError);
  auto bad = f;
  bad[4] = 77;
  EXPECT_THROW(decode(bad), ProtocolError);
  auto extra = f;
  extra.push_back(0);
  EXPECT_THROW(decode(extra), ProtocolError);
}

TEST(Wire, RandomBytesNeverCrash) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::uint8_t> junk(rng() % 64);
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
    if (junk.size() >= 4) {
      const std::uint32_t len = static_cast<std::uint32_t>(junk.size() - 4);
      junk[0] = len >> 24, junk[1] = len >> 16, junk[2] = len >> 8, junk[3] = len;
    }
    try {
      decode(junk);
    } catch (const ProtocolError&) {
    }
  }
}

TEST(SimTransport, FifoPerPair) {
  SimRouter r(2, SimConfig{9, 0, 6});
  std::vector<SimEndpoint> eps{{r, 0}, {r, 1}};
  for (Cost i = 0; i < 50; ++i) eps[0].send(1, Message{0, SnapshotMarkerMsg{{0, 0, 0}, i}});
  const auto got = run_until_quiet(r, eps);
  ASSERT_EQ(got[1].size(), 50u);
  for (Cost i = 0; i < 50; ++i) EXPECT_EQ(std::get<SnapshotMarkerMsg>(got[1][i].body).candidate_cost, i);
  EXPECT_EQ(r.fifo_violations(), 0u);
}

TEST(SimTransport, SeedReplaysSchedule) {
  auto schedule = [](std::uint64_t seed) {
    SimRouter r(3, SimConfig{seed, 0, 5});
    std::vector<SimEndpoint> eps{{r, 0}, {r, 1}, {r, 2}};
    std::vector<std::pair<std::uint64_t, Cost>> out;
    for (Cost i = 0; i < 30; ++i) eps[i % 2].send(2, Message{static_cast<AgentId>(i % 2), SnapshotMarkerMsg{{}, i}});
    for (int t = 0; t < 100; ++t) {
      for (auto& m : eps[2].poll()) out.push_back({r.now(), std::get<SnapshotMarkerMsg>(m.body).candidate_cost});
      r.advance();
    }
    return out;
  };
  EXPECT_EQ(schedule(3), schedule(3));
  EXPECT_NE(schedule(3), schedule(4));
}

TEST(SimTransport, BroadcastSkipsSelf) {
  SimRouter r(4, SimConfig{});
  std::vector<SimEndpoint> eps{{r, 0}, {r, 1}, {r, 2}, {r, 3}};
  eps[1].broadcast(Message{1, FailureNoticeMsg{0}}, {0, 1, 2, 3});
  EXPECT_EQ(eps[1].stats().messages_sent, 3u);
  const auto got = run_until_quiet(r, eps);
  EXPECT_EQ(got[0].size() + got[1].size() + got[2].size() + got[3].size(), 3u);
  EXPECT_TRUE(got[1].empty());
}

TEST(SimTransport, ByteAccountingExact) {
  SimRouter r(2, SimConfig{});
  SimEndpoint a(r, 0);
  std::size_t bytes = 0;
  for (const auto& m : every_kind()) {
    Message copy = m;
    copy.sender = 0;
    a.send(1, copy);
    bytes += encode(copy).size();
  }
  EXPECT_EQ(a.stats().bytes_sent, bytes);
  EXPECT_EQ(a.stats().messages_sent, every_kind().size());
}

TEST(SimTransport, PurgeDropsChannels) {
  SimRouter r(3, SimConfig{1, 5, 5});
  std::vector<SimEndpoint> eps{{r, 0}, {r, 1}, {r, 2}};
  eps[0].send(1, Message{0, FailureNoticeMsg{2}});
  eps[1].send(2, Message{1, FailureNoticeMsg{2}});
  eps[2].send(0, Message{2, FailureNoticeMsg{2}});
  r.purge(2);
  EXPECT_EQ(r.in_flight(), 1u);
  const auto got = run_until_quiet(r, eps);
  EXPECT_EQ(got[1].size(), 1u);
  EXPECT_EQ(r.fifo_violations(), 0u);
}

TEST(Opacifier, NoPrivateVariablesIsIdentity) {
  const State init{0, 1};
  Opacifier o(0, 2, {}, init, PrivacyMode::kDeterministic, 7);
  const PackedState s = PackedState::plain({1, 1}, 2);
  EXPECT_EQ(o.opacify(s), s);
}

TEST(Opacifier, RoundTripOnRandomStates) {
  std::mt19937_64 rng(1);
  for (PrivacyMode mode : {PrivacyMode::kPlain, PrivacyMode::kDeterministic, PrivacyMode::kMultiToken}) {
    const State init{0, 0, 0, 0, 0};
    Opacifier o(1, 3, {1, 3}, init, mode, 99);
    for (int i = 0; i < 300; ++i) {
      PackedState s = PackedState::plain({}, 3);
      for (int v = 0; v < 5; ++v) s.slots.push_back(static_cast<Value>(rng() % 4));
      const PackedState hidden = o.opacify(s);
      if (mode != PrivacyMode::kPlain) {
        EXPECT_EQ(hidden.slots[1], kOpaqueSlot);
        EXPECT_EQ(hidden.slots[3], kOpaqueSlot);
        EXPECT_EQ(hidden.slots[0], s.slots[0]);
        ASSERT_TRUE(hidden.tokens[1].has_value());
      }
      EXPECT_EQ(o.deopacify(hidden), s);
    }
  }
}

TEST(Opacifier, DeterministicTokensStableMultiTokensVary) {
  const State init{0, 0};
  Opacifier det(0, 2, {1}, init, PrivacyMode::kDeterministic, 5);
  Opacifier multi(0, 2, {1}, init, PrivacyMode::kMultiToken, 5);
  const PackedState s = PackedState::plain({0, 2}, 2);
  EXPECT_EQ(det.opacify(s), det.opacify(s));
  EXPECT_NE(multi.opacify(s), multi.opacify(s));
  // the initial segment always maps to the reserved token
  const PackedState root = PackedState::plain({1, 0}, 2);
  EXPECT_TRUE(det.opacify(root).tokens[0]->is_initial());
  EXPECT_TRUE(multi.opacify(root).tokens[0]->is_initial());
}

TEST(Opacifier, DifferentSegmentsGiveDifferentStates) {
  GeneratorParams p;
  p.num_agents = 2;
  p.seed = 4;
  const Task t = generate_instance(p);
  const Classification cls = classify(t);
  const auto priv = cls.private_vars(0);
  ASSERT_FALSE(priv.empty());
  Opacifier o(0, 2, priv, t.init, PrivacyMode::kDeterministic, 3);
  PackedState a = PackedState::plain(t.init, 2), b = a;
  b.slots[priv[0]] = (a.slots[priv[0]] + 1) % t.variables[priv[0]].domain_size();
  const PackedState ha = o.opacify(a), hb = o.opacify(b);
  EXPECT_NE(ha, hb);
  EXPECT_NE(PackedStateHash{}(ha), PackedStateHash{}(hb));
}

TEST(Opacifier, UnknownTokenIsProtocolError) {
  Opacifier o(0, 2, {0}, State{0, 0}, PrivacyMode::kDeterministic, 1);
  PackedState s = PackedState::plain({kOpaqueSlot, 0}, 2);
  Token t;
  t.bytes.fill(0xab);
  s.tokens[0] = t;
  EXPECT_THROW(o.deopacify(s), ProtocolError);
}

TEST(Opacifier, KeysDifferPerOwnerAndSeed) {
  const State init{0, 0};
  const PackedState s = PackedState::plain({1, 1}, 2);
  Opacifier a(0, 2, {0, 1}, init, PrivacyMode::kDeterministic, 1);
  Opacifier b(0, 2, {0, 1}, init, PrivacyMode::kDeterministic, 2);
  Opacifier c(1, 2, {0, 1}, init, PrivacyMode::kDeterministic, 1);
  EXPECT_NE(a.opacify(s).tokens[0], b.opacify(s).tokens[0]);
  EXPECT_NE(a.opacify(s).tokens[0], c.opacify(s).tokens[1]);
}

TEST(TcpTransport, LoopbackFifoBetweenThreeEndpoints) {
  std::vector<std::string> addrs;
  for (int k = 0; k < 3; ++k) addrs.push_back("127.0.0.1:" + std::to_string(pick_free_port()));
  std::vector<std::unique_ptr<TcpEndpoint>> eps;
  for (AgentId k = 0; k < 3; ++k) eps.push_back(std::make_unique<TcpEndpoint>(k, addrs, 10.0));
  std::vector<std::thread> starters;
  for (auto& e : eps) starters.emplace_back([&e] { e->start(); });
  for (auto& t : starters) t.join();

  for (Cost i = 0; i < 200; ++i) {
    eps[0]->send(2, Message{0, SnapshotMarkerMsg{{0, 0, 0}, i}});
    eps[1]->send(2, Message{1, SnapshotMarkerMsg{{1, 0, 0}, 1000 + i}});
  }
  eps[2]->broadcast(Message{2, every_kind()[0].body}, {0, 1, 2});
  std::vector<Message> got;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (got.size() < 400 && std::chrono::steady_clock::now() < deadline) {
    eps[2]->wait(std::chrono::milliseconds(50));
    for (auto& m : eps[2]->poll()) got.push_back(std::move(m));
  }
  ASSERT_EQ(got.size(), 400u);
  Cost next0 = 0, next1 = 1000;
  for (const auto& m : got) {
    const Cost c = std::get<SnapshotMarkerMsg>(m.body).candidate_cost;
    if (m.sender == 0) EXPECT_EQ(c, next0++);
    if (m.sender == 1) EXPECT_EQ(c, next1++);
  }
  for (AgentId k : {0, 1}) {
    std::vector<Message> one;
    while (one.empty() && std::chrono::steady_clock::now() < deadline) {
      eps[k]->wait(std::chrono::milliseconds(50));
      one = eps[k]->poll();
    }
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].body, every_kind()[0].body);
  }
  for (auto& e : eps) e->close();
}

TEST(TcpTransport, LostPeerReportedWhenAsked) {
  std::vector<std::string> addrs;
  for (int k = 0; k < 2; ++k) addrs.push_back("127.0.0.1:" + std::to_string(pick_free_port()));
  auto a = std::make_unique<TcpEndpoint>(0, addrs, 10.0, true);
  auto b = std::make_unique<TcpEndpoint>(1, addrs, 10.0, true);
  std::thread ta([&] { a->start(); }), tb([&] { b->start(); });
  ta.join();
  tb.join();
  b->send(0, Message{1, FailureNoticeMsg{1}});  // establish the channel's sender
  std::vector<Message> got;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (got.empty() && std::chrono::steady_clock::now() < deadline) {
    a->wait(std::chrono::milliseconds(50));
    got = a->poll();
  }
  ASSERT_EQ(got.size(), 1u);
  b->close();
  b.reset();
  got.clear();
  while (got.empty() && std::chrono::steady_clock::now() < deadline) {
    a->wait(std::chrono::milliseconds(50));
    got = a->poll();
  }
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(std::get<FailureNoticeMsg>(got[0].body).failed, 1);
  a->close();
}

TEST(TcpTransport, BadAddressRejected) {
  EXPECT_THROW(split_address("nocolon"), TransportError);
  EXPECT_THROW(TcpEndpoint(3, {"127.0.0.1:1"}), TransportError);
}
