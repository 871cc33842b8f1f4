#pragma once

// Messages, their binary frame encoding, the simulated network, and the
// token scheme that hides an agent's private state segment from its peers.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <sodium.h>

#include "mafs/model.hpp"
#include "mafs/search_core.hpp"

namespace mafs {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --------------------------------------------------------------------------
// Messages

using RecordId = std::uint32_t;
inline constexpr RecordId kNoRecord = 0xffffffffu;

struct SnapshotId {
  AgentId initiator = 0;
  std::uint32_t seq = 0;
  std::uint32_t epoch = 0;
  auto operator<=>(const SnapshotId&) const = default;
};

// A goal state some agent reached, identified by the agent's own record.
struct Candidate {
  Cost cost = kInfiniteCost;
  AgentId proposer = 0;
  RecordId record = kNoRecord;
  std::uint64_t participants = 0;
  bool operator==(const Candidate&) const = default;
};

// Lower cost wins; equal cost goes to the lower agent id.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.proposer < b.proposer;
}
inline bool better(const std::optional<Candidate>& a, const std::optional<Candidate>& b) {
  if (!a) return false;
  if (!b) return true;
  return better(*a, *b);
}

struct StateMsg {
  PackedState state;
  Cost g = 0;
  Cost h = 0;
  bool h_admissible = false;
  RecordId record = kNoRecord;  // sender's record, for trace-back
  std::uint64_t participants = 0;
  bool operator==(const StateMsg&) const = default;
};

struct GoalCandidateMsg {
  PackedState state;
  Candidate candidate;
  std::uint32_t round = 0;  // proposer's acknowledgement round
  bool operator==(const GoalCandidateMsg&) const = default;
};

struct SnapshotMarkerMsg {
  SnapshotId id;
  Cost candidate_cost = kInfiniteCost;
  bool operator==(const SnapshotMarkerMsg&) const = default;
};

enum class ReportRound : std::uint8_t { kSnapshot = 0, kAck = 1 };

struct SnapshotReportMsg {
  SnapshotId id;
  ReportRound round = ReportRound::kSnapshot;
  Cost min_f = kInfiniteCost;
  std::uint64_t open_count = 0;
  std::optional<Candidate> best;
  bool confirm = true;
  bool operator==(const SnapshotReportMsg&) const = default;
};

struct TracebackRequestMsg {
  AgentId initiator = 0;
  RecordId record = kNoRecord;
  std::vector<ActionId> suffix;  // collected backwards from the goal
  bool operator==(const TracebackRequestMsg&) const = default;
};

struct TracebackSegmentMsg {
  std::vector<ActionId> plan;
  bool operator==(const TracebackSegmentMsg&) const = default;
};

struct TerminateMsg {
  Outcome outcome = Outcome::kSolved;
  std::vector<ActionId> plan;
  bool operator==(const TerminateMsg&) const = default;
};

struct FailureNoticeMsg {
  AgentId failed = 0;
  bool operator==(const FailureNoticeMsg&) const = default;
};

enum class MsgKind : std::uint8_t {
  kState = 1,
  kGoalCandidate = 2,
  kSnapshotMarker = 3,
  kSnapshotReport = 4,
  kTracebackRequest = 5,
  kTracebackSegment = 6,
  kTerminate = 7,
  kFailureNotice = 8,
};

using Payload = std::variant<StateMsg, GoalCandidateMsg, SnapshotMarkerMsg, SnapshotReportMsg,
                             TracebackRequestMsg, TracebackSegmentMsg, TerminateMsg,
                             FailureNoticeMsg>;

struct Message {
  AgentId sender = 0;
  Payload body;
  MsgKind kind() const { return static_cast<MsgKind>(body.index() + 1); }
  bool operator==(const Message&) const = default;
};

inline const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::kState: return "STATE";
    case MsgKind::kGoalCandidate: return "GOAL_CANDIDATE";
    case MsgKind::kSnapshotMarker: return "SNAPSHOT_MARKER";
    case MsgKind::kSnapshotReport: return "SNAPSHOT_REPORT";
    case MsgKind::kTracebackRequest: return "TRACEBACK_REQUEST";
    case MsgKind::kTracebackSegment: return "TRACEBACK_SEGMENT";
    case MsgKind::kTerminate: return "TERMINATE";
    case MsgKind::kFailureNotice: return "FAILURE_NOTICE";
  }
  return "?";
}

// --------------------------------------------------------------------------
// Wire format: u32 length (of everything after it), u8 kind, payload.
// All integers big-endian; the payload starts with the sender id.

namespace wire {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

  void state(const PackedState& s) {
    u32(static_cast<std::uint32_t>(s.slots.size()));
    for (Value v : s.slots) i32(v);
    u32(static_cast<std::uint32_t>(s.tokens.size()));
    for (const auto& t : s.tokens) {
      u8(t ? 1 : 0);
      if (t) bytes(t->bytes);
    }
  }
  void actions(const std::vector<ActionId>& plan) {
    u32(static_cast<std::uint32_t>(plan.size()));
    for (ActionId a : plan) i32(a);
  }
  void snapshot_id(const SnapshotId& id) {
    i32(id.initiator);
    u32(id.seq);
    u32(id.epoch);
  }
  void candidate(const Candidate& c) {
    i64(c.cost);
    i32(c.proposer);
    u32(c.record);
    u64(c.participants);
  }

  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

  PackedState state() {
    PackedState s;
    const std::uint32_t n = count(4);
    s.slots.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) s.slots.push_back(i32());
    const std::uint32_t k = count(1);
    for (std::uint32_t i = 0; i < k; ++i) {
      const std::uint8_t present = u8();
      if (present > 1) throw ProtocolError("bad token flag");
      if (!present) {
        s.tokens.emplace_back();
        continue;
      }
      need(16);
      Token t;
      std::memcpy(t.bytes.data(), data_.data() + pos_, 16);
      pos_ += 16;
      s.tokens.emplace_back(t);
    }
    return s;
  }
  std::vector<ActionId> actions() {
    const std::uint32_t n = count(4);
    std::vector<ActionId> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(i32());
    return out;
  }
  SnapshotId snapshot_id() {
    SnapshotId id;
    id.initiator = i32();
    id.seq = u32();
    id.epoch = u32();
    return id;
  }
  Candidate candidate() {
    Candidate c;
    c.cost = i64();
    c.proposer = i32();
    c.record = u32();
    c.participants = u64();
    return c;
  }
  bool flag() {
    const std::uint8_t v = u8();
    if (v > 1) throw ProtocolError("bad boolean");
    return v == 1;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ProtocolError("truncated frame");
  }
  // element count, sanity-checked against the remaining bytes
  std::uint32_t count(std::size_t min_element_size) {
    const std::uint32_t n = u32();
    if (static_cast<std::uint64_t>(n) * min_element_size > data_.size() - pos_)
      throw ProtocolError("element count exceeds frame");
    return n;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace wire

inline std::vector<std::uint8_t> encode(const Message& m) {
  wire::Writer w;
  w.u32(0);  // patched below
  w.u8(static_cast<std::uint8_t>(m.kind()));
  w.i32(m.sender);
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, StateMsg>) {
          w.state(b.state);
          w.i64(b.g);
          w.i64(b.h);
          w.u8(b.h_admissible);
          w.u32(b.record);
          w.u64(b.participants);
        } else if constexpr (std::is_same_v<T, GoalCandidateMsg>) {
          w.state(b.state);
          w.candidate(b.candidate);
          w.u32(b.round);
        } else if constexpr (std::is_same_v<T, SnapshotMarkerMsg>) {
          w.snapshot_id(b.id);
          w.i64(b.candidate_cost);
        } else if constexpr (std::is_same_v<T, SnapshotReportMsg>) {
          w.snapshot_id(b.id);
          w.u8(static_cast<std::uint8_t>(b.round));
          w.i64(b.min_f);
          w.u64(b.open_count);
          w.u8(b.best ? 1 : 0);
          if (b.best) w.candidate(*b.best);
          w.u8(b.confirm);
        } else if constexpr (std::is_same_v<T, TracebackRequestMsg>) {
          w.i32(b.initiator);
          w.u32(b.record);
          w.actions(b.suffix);
        } else if constexpr (std::is_same_v<T, TracebackSegmentMsg>) {
          w.actions(b.plan);
        } else if constexpr (std::is_same_v<T, TerminateMsg>) {
          w.u8(static_cast<std::uint8_t>(b.outcome));
          w.actions(b.plan);
        } else if constexpr (std::is_same_v<T, FailureNoticeMsg>) {
          w.i32(b.failed);
        }
      },
      m.body);
  auto& buf = w.buffer();
  const std::uint32_t len = static_cast<std::uint32_t>(buf.size() - 4);
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(len >> (24 - 8 * i));
  return std::move(buf);
}

// Decodes one complete frame (length prefix included).
inline Message decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < 5) throw ProtocolError("frame shorter than its header");
  const std::uint32_t len = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                            (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
  if (len != frame.size() - 4) throw ProtocolError("frame length mismatch");
  wire::Reader r(frame.subspan(4));
  const std::uint8_t kind = r.u8();
  Message m;
  m.sender = r.i32();
  switch (static_cast<MsgKind>(kind)) {
    case MsgKind::kState: {
      StateMsg b;
      b.state = r.state();
      b.g = r.i64();
      b.h = r.i64();
      b.h_admissible = r.flag();
      b.record = r.u32();
      b.participants = r.u64();
      m.body = std::move(b);
      break;
    }
    case MsgKind::kGoalCandidate: {
      GoalCandidateMsg b;
      b.state = r.state();
      b.candidate = r.candidate();
      b.round = r.u32();
      m.body = std::move(b);
      break;
    }
    case MsgKind::kSnapshotMarker: {
      SnapshotMarkerMsg b;
      b.id = r.snapshot_id();
      b.candidate_cost = r.i64();
      m.body = b;
      break;
    }
    case MsgKind::kSnapshotReport: {
      SnapshotReportMsg b;
      b.id = r.snapshot_id();
      const std::uint8_t round = r.u8();
      if (round > 1) throw ProtocolError("bad report round");
      b.round = static_cast<ReportRound>(round);
      b.min_f = r.i64();
      b.open_count = r.u64();
      if (r.flag()) b.best = r.candidate();
      b.confirm = r.flag();
      m.body = b;
      break;
    }
    case MsgKind::kTracebackRequest: {
      TracebackRequestMsg b;
      b.initiator = r.i32();
      b.record = r.u32();
      b.suffix = r.actions();
      m.body = std::move(b);
      break;
    }
    case MsgKind::kTracebackSegment: {
      TracebackSegmentMsg b;
      b.plan = r.actions();
      m.body = std::move(b);
      break;
    }
    case MsgKind::kTerminate: {
      TerminateMsg b;
      const std::uint8_t o = r.u8();
      if (o > 4) throw ProtocolError("bad outcome");
      b.outcome = static_cast<Outcome>(o);
      b.plan = r.actions();
      m.body = std::move(b);
      break;
    }
    case MsgKind::kFailureNotice: {
      FailureNoticeMsg b;
      b.failed = r.i32();
      m.body = b;
      break;
    }
    default:
      throw ProtocolError("unknown message kind " + std::to_string(kind));
  }
  if (!r.done()) throw ProtocolError("trailing bytes in frame");
  return m;
}

// --------------------------------------------------------------------------
// Endpoints

struct TransportStats {
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t messages_received = 0;
  std::map<MsgKind, std::uint64_t> sent_by_kind;
};

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual AgentId id() const = 0;
  virtual int num_agents() const = 0;
  virtual void send(AgentId dest, const Message& m) = 0;
  virtual std::vector<Message> poll() = 0;

  void broadcast(const Message& m, const std::vector<AgentId>& recipients) {
    for (AgentId d : recipients)
      if (d != id()) send(d, m);
  }
  const TransportStats& stats() const { return stats_; }

 protected:
  void count_sent(const Message& m, std::size_t bytes) {
    ++stats_.messages_sent;
    stats_.bytes_sent += bytes;
    ++stats_.sent_by_kind[m.kind()];
  }
  void count_received(std::size_t n) { stats_.messages_received += n; }

 private:
  TransportStats stats_;
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::uint64_t min_delay = 0;  // in ticks
  std::uint64_t max_delay = 3;
};

// In-process network on a logical clock. Each ordered pair of agents is a
// FIFO channel; a message becomes deliverable at max(previous delivery time
// on its channel, send time + random delay).
class SimRouter {
 public:
  SimRouter(int num_agents, SimConfig cfg)
      : n_(num_agents), cfg_(cfg), rng_(cfg.seed), channels_(num_agents * num_agents),
        last_deliver_(num_agents * num_agents, 0), next_seq_(num_agents * num_agents, 0),
        expected_seq_(num_agents * num_agents, 0) {
    if (cfg_.max_delay < cfg_.min_delay) throw std::invalid_argument("max_delay < min_delay");
  }

  int num_agents() const { return n_; }
  std::uint64_t now() const { return now_; }
  void advance(std::uint64_t ticks = 1) { now_ += ticks; }

  void push(AgentId from, AgentId to, std::vector<std::uint8_t> frame) {
    std::lock_guard lock(mu_);
    check(from);
    check(to);
    if (from == to) throw std::logic_error("self-message");
    const std::size_t c = channel(from, to);
    const std::uint64_t span = cfg_.max_delay - cfg_.min_delay + 1;
    const std::uint64_t delay = cfg_.min_delay + rng_() % span;
    const std::uint64_t at = std::max(last_deliver_[c], now_ + delay);
    last_deliver_[c] = at;
    channels_[c].push_back({at, next_seq_[c]++, std::move(frame)});
    ++in_flight_;
  }

  // Frames deliverable to `to` now, per channel in send order.
  std::vector<std::pair<AgentId, std::vector<std::uint8_t>>> pop_ready(AgentId to) {
    std::lock_guard lock(mu_);
    std::vector<std::pair<AgentId, std::vector<std::uint8_t>>> out;
    for (AgentId from = 0; from < n_; ++from) {
      if (from == to) continue;
      auto& q = channels_[channel(from, to)];
      while (!q.empty() && q.front().deliver_at <= now_) {
        auto& e = q.front();
        const std::size_t c = channel(from, to);
        if (e.seq != expected_seq_[c]++) fifo_violations_++;
        out.emplace_back(from, std::move(e.frame));
        q.pop_front();
        --in_flight_;
      }
    }
    return out;
  }

  // Drops everything queued to or from `agent` (simulated crash).
  void purge(AgentId agent) {
    std::lock_guard lock(mu_);
    for (AgentId other = 0; other < n_; ++other) {
      for (std::size_t c : {channel(agent, other), channel(other, agent)}) {
        in_flight_ -= channels_[c].size();
        expected_seq_[c] += channels_[c].size();
        channels_[c].clear();
      }
    }
  }

  template <typename Fn>
  void for_each_in_flight(Fn&& fn) const {
    std::lock_guard lock(mu_);
    for (AgentId from = 0; from < n_; ++from)
      for (AgentId to = 0; to < n_; ++to)
        if (from != to)
          for (const auto& e : channels_[channel(from, to)]) fn(from, to, decode(e.frame));
  }

  std::size_t in_flight() const { return in_flight_; }
  std::uint64_t fifo_violations() const { return fifo_violations_; }

 private:
  struct Entry {
    std::uint64_t deliver_at;
    std::uint64_t seq;
    std::vector<std::uint8_t> frame;
  };
  std::size_t channel(AgentId from, AgentId to) const {
    return static_cast<std::size_t>(from) * n_ + to;
  }
  void check(AgentId a) const {
    if (a < 0 || a >= n_) throw std::out_of_range("agent id " + std::to_string(a));
  }

  int n_;
  SimConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<std::deque<Entry>> channels_;
  std::vector<std::uint64_t> last_deliver_;
  std::vector<std::uint64_t> next_seq_;
  std::vector<std::uint64_t> expected_seq_;
  std::uint64_t now_ = 0;
  std::size_t in_flight_ = 0;
  std::uint64_t fifo_violations_ = 0;
  mutable std::mutex mu_;
};

class SimEndpoint : public Endpoint {
 public:
  SimEndpoint(SimRouter& router, AgentId id) : router_(router), id_(id) {}
  AgentId id() const override { return id_; }
  int num_agents() const override { return router_.num_agents(); }

  void send(AgentId dest, const Message& m) override {
    auto frame = encode(m);
    count_sent(m, frame.size());
    router_.push(id_, dest, std::move(frame));
  }

  std::vector<Message> poll() override {
    auto frames = router_.pop_ready(id_);
    std::vector<Message> out;
    out.reserve(frames.size());
    for (auto& [from, frame] : frames) {
      Message m = decode(frame);
      if (m.sender != from) throw ProtocolError("sender field does not match channel");
      out.push_back(std::move(m));
    }
    count_received(out.size());
    return out;
  }

 private:
  SimRouter& router_;
  AgentId id_;
};

// --------------------------------------------------------------------------
// Opacification

enum class PrivacyMode { kPlain, kDeterministic, kMultiToken };

inline PrivacyMode parse_privacy_mode(const std::string& s) {
  if (s == "plain") return PrivacyMode::kPlain;
  if (s == "token") return PrivacyMode::kDeterministic;
  if (s == "multi-token") return PrivacyMode::kMultiToken;
  throw std::invalid_argument("unknown privacy mode '" + s + "'");
}

namespace detail {
inline void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium failed to initialize");
}
}  // namespace detail

// Replaces one agent's private variables with a keyed 16-byte digest and
// remembers how to undo it. The agent's initial segment always maps to the
// all-zero token so that every agent can build the same root state.
class Opacifier {
 public:
  Opacifier(AgentId owner, int num_agents, std::vector<VarId> private_vars, State initial,
            PrivacyMode mode, std::uint64_t seed)
      : owner_(owner), num_agents_(num_agents), private_vars_(std::move(private_vars)),
        mode_(mode), salt_rng_(seed ^ 0x5bd1e995ULL) {
    detail::ensure_sodium();
    std::uint8_t material[16];
    for (int i = 0; i < 8; ++i) material[i] = static_cast<std::uint8_t>(seed >> (8 * i));
    for (int i = 0; i < 4; ++i) material[8 + i] = static_cast<std::uint8_t>(owner >> (8 * i));
    std::memcpy(material + 12, "mafs", 4);
    crypto_generichash(key_.data(), key_.size(), material, sizeof material, nullptr, 0);
    initial_segment_ = segment(initial);
    table_.emplace(Token{}, initial_segment_);
  }

  PrivacyMode mode() const { return mode_; }
  AgentId owner() const { return owner_; }
  const std::vector<VarId>& private_vars() const { return private_vars_; }
  std::size_t table_size() const { return table_.size(); }

  // The owner's view of a state where every other agent is in its initial
  // private segment.
  PackedState initial_view(const State& init, const std::vector<std::vector<VarId>>& private_of) const {
    PackedState s = PackedState::plain(init, num_agents_);
    if (mode_ == PrivacyMode::kPlain) return s;
    for (AgentId k = 0; k < num_agents_; ++k) {
      if (k == owner_ || private_of[k].empty()) continue;
      for (VarId v : private_of[k]) s.slots[v] = kOpaqueSlot;
      s.tokens[k] = Token{};
    }
    return s;
  }

  PackedState opacify(const PackedState& s) {
    if (mode_ == PrivacyMode::kPlain || private_vars_.empty()) return s;
    if (s.tokens[owner_]) throw ProtocolError("opacify: segment already hidden");
    std::vector<Value> seg = segment(s.slots);
    Token t;
    if (seg != initial_segment_) {
      std::vector<std::uint8_t> input;
      if (mode_ == PrivacyMode::kMultiToken) {
        const std::uint64_t salt = salt_rng_();
        for (int i = 0; i < 8; ++i) input.push_back(static_cast<std::uint8_t>(salt >> (8 * i)));
      }
      for (Value v : seg)
        for (int i = 0; i < 4; ++i) input.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
      crypto_generichash(t.bytes.data(), t.bytes.size(), input.data(), input.size(), key_.data(),
                         key_.size());
      if (t.is_initial()) t.bytes[0] = 1;  // keep the reserved token unambiguous
      auto [it, fresh] = table_.emplace(t, seg);
      if (!fresh && it->second != seg) throw ProtocolError("token collision");
    }
    PackedState out = s;
    for (VarId v : private_vars_) out.slots[v] = kOpaqueSlot;
    out.tokens[owner_] = t;
    return out;
  }

  PackedState deopacify(const PackedState& s) const {
    if (s.tokens.size() != static_cast<std::size_t>(num_agents_))
      throw ProtocolError("state has " + std::to_string(s.tokens.size()) + " token slots");
    if (!s.tokens[owner_]) return s;
    auto it = table_.find(*s.tokens[owner_]);
    if (it == table_.end()) throw ProtocolError("unknown token");
    PackedState out = s;
    for (std::size_t i = 0; i < private_vars_.size(); ++i) out.slots[private_vars_[i]] = it->second[i];
    out.tokens[owner_].reset();
    return out;
  }

 private:
  std::vector<Value> segment(std::span<const Value> slots) const {
    std::vector<Value> seg;
    seg.reserve(private_vars_.size());
    for (VarId v : private_vars_) seg.push_back(slots[v]);
    return seg;
  }

  struct TokenHash {
    std::size_t operator()(const Token& t) const {
      std::size_t h;
      std::memcpy(&h, t.bytes.data(), sizeof h);
      return h;
    }
  };

  AgentId owner_;
  int num_agents_;
  std::vector<VarId> private_vars_;
  PrivacyMode mode_;
  std::mt19937_64 salt_rng_;
  std::array<std::uint8_t, 32> key_{};
  std::vector<Value> initial_segment_;
  std::unordered_map<Token, std::vector<Value>, TokenHash> table_;
};

}  // namespace mafs
