#pragma once

// One planning agent: searches with its own actions, forwards relevant
// states to peers, and takes part in solution verification, termination
// detection (Chandy-Lamport snapshots) and distributed plan trace-back.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mafs/heuristics.hpp"
#include "mafs/model.hpp"
#include "mafs/search_core.hpp"
#include "mafs/transport.hpp"

namespace mafs {

enum class SearchMode { kSatisficing, kOptimal };
enum class SendTiming { kLazy, kEager };

struct AgentConfig {
  SearchMode mode = SearchMode::kOptimal;
  HeuristicKind heuristic = HeuristicKind::kMax;
  CombinePolicy combine = CombinePolicy::kMax;
  SendTiming timing = SendTiming::kLazy;
  PrivacyMode privacy = PrivacyMode::kPlain;
  bool robustness = false;  // track participating agents, survive failures
  bool explore = false;     // never propose; run until the state space is exhausted
  std::uint64_t seed = 1;   // opacification keys and salts
};

struct AgentStats {
  std::uint64_t expansions = 0;
  std::uint64_t generated = 0;
  std::uint64_t reopened = 0;
  std::uint64_t states_received = 0;
  std::uint64_t states_sent = 0;
  std::uint64_t own_states = 0;  // distinct states this agent created itself (root included)
  std::uint64_t proposals = 0;
  std::uint64_t snapshots_started = 0;
  std::uint64_t snapshots_confirmed = 0;
  std::uint64_t f_decreases = 0;  // pathmax should keep this at zero in optimal mode
};

struct NodeKey {
  PackedState state;
  std::uint64_t participants = 0;  // robustness mode only
  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::size_t seed = PackedStateHash{}(k.state);
    detail::hash_mix(seed, k.participants);
    return seed;
  }
};

// How a node got its current g. Records are append-only, so a record id
// always describes one fixed path even after the node improves.
struct Record {
  ActionId action = -1;  // -1: root or received
  RecordId parent = kNoRecord;
  Cost g = 0;
  AgentId origin = -1;  // sender, for received states
  RecordId origin_record = kNoRecord;
  bool created_public = false;
};

class Agent {
 public:
  using ConfirmHook = std::function<void(AgentId initiator, const Candidate&)>;

  Agent(const Task& task, const Classification& cls, AgentId id, Endpoint& endpoint,
        AgentConfig cfg)
      : task_(task),
        cls_(cls),
        id_(id),
        n_(task.num_agents()),
        ep_(endpoint),
        cfg_(cfg),
        heuristic_(build_heuristic_task(task, cls, id), cfg.heuristic),
        opacifier_(id, task.num_agents(), cls.private_vars(id), task.init, cfg.privacy, cfg.seed),
        space_(cfg.mode == SearchMode::kSatisficing ? Policy::kGreedy : Policy::kAStar),
        alive_(task.num_agents(), true) {
    if (n_ > 64 && cfg.robustness) throw std::invalid_argument("robustness mode supports 64 agents");
    for (ActionId a = 0; a < task.num_actions(); ++a)
      if (task.actions[a].owner == id) own_actions_.push_back(a);
    relevance_.resize(n_);
    for (ActionId a = 0; a < task.num_actions(); ++a) {
      const AgentId owner = task.actions[a].owner;
      if (owner != id && cls.action_public[a]) relevance_[owner].push_back(cls.projections[a]->pre);
    }
    std::vector<std::vector<VarId>> private_of(n_);
    for (AgentId k = 0; k < n_; ++k) private_of[k] = cls.private_vars(k);
    PackedState root = opacifier_.initial_view(task.init, private_of);
    const Estimate h = heuristic_.evaluate(root.slots);
    records_.push_back(Record{});
    if (!h.infinite()) {
      const NodeId nid = space_.insert(NodeKey{std::move(root), 0}, 0, h.value);
      note_node(nid, 0, true);
    }
    dirty_ = true;
  }

  AgentId id() const { return id_; }
  bool finished() const { return outcome_ != Outcome::kRunning; }
  Outcome outcome() const { return outcome_; }
  const std::vector<ActionId>& plan() const { return plan_; }
  const AgentStats& stats() const { return stats_; }
  const Endpoint& endpoint() const { return ep_; }
  Cost open_min_f() const { return space_.open().min_f(); }
  std::size_t open_size() const { return space_.open().size(); }
  std::size_t num_nodes() const { return space_.size(); }
  std::optional<Candidate> best_candidate() const { return best(); }
  bool audit() const { return space_.audit(); }

  void set_confirm_hook(ConfirmHook hook) { on_confirm_ = std::move(hook); }

  // Drain the inbox, then expand at most one node. Returns false when the
  // call changed nothing.
  bool step() {
    if (finished()) return false;
    bool active = false;
    for (auto& m : ep_.poll()) {
      active = true;
      process(m);
      if (finished()) return true;
    }
    if (expand_one()) return true;
    if (maybe_start_snapshot()) return true;
    return active;
  }

  // Another agent crashed: forget everything that depends on it.
  void handle_failure(AgentId failed) {
    if (failed < 0 || failed >= n_ || !alive_[failed] || failed == id_) return;
    alive_[failed] = false;
    failed_mask_ |= bit(failed);
    ++epoch_;
    snapshots_.clear();
    collection_.reset();
    ack_round_.reset();
    if (cfg_.robustness) {
      std::vector<NodeId> doomed;
      space_.open().for_each([&](NodeId nid) {
        if (space_.key(nid).participants & bit(failed)) doomed.push_back(nid);
      });
      for (NodeId nid : doomed) space_.kill(nid);
    }
    std::erase_if(candidates_, [&](const Candidate& c) { return involves_failed(c); });
    if (awaiting_traceback_ && involves_failed(*awaiting_traceback_)) awaiting_traceback_.reset();
    if (cfg_.mode == SearchMode::kSatisficing) {
      locked_ = !candidates_.empty();
      auto b = best();
      if (b && b->proposer == id_ && !awaiting_traceback_) start_ack_round(*b);
    }
    dirty_ = true;
  }

 private:
  static std::uint64_t bit(AgentId a) { return std::uint64_t{1} << a; }

  bool involves_failed(const Candidate& c) const {
    return (c.participants & failed_mask_) != 0 || !alive_[c.proposer];
  }

  std::vector<AgentId> live_peers() const {
    std::vector<AgentId> out;
    for (AgentId k = 0; k < n_; ++k)
      if (k != id_ && alive_[k]) out.push_back(k);
    return out;
  }
  int live_count() const { return static_cast<int>(std::count(alive_.begin(), alive_.end(), true)); }

  std::optional<Candidate> best() const {
    std::optional<Candidate> b;
    for (const auto& c : candidates_)
      if (better(c, b)) b = c;
    return b;
  }

  void remember(const Candidate& c) {
    if (std::find(candidates_.begin(), candidates_.end(), c) == candidates_.end())
      candidates_.push_back(c);
  }

  void note_node(NodeId nid, RecordId rec, bool local) {
    if (nid >= node_record_.size()) {
      node_record_.resize(nid + 1, kNoRecord);
      local_.resize(nid + 1, false);
    }
    node_record_[nid] = rec;
    if (local && !local_[nid]) {
      local_[nid] = true;
      ++stats_.own_states;
    }
  }

  RecordId add_record(Record r) {
    records_.push_back(r);
    return static_cast<RecordId>(records_.size() - 1);
  }

  bool is_goal(const PackedState& s) const { return goal_holds(task_, s.slots); }

  bool relevant(const PackedState& s, AgentId peer) const {
    for (const auto& pre : relevance_[peer])
      if (holds(pre, s.slots)) return true;
    return false;
  }

  // ------------------------------------------------------------------------
  // Messages

  void process(const Message& m) {
    if (m.sender >= 0 && m.sender < n_ && !alive_[m.sender]) return;
    std::visit([&](const auto& body) { handle(m.sender, body); }, m.body);
  }

  // Chandy-Lamport channel recording: messages that arrive on a channel
  // whose marker is still outstanding belong to the snapshot.
  void record_in_channel(AgentId from, Cost f, bool is_state, const std::optional<Candidate>& c) {
    for (auto& [sid, snap] : snapshots_) {
      if (!snap.pending[from]) continue;
      if (is_state) {
        snap.min_f = std::min(snap.min_f, f);
        ++snap.count;
      }
      if (better(c, snap.best)) snap.best = c;
    }
  }

  void handle(AgentId from, const StateMsg& m) {
    if (cfg_.robustness && (m.participants & failed_mask_)) return;
    record_in_channel(from, add_cost(m.g, m.h), true, std::nullopt);
    dirty_ = true;
    ++stats_.states_received;
    NodeKey key{opacifier_.deopacify(m.state), cfg_.robustness ? m.participants : 0};
    Estimate h = heuristic_.evaluate(key.state.slots);
    h = combine_received(h, Estimate{m.h, m.h_admissible}, cfg_.combine);
    if (h.infinite()) return;
    if (h.value < m.h) ++stats_.f_decreases;
    auto existing = space_.lookup(key);
    if (existing && !(m.g < space_.node(*existing).g)) return;
    if (existing && space_.node(*existing).status == NodeStatus::kDead) return;
    const RecordId rec = add_record(Record{-1, kNoRecord, m.g, from, m.record, false});
    NodeId nid;
    if (existing) {
      nid = *existing;
      if (space_.node(nid).status == NodeStatus::kClosed) ++stats_.reopened;
      space_.set_open(nid, m.g, h.value);
    } else {
      nid = space_.insert(key, m.g, h.value);
    }
    note_node(nid, rec, false);
  }

  void handle(AgentId from, const GoalCandidateMsg& m) {
    const Candidate& c = m.candidate;
    record_in_channel(from, kInfiniteCost, false, c);
    if (involves_failed(c)) return;
    dirty_ = true;
    if (cfg_.mode == SearchMode::kSatisficing) {
      const auto b = best();
      const bool deny = b && better(*b, c);
      SnapshotReportMsg reply;
      reply.id = SnapshotId{from, m.round, epoch_};
      reply.round = ReportRound::kAck;
      reply.confirm = !deny;
      ep_.send(from, Message{id_, reply});
      if (!deny) locked_ = true;
    }
    remember(c);
  }

  void handle(AgentId from, const SnapshotMarkerMsg& m) {
    if (m.id.epoch != epoch_) return;
    auto it = snapshots_.find(m.id);
    if (it == snapshots_.end()) {
      it = open_snapshot(m.id);
      it->second.pending[from] = false;
    } else {
      it->second.pending[from] = false;
    }
    maybe_report(it);
  }

  void handle(AgentId from, const SnapshotReportMsg& m) {
    if (m.id.epoch != epoch_) return;
    if (m.round == ReportRound::kAck) {
      if (!ack_round_ || ack_round_->round != m.id.seq || m.id.initiator != id_) return;
      if (!m.confirm) {
        ack_round_.reset();  // someone knows a better solution
        return;
      }
      if (++ack_round_->acks == ack_round_->needed) {
        const Candidate c = ack_round_->candidate;
        ack_round_.reset();
        confirm(c);
      }
      return;
    }
    (void)from;
    merge_report(m.id, m.min_f, m.open_count, m.best);
  }

  void handle(AgentId, const TracebackRequestMsg& m) { walk(m.record, m.suffix, m.initiator); }

  void handle(AgentId, const TracebackSegmentMsg& m) {
    if (!awaiting_traceback_) return;
    finish(Outcome::kSolved, m.plan);
  }

  void handle(AgentId, const TerminateMsg& m) {
    outcome_ = m.outcome;
    plan_ = m.plan;
  }

  void handle(AgentId, const FailureNoticeMsg& m) { handle_failure(m.failed); }

  // ------------------------------------------------------------------------
  // Search

  bool expand_one() {
    auto top = space_.peek();
    if (!top) return false;
    const NodeInfo info = space_.node(*top);
    const bool goal = is_goal(space_.key(*top).state);
    if (cfg_.mode == SearchMode::kOptimal && !cfg_.explore) {
      const auto b = best();
      if (b && info.f() >= b->cost) {
        // only a goal node that would become the new best is worth expanding
        if (!goal || !better(Candidate{info.g, id_}, *b)) return false;
      }
    }
    space_.extract_min();
    space_.move_to_closed(*top);
    ++stats_.expansions;
    dirty_ = true;
    const NodeId nid = *top;
    const RecordId rec = node_record_[nid];

    if (goal && !cfg_.explore) {
      const auto b = best();
      const Candidate mine{info.g, id_, rec, space_.key(nid).participants};
      const bool may_propose = cfg_.mode == SearchMode::kOptimal || !locked_;
      if (may_propose && better(mine, b)) propose(nid, mine);
      return true;
    }

    // copy: the registry may rehash while successors are inserted
    const NodeKey key = space_.key(nid);
    if (cfg_.timing == SendTiming::kLazy && records_[rec].created_public) send_state(nid, key);

    const Cost parent_f = info.f();
    for (ActionId a : own_actions_) {
      const Action& act = task_.actions[a];
      if (!applicable(act, key.state.slots)) continue;
      NodeKey child{key.state, key.participants};
      apply_in_place(act, child.state.slots);
      if (cfg_.robustness) child.participants |= bit(id_);
      ++stats_.generated;
      const Cost g = add_cost(info.g, act.cost);
      Estimate h = heuristic_.evaluate(child.state.slots);
      if (h.infinite()) continue;
      Cost hv = h.value;
      if (cfg_.mode == SearchMode::kOptimal) hv = pathmax(parent_f, g, hv);
      if (add_cost(g, hv) < parent_f) ++stats_.f_decreases;
      auto [cid, outcome] = space_.push(child, g, hv);
      if (outcome == PushOutcome::kDiscarded) continue;
      if (outcome == PushOutcome::kReopened) ++stats_.reopened;
      const RecordId crec = add_record(Record{a, rec, g, -1, kNoRecord, cls_.action_public[a]});
      note_node(cid, crec, true);
      if (cfg_.timing == SendTiming::kEager && cls_.action_public[a]) send_state(cid, child);
    }
    return true;
  }

  void send_state(NodeId nid, const NodeKey& key) {
    const NodeInfo& info = space_.node(nid);
    for (AgentId peer : live_peers()) {
      if (!relevant(key.state, peer)) continue;
      StateMsg m;
      m.state = opacifier_.opacify(key.state);
      m.g = info.g;
      m.h = info.h;
      m.h_admissible = heuristic_.admissible();
      m.record = node_record_[nid];
      m.participants = key.participants;
      ep_.send(peer, Message{id_, std::move(m)});
      ++stats_.states_sent;
    }
  }

  void propose(NodeId nid, const Candidate& c) {
    ++stats_.proposals;
    remember(c);
    GoalCandidateMsg m;
    m.state = opacifier_.opacify(space_.key(nid).state);
    m.candidate = c;
    if (cfg_.mode == SearchMode::kSatisficing) {
      locked_ = true;
      start_ack_round(c, std::move(m));
    } else {
      ep_.broadcast(Message{id_, std::move(m)}, live_peers());
    }
  }

  void start_ack_round(const Candidate& c, std::optional<GoalCandidateMsg> msg = std::nullopt) {
    GoalCandidateMsg m = msg ? std::move(*msg) : GoalCandidateMsg{PackedState{}, c, 0};
    if (!msg) {
      // re-announce after a failure; the state itself is not needed by peers
      m.state = PackedState::plain({}, n_);
    }
    m.round = ++ack_seq_;
    const auto peers = live_peers();
    ack_round_ = AckRound{m.round, c, 0, static_cast<int>(peers.size())};
    ep_.broadcast(Message{id_, std::move(m)}, peers);
    if (peers.empty()) {
      ack_round_.reset();
      confirm(c);
    }
  }

  // ------------------------------------------------------------------------
  // Snapshots

  struct SnapshotState {
    Cost min_f = kInfiniteCost;
    std::uint64_t count = 0;
    std::optional<Candidate> best;
    std::vector<bool> pending;  // channels whose marker has not arrived
  };

  struct Collection {
    SnapshotId id;
    int reports = 0;
    int needed = 0;
    Cost min_f = kInfiniteCost;
    std::uint64_t count = 0;
    std::optional<Candidate> best;
  };

  struct AckRound {
    std::uint32_t round = 0;
    Candidate candidate;
    int acks = 0;
    int needed = 0;
  };

  std::map<SnapshotId, SnapshotState>::iterator open_snapshot(const SnapshotId& sid) {
    SnapshotState snap;
    snap.min_f = space_.open().min_f();
    snap.count = space_.open().size();
    snap.best = best();
    snap.pending.assign(n_, false);
    for (AgentId k : live_peers()) snap.pending[k] = true;
    auto it = snapshots_.emplace(sid, std::move(snap)).first;
    ep_.broadcast(Message{id_, SnapshotMarkerMsg{sid, best() ? best()->cost : kInfiniteCost}},
                  live_peers());
    return it;
  }

  void maybe_report(std::map<SnapshotId, SnapshotState>::iterator it) {
    const auto& snap = it->second;
    if (std::any_of(snap.pending.begin(), snap.pending.end(), [](bool p) { return p; })) return;
    const SnapshotId sid = it->first;
    if (sid.initiator == id_) {
      merge_report(sid, snap.min_f, snap.count, snap.best);
    } else {
      SnapshotReportMsg r;
      r.id = sid;
      r.round = ReportRound::kSnapshot;
      r.min_f = snap.min_f;
      r.open_count = snap.count;
      r.best = snap.best;
      ep_.send(sid.initiator, Message{id_, r});
    }
    snapshots_.erase(it);
  }

  bool maybe_start_snapshot() {
    if (!dirty_ || collection_ || awaiting_traceback_) return false;
    const auto b = best();
    bool ready = false;
    if (space_.open().empty()) {
      ready = cfg_.mode == SearchMode::kOptimal || !b;
    } else if (cfg_.mode == SearchMode::kOptimal && !cfg_.explore && b) {
      ready = space_.open().min_f() >= b->cost;
    }
    if (!ready) return false;
    dirty_ = false;
    ++stats_.snapshots_started;
    const SnapshotId sid{id_, ++snapshot_seq_, epoch_};
    collection_ = Collection{sid, 0, live_count(), kInfiniteCost, 0, std::nullopt};
    auto it = open_snapshot(sid);
    maybe_report(it);
    return true;
  }

  void merge_report(const SnapshotId& sid, Cost min_f, std::uint64_t count,
                    const std::optional<Candidate>& b) {
    if (!collection_ || collection_->id != sid) return;
    auto& col = *collection_;
    ++col.reports;
    col.min_f = std::min(col.min_f, min_f);
    col.count += count;
    if (better(b, col.best)) col.best = b;
    if (col.reports < col.needed) return;
    const Collection done = col;
    collection_.reset();
    conclude(done);
  }

  void conclude(const Collection& col) {
    if (!col.best) {
      if (col.count == 0) finish(Outcome::kUnsolvable, {});
      return;
    }
    if (cfg_.mode != SearchMode::kOptimal) return;
    if (col.min_f >= col.best->cost) {
      ++stats_.snapshots_confirmed;
      confirm(*col.best);
    }
  }

  // ------------------------------------------------------------------------
  // Trace-back

  void confirm(const Candidate& c) {
    if (on_confirm_) on_confirm_(id_, c);
    awaiting_traceback_ = c;
    if (c.proposer == id_) {
      walk(c.record, {}, id_);
    } else {
      ep_.send(c.proposer, Message{id_, TracebackRequestMsg{id_, c.record, {}}});
    }
  }

  void walk(RecordId rec, std::vector<ActionId> suffix, AgentId initiator) {
    while (true) {
      if (rec >= records_.size()) throw std::logic_error("trace-back reached an unknown record");
      const Record& r = records_[rec];
      if (r.action >= 0) {
        suffix.push_back(r.action);
        rec = r.parent;
        continue;
      }
      if (r.origin >= 0) {
        ep_.send(r.origin, Message{id_, TracebackRequestMsg{initiator, r.origin_record, std::move(suffix)}});
        return;
      }
      break;  // root
    }
    std::reverse(suffix.begin(), suffix.end());
    if (initiator == id_) {
      finish(Outcome::kSolved, std::move(suffix));
    } else if (alive_[initiator]) {
      ep_.send(initiator, Message{id_, TracebackSegmentMsg{std::move(suffix)}});
    }
  }

  void finish(Outcome outcome, std::vector<ActionId> plan) {
    outcome_ = outcome;
    plan_ = std::move(plan);
    ep_.broadcast(Message{id_, TerminateMsg{outcome_, plan_}}, live_peers());
  }

  const Task& task_;
  const Classification& cls_;
  AgentId id_;
  int n_;
  Endpoint& ep_;
  AgentConfig cfg_;
  Heuristic heuristic_;
  Opacifier opacifier_;
  SearchSpace<NodeKey, NodeKeyHash> space_;
  std::vector<ActionId> own_actions_;
  std::vector<std::vector<std::vector<Fact>>> relevance_;  // peer -> projected public preconditions

  std::vector<Record> records_;  // records_[0] is the root
  std::vector<RecordId> node_record_;
  std::vector<bool> local_;

  std::vector<Candidate> candidates_;
  bool locked_ = false;
  std::optional<AckRound> ack_round_;
  std::uint32_t ack_seq_ = 0;

  std::map<SnapshotId, SnapshotState> snapshots_;
  std::optional<Collection> collection_;
  std::uint32_t snapshot_seq_ = 0;
  std::uint32_t epoch_ = 0;
  bool dirty_ = false;
  std::optional<Candidate> awaiting_traceback_;

  std::vector<bool> alive_;
  std::uint64_t failed_mask_ = 0;

  Outcome outcome_ = Outcome::kRunning;
  std::vector<ActionId> plan_;
  AgentStats stats_;
  ConfirmHook on_confirm_;
};

}  // namespace mafs
