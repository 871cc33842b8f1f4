#pragma once

// State identity and open/closed bookkeeping shared by the centralized and
// distributed searches.

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "mafs/model.hpp"

namespace mafs {

namespace detail {
inline void hash_mix(std::size_t& seed, std::uint64_t v) {
  // splitmix64 finalizer folded into a boost-style combine
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  v ^= v >> 31;
  seed ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}
}  // namespace detail

struct StateHash {
  std::size_t operator()(const State& s) const {
    std::size_t seed = s.size();
    for (Value v : s) detail::hash_mix(seed, static_cast<std::uint32_t>(v));
    return seed;
  }
};

/// Opaque stand-in for one agent's private state segment.
struct Token {
  std::array<std::uint8_t, 16> bytes{};
  auto operator<=>(const Token&) const = default;
  bool is_initial() const { return *this == Token{}; }
};

/// Slot value used where another agent's private segment was replaced by a token.
inline constexpr Value kOpaqueSlot = -1;

/// A full assignment as seen by one agent: public and own-private slots are
/// plain, other agents' private slots may be hidden behind their tokens.
struct PackedState {
  std::vector<Value> slots;
  std::vector<std::optional<Token>> tokens;  // indexed by agent; nullopt = plain

  bool operator==(const PackedState&) const = default;

  static PackedState plain(State s, int num_agents) {
    return PackedState{std::move(s), std::vector<std::optional<Token>>(num_agents)};
  }
};

struct PackedStateHash {
  std::size_t operator()(const PackedState& s) const {
    std::size_t seed = StateHash{}(s.slots);
    for (const auto& t : s.tokens) {
      if (!t) {
        detail::hash_mix(seed, 0x5a5a);
        continue;
      }
      std::uint64_t lo = 0, hi = 0;
      std::memcpy(&lo, t->bytes.data(), 8);
      std::memcpy(&hi, t->bytes.data() + 8, 8);
      detail::hash_mix(seed, lo);
      detail::hash_mix(seed, hi);
    }
    return seed;
  }
};

enum class Outcome : std::uint8_t { kRunning = 0, kSolved = 1, kUnsolvable = 2, kTimeout = 3, kMemory = 4 };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kRunning: return "running";
    case Outcome::kSolved: return "solved";
    case Outcome::kUnsolvable: return "unsolvable";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kMemory: return "memory";
  }
  return "?";
}

// --------------------------------------------------------------------------
// Open list

enum class Policy {
  kGreedy,  // key h (satisficing MAFS)
  kAStar,   // key f = g + h (MAD-A*, A*, PP-A*)
};

using NodeId = std::uint32_t;

/// Priority queue with a membership index. Ties: lower h, then insertion order.
class OpenList {
 public:
  explicit OpenList(Policy policy = Policy::kAStar) : policy_(policy) {}

  Policy policy() const { return policy_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  bool contains(NodeId id) const { return index_.count(id) > 0; }

  /// Inserts, or re-keys an existing member (which then counts as a fresh insertion).
  void push(NodeId id, Cost g, Cost h) {
    erase(id);
    const Cost f = add_cost(g, h);
    Entry e{policy_ == Policy::kAStar ? f : h, h, next_seq_++, id, f};
    index_.emplace(id, entries_.insert(e).first);
    f_values_.insert(f);
  }

  std::optional<NodeId> extract_min() {
    if (entries_.empty()) return std::nullopt;
    auto it = entries_.begin();
    const NodeId id = it->id;
    f_values_.erase(f_values_.find(it->f));
    entries_.erase(it);
    index_.erase(id);
    return id;
  }

  std::optional<NodeId> peek() const {
    if (entries_.empty()) return std::nullopt;
    return entries_.begin()->id;
  }

  bool erase(NodeId id) {
    auto it = index_.find(id);
    if (it == index_.end()) return false;
    f_values_.erase(f_values_.find(it->second->f));
    entries_.erase(it->second);
    index_.erase(it);
    return true;
  }

  /// Smallest f over members, kInfiniteCost when empty.
  Cost min_f() const { return f_values_.empty() ? kInfiniteCost : *f_values_.begin(); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& e : entries_) fn(e.id);
  }

  /// Debug audit: index and priority structure agree.
  bool consistent() const {
    if (index_.size() != entries_.size() || f_values_.size() != entries_.size()) return false;
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      auto found = index_.find(it->id);
      if (found == index_.end() || found->second != it) return false;
    }
    return true;
  }

 private:
  struct Entry {
    Cost key;
    Cost h;
    std::uint64_t seq;
    NodeId id;
    Cost f;
    bool operator<(const Entry& o) const {
      if (key != o.key) return key < o.key;
      if (h != o.h) return h < o.h;
      return seq < o.seq;
    }
  };

  Policy policy_;
  std::set<Entry> entries_;
  std::unordered_map<NodeId, std::set<Entry>::iterator> index_;
  std::multiset<Cost> f_values_;
  std::uint64_t next_seq_ = 0;
};

// --------------------------------------------------------------------------
// Search space: state registry + per-node g/h + open list + closed marks.

enum class NodeStatus : std::uint8_t { kOpen, kClosed, kDead };

struct NodeInfo {
  Cost g = 0;
  Cost h = 0;
  Cost closed_f = kInfiniteCost;  // f at the moment the node was last closed
  NodeStatus status = NodeStatus::kOpen;
  Cost f() const { return add_cost(g, h); }
};

enum class PushOutcome { kInserted, kImproved, kReopened, kDiscarded };

template <typename Key, typename Hash>
class SearchSpace {
 public:
  explicit SearchSpace(Policy policy) : open_(policy) {}

  std::optional<NodeId> lookup(const Key& key) const {
    auto it = ids_.find(key);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<Cost> lookup_g(const Key& key) const {
    auto id = lookup(key);
    if (!id) return std::nullopt;
    return nodes_[*id].g;
  }

  const Key& key(NodeId id) const { return *keys_[id]; }
  const NodeInfo& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  const OpenList& open() const { return open_; }

  /// Registers an unseen key as an open node.
  NodeId insert(const Key& key, Cost g, Cost h) {
    auto [it, fresh] = ids_.emplace(key, static_cast<NodeId>(nodes_.size()));
    if (!fresh) throw std::logic_error("SearchSpace::insert: key already present");
    keys_.push_back(&it->first);
    nodes_.push_back(NodeInfo{g, h, kInfiniteCost, NodeStatus::kOpen});
    open_.push(it->second, g, h);
    return it->second;
  }

  /// Default dominance handling: unseen keys enter open; open nodes improve on
  /// strictly lower g; closed nodes reopen only when f is strictly below the
  /// f they were closed with.
  std::pair<NodeId, PushOutcome> push(const Key& key, Cost g, Cost h) {
    auto id = lookup(key);
    if (!id) return {insert(key, g, h), PushOutcome::kInserted};
    NodeInfo& n = nodes_[*id];
    switch (n.status) {
      case NodeStatus::kOpen:
        if (g < n.g) {
          set_open(*id, g, h);
          return {*id, PushOutcome::kImproved};
        }
        return {*id, PushOutcome::kDiscarded};
      case NodeStatus::kClosed:
        if (add_cost(g, h) < n.closed_f) {
          set_open(*id, g, h);
          return {*id, PushOutcome::kReopened};
        }
        return {*id, PushOutcome::kDiscarded};
      case NodeStatus::kDead:
        return {*id, PushOutcome::kDiscarded};
    }
    return {*id, PushOutcome::kDiscarded};
  }

  /// Reopen a closed node (or re-key an open one) with new values.
  void set_open(NodeId id, Cost g, Cost h) {
    NodeInfo& n = nodes_[id];
    n.g = g;
    n.h = h;
    n.status = NodeStatus::kOpen;
    open_.push(id, g, h);
  }

  /// Re-key with a new g only if f strictly drops below the closing f.
  bool reopen(const Key& key, Cost new_g) {
    auto id = lookup(key);
    if (!id) return false;
    NodeInfo& n = nodes_[*id];
    if (n.status != NodeStatus::kClosed || add_cost(new_g, n.h) >= n.closed_f) return false;
    set_open(*id, new_g, n.h);
    return true;
  }

  std::optional<NodeId> extract_min() { return open_.extract_min(); }
  std::optional<NodeId> peek() const { return open_.peek(); }

  void move_to_closed(NodeId id) {
    NodeInfo& n = nodes_[id];
    open_.erase(id);
    n.status = NodeStatus::kClosed;
    n.closed_f = n.f();
  }

  /// Drops a node from open for good (robustness mode).
  void kill(NodeId id) {
    open_.erase(id);
    nodes_[id].status = NodeStatus::kDead;
  }

  bool audit() const {
    if (!open_.consistent()) return false;
    bool ok = true;
    open_.for_each([&](NodeId id) { ok = ok && nodes_[id].status == NodeStatus::kOpen; });
    std::size_t open_count = 0;
    for (const auto& n : nodes_)
      if (n.status == NodeStatus::kOpen) ++open_count;
    return ok && open_count == open_.size();
  }

 private:
  OpenList open_;
  std::unordered_map<Key, NodeId, Hash> ids_;
  std::vector<const Key*> keys_;  // node id -> key stored in ids_
  std::vector<NodeInfo> nodes_;
};

}  // namespace mafs
