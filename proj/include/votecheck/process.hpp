#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "votecheck/events.hpp"

namespace votecheck {

using NodeId = uint32_t;
using DefId = uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

// Raised when the brute-force trace oracle exceeds its work cap or cannot
// soundly bound a hidden recursion.
struct oracle_overflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Op : uint8_t {
  Stop,
  Skip,
  Prefix,
  ExtChoice,
  IntChoice,
  Parallel,  // interleaving is the empty-interface case
  Hide,
  Rename,
  Call,
  Spy,
};

struct NodeRec {
  Op op;
  uint32_t x = kNoNode;
  uint32_t y = kNoNode;
  uint32_t z = kNoNode;
  bool operator==(const NodeRec&) const = default;
};

struct Transition {
  EventId ev;
  NodeId to;
  bool operator==(const Transition&) const = default;
};

// Supplier of the intruder's compressed transition structure. Knowledge
// states are opaque u32 handles owned by the implementation; the kernel only
// threads them through Spy nodes.
class SpyBehavior {
 public:
  virtual ~SpyBehavior() = default;
  // All enabled (event, successor-knowledge) pairs, sorted by event id.
  virtual void initials(uint32_t know,
                        std::vector<std::pair<EventId, uint32_t>>& out) const = 0;
  // Successor knowledge after one event, if enabled.
  virtual std::optional<uint32_t> after(uint32_t know, EventId e) const = 0;
  // Enabled pairs whose event class is NOT in class_mask (cheap subset query).
  virtual void initials_outside(uint32_t know, uint32_t class_mask,
                                std::vector<std::pair<EventId, uint32_t>>& out) const = 0;
  // Every event the behavior could ever perform.
  virtual void alphabet(std::vector<EventId>& out) const = 0;
};

using TraceSet = std::set<std::vector<EventId>>;

// Hash-consed process terms plus their small-step semantics. All ids are
// deterministic: terms are built and explored in deterministic order.
class Kernel {
 public:
  explicit Kernel(EventStore& events);

  // ----- term builders --------------------------------------------------
  NodeId stop() const { return stop_; }
  NodeId skip() const { return skip_; }
  NodeId prefix(EventId e, NodeId cont);
  NodeId ext_choice(std::span<const NodeId> branches);
  NodeId int_choice(std::span<const NodeId> branches);
  NodeId parallel(NodeId a, NodeId b, EventSetId interface_set);
  NodeId interleave(NodeId a, NodeId b);
  NodeId hide(NodeId p, EventSetId hidden);
  NodeId rename_proc(NodeId p, RenameRelId rel);

  // Definitions: a name bound to a body builder invoked per argument tuple.
  DefId define(std::string name,
               std::function<NodeId(std::span<const FactId>)> body);
  DefId def_id(std::string_view name) const;  // wiring_error when missing
  bool has_def(std::string_view name) const {
    return def_ids_.contains(std::string(name));
  }
  NodeId call(DefId def, std::span<const FactId> args = {});
  NodeId call(std::string_view name, std::span<const FactId> args = {});

  uint32_t add_spy(const SpyBehavior* behavior);
  NodeId spy(uint32_t behavior, uint32_t know);

  // ----- semantics -------------------------------------------------------
  // Enabled transitions, memoized, sorted by event id (ties keep generation
  // order). Tau transitions use the tau event; termination uses tick.
  std::span<const Transition> initials(NodeId n);
  // Chases Call expansions to a non-Call term (the canonical state identity).
  NodeId resolve(NodeId n);
  // Successors of n under a specific visible non-tick event.
  void probe(NodeId n, EventId e, std::vector<NodeId>& out);
  bool can_tick(NodeId n);
  // Sorted set of visible events the term can ever perform (syntactic).
  std::vector<EventId> alphabet(NodeId n);

  // ----- testing oracle ---------------------------------------------------
  // Exact tau-free trace language up to `depth`, by denotational recursion
  // independent of initials(). `work_cap` bounds total recursion work.
  TraceSet traces_bruteforce(NodeId p, int depth, size_t work_cap = 2'000'000);

  // ----- introspection ----------------------------------------------------
  const NodeRec& node(NodeId n) const { return nodes_[n]; }
  Op op(NodeId n) const { return nodes_[n].op; }
  std::span<const uint32_t> children(NodeId n) const;  // choice branches
  std::span<const uint32_t> call_args(NodeId n) const;
  const std::string& def_name(DefId d) const { return def_names_[d]; }
  EventStore& events() { return events_; }
  size_t size() const { return nodes_.size(); }

 private:
  struct BfCtx {
    size_t work = 0;
    size_t cap = 0;
    int hide_slack = 12;
  };

  struct TrSpan {
    const Transition* ptr = nullptr;
    uint32_t len = 0;
  };

  NodeId intern(NodeRec n);
  NodeId choice(Op op, std::span<const NodeId> branches);
  void compute_initials(NodeId n, std::vector<Transition>& out);
  void free_tau_offers(NodeId n, EventSetId sync, std::vector<Transition>& out);
  TrSpan store_transitions(const std::vector<Transition>& ts);
  void alphabet_walk(NodeId n, int transformer_depth,
                     std::unordered_set<NodeId>& visited, std::set<EventId>& out);
  TraceSet bf(NodeId n, int depth, BfCtx& ctx);
  void bf_merge(std::span<const EventId> t1, std::span<const EventId> t2,
                EventSetId sync, size_t depth, std::vector<EventId>& acc,
                TraceSet& out, BfCtx& ctx);
  void bf_rename(std::span<const EventId> t, size_t i, RenameRelId rel,
                 std::vector<EventId>& acc, TraceSet& out, BfCtx& ctx);

  EventStore& events_;
  std::vector<NodeRec> nodes_;
  std::unordered_map<uint64_t, std::vector<NodeId>> bucket_;
  IdListPool lists_;

  std::vector<std::string> def_names_;
  std::vector<std::function<NodeId(std::span<const FactId>)>> def_bodies_;
  std::unordered_map<std::string, DefId> def_ids_;
  std::unordered_map<uint64_t, NodeId> expansion_;  // (def, args) -> body
  std::unordered_map<NodeId, NodeId> resolve_;

  std::vector<const SpyBehavior*> spies_;

  // initials memo, indexed by node id; spans point into stable chunks.
  std::vector<TrSpan> initials_memo_;
  std::vector<std::vector<Transition>> arena_;
  int depth_guard_ = 0;

  NodeId stop_ = kNoNode;
  NodeId skip_ = kNoNode;
};

}  // namespace votecheck
