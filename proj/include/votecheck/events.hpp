#pragma once

#include <optional>
#include <string>
#include <vector>

#include "votecheck/facts.hpp"
#include "votecheck/idlist.hpp"

namespace votecheck {

using EventId = uint32_t;
using EventSetId = uint32_t;
using RenameRelId = uint32_t;
inline constexpr EventId kNoEvent = 0xFFFFFFFFu;

// Every event belongs to exactly one class; classes double as the channel
// granularity for synchronization, hiding and renaming masks.
enum class EvClass : uint8_t {
  Tau = 0,
  Tick,       // termination marker
  Nsbcomm,    // overhearable, non-blockable agent channel
  Scomm,      // fully private agent channel (ballot handovers)
  Take,       // intruder intercepts an outgoing message
  Fake,       // intruder delivers a spoofed message
  Learn,      // intruder cell input
  Say,        // intruder cell output
  Infer,      // deduction firing (internal bookkeeping)
  Knows,      // intruderknows secrecy flag
  OpenElection,
  CloseElection,
  EnterBooth,
  LeaveBooth,
  BagEmpty,
  Done,
  Announce,
};
inline constexpr uint32_t kClassCount = 17;

constexpr uint32_t class_bit(EvClass c) { return 1u << static_cast<uint32_t>(c); }

inline constexpr uint32_t kTauBit = class_bit(EvClass::Tau);
inline constexpr uint32_t kTickBit = class_bit(EvClass::Tick);
// Every class a user-facing set may mention (everything but Tau and Tick).
inline constexpr uint32_t kVisibleMask =
    ((1u << kClassCount) - 1) & ~(kTauBit | kTickBit);
inline constexpr uint32_t kCommMask =
    class_bit(EvClass::Nsbcomm) | class_bit(EvClass::Scomm) |
    class_bit(EvClass::Take) | class_bit(EvClass::Fake);

struct EventNode {
  EvClass cls;
  int32_t a = -1;  // sender / fact / voter / candidate
  int32_t b = -1;  // receiver / announce count
  int32_t c = -1;  // payload
  bool operator==(const EventNode&) const = default;
};

// Interning store for events, event sets and renaming relations. All ids are
// dense and deterministic given a deterministic construction order; the store
// is frozen before exploration so ids never depend on search order.
class EventStore {
 public:
  explicit EventStore(FactStore& facts);

  EventId tau() const { return tau_; }
  EventId tick() const { return tick_; }

  // Communication event on one of the four agent channels.
  EventId comm(EvClass cls, FactId sender, FactId receiver, FactId payload);
  EventId learn(FactId f) { return fact_event(EvClass::Learn, f); }
  EventId say(FactId f) { return fact_event(EvClass::Say, f); }
  EventId infer(FactId f) { return fact_event(EvClass::Infer, f); }
  // One event per ground deduction step: premises (a fact set) to conclusion.
  // Cells composing the reference intruder synchronize on these.
  EventId infer_rule(FactId premise_set, FactId conclusion);
  EventId knows(FactId f) { return fact_event(EvClass::Knows, f); }
  EventId open_election() { return nullary(EvClass::OpenElection); }
  EventId close_election() { return nullary(EvClass::CloseElection); }
  EventId bag_empty() { return nullary(EvClass::BagEmpty); }
  EventId done() { return nullary(EvClass::Done); }
  EventId enter_booth(FactId voter) { return booth(EvClass::EnterBooth, voter); }
  EventId leave_booth(FactId voter) { return booth(EvClass::LeaveBooth, voter); }
  EventId announce(FactId candidate, int count);

  const EventNode& node(EventId e) const { return nodes_[e]; }
  EvClass cls(EventId e) const { return nodes_[e].cls; }
  uint32_t cls_bit(EventId e) const { return class_bit(nodes_[e].cls); }
  size_t size() const { return nodes_.size(); }

  std::string render(EventId e) const;
  // Parses a line produced by render(); unknown names or syntax raise
  // config_error. Inverse of render on every constructed event.
  EventId parse(std::string_view line);

  // --- event sets -----------------------------------------------------
  // A set is (class mask) plus explicit additions minus explicit removals.
  // Tau and Tick may never be members.
  EventSetId set(uint32_t class_mask, std::span<const EventId> plus = {},
                 std::span<const EventId> minus = {});
  EventSetId empty_set() const { return empty_set_; }
  bool member(EventSetId s, EventId e) const;
  uint32_t set_mask(EventSetId s) const { return sets_[s].mask; }
  std::span<const EventId> set_plus(EventSetId s) const {
    return lists_.get(sets_[s].plus);
  }
  std::span<const EventId> set_minus(EventSetId s) const {
    return lists_.get(sets_[s].minus);
  }
  // Union with whole classes (used when pushing a sync set through renaming).
  EventSetId set_with_mask(EventSetId s, uint32_t extra_mask);

  // --- renaming relations ----------------------------------------------
  // strict_mask: classes whose every event MUST have an entry; producing an
  // event of a strict class with no entry is a wiring error. An entry with an
  // empty target list suppresses the event.
  RenameRelId rename_rel(std::vector<std::pair<EventId, EventId>> pairs,
                         uint32_t strict_mask,
                         std::vector<EventId> suppressed = {});
  bool in_domain(RenameRelId r, EventId e) const;
  std::span<const EventId> targets(RenameRelId r, EventId e) const;
  std::span<const EventId> preimages(RenameRelId r, EventId e) const;
  uint32_t strict_mask(RenameRelId r) const { return rels_[r].strict; }
  uint32_t source_mask(RenameRelId r) const { return rels_[r].src_mask; }
  uint32_t target_mask(RenameRelId r) const { return rels_[r].tgt_mask; }

  // Rename one event: identity when outside the domain (wiring error if its
  // class is strict), otherwise the entry's targets.
  // Tri-state result is exposed through in_domain + targets.

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  const FactStore& facts() const { return facts_; }

 private:
  struct SetRec {
    uint32_t mask;
    IdListId plus;
    IdListId minus;
  };
  struct RelRec {
    uint32_t strict;
    uint32_t src_mask;
    uint32_t tgt_mask;
    // CSR over sorted unique source events / target events.
    std::vector<EventId> src_keys;
    std::vector<uint32_t> src_off;
    std::vector<EventId> src_vals;
    std::vector<EventId> tgt_keys;
    std::vector<uint32_t> tgt_off;
    std::vector<EventId> tgt_vals;
  };

  EventId intern(EventNode n);
  EventId fact_event(EvClass cls, FactId f);
  EventId nullary(EvClass cls);
  EventId booth(EvClass cls, FactId voter);

  FactStore& facts_;
  std::vector<EventNode> nodes_;
  std::unordered_map<uint64_t, std::vector<EventId>> bucket_;
  IdListPool lists_;
  std::vector<SetRec> sets_;
  std::unordered_map<uint64_t, std::vector<EventSetId>> set_bucket_;
  std::vector<RelRec> rels_;
  EventId tau_ = kNoEvent;
  EventId tick_ = kNoEvent;
  EventSetId empty_set_ = 0;
  bool frozen_ = false;
};

}  // namespace votecheck
