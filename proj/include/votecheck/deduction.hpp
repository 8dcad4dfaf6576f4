#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "votecheck/events.hpp"
#include "votecheck/facts.hpp"
#include "votecheck/process.hpp"

namespace votecheck {

// The shapes an attacker can build or take apart: one composition /
// decomposition pair per composite message shape, plus the three
// cryptographic primitive pairs.
enum class RuleName : uint8_t {
  SymEnc,
  SymDec,
  AsymEnc,
  AsymDec,
  SignSig,
  SignExt,
  BallotComp,
  BallotDcmp,
  RhsComp,
  RhsDcmp,
  VoteComp,
  VoteDcmp,
  DigBltComp,
  DigBltDcmp,
  RawBltComp,
  RawBltDcmp,
  IndComp,
  IndDcmp,
};
inline constexpr size_t kRuleNameCount = 18;
std::string_view rule_label(RuleName r);

// One ground inference: holding every premise yields the conclusion.
struct Deduction {
  RuleName rule;
  std::vector<FactId> premises;  // sorted, unique, nonempty
  FactId conclusion = kNoFact;   // never a premise of the same instance
};

// Every ground instance whose premises and conclusion lie inside the
// universe's fact families. The bounded shapes keep the count finite: no
// instance ever concludes a nested encryption or a key.
std::vector<Deduction> instantiate_rules(const Universe& u);

// What the attacker holds and which facts must be flagged if he ever
// comes to hold them.
struct KnowledgeState {
  const Universe* universe = nullptr;
  std::vector<Deduction> rules;
  std::vector<FactId> initial;  // sorted, unique
  std::vector<FactId> known;    // current holdings; starts equal to initial
  std::vector<FactId> banned;   // sorted, unique
};

// Baseline holdings — agent names, public keys, index values, and nonces —
// plus `extra` (typically leaked secret keys). Serial numbers are excluded:
// they only arrive through observed traffic. Every `extra` and `banned`
// entry must be a fact the attacker could come to hold, else config_error.
KnowledgeState make_knowledge_state(const Universe& u,
                                    std::span<const FactId> extra = {},
                                    std::span<const FactId> banned = {});

// Least fixed point of rule application over known ∪ learned, as a sorted
// fact list. Monotone in its input and idempotent.
std::vector<FactId> close(const KnowledgeState& ks,
                          std::span<const FactId> learned = {});

// Compressed attacker transition structure. Knowledge handles name interned
// deduction-closed fact sets; a learn chases every ready rule at once. The
// traces match firing one hidden rule at a time in any order, because rule
// firing only ever grows the holdings.
class LazySpy final : public SpyBehavior {
 public:
  LazySpy(EventStore& events, KnowledgeState ks,
          std::span<const FactId> sayable);

  uint32_t initial_know() const { return initial_know_; }
  bool knows(uint32_t know, FactId f) const;
  std::vector<FactId> known_facts(uint32_t know) const;  // sorted
  size_t state_count() const { return state_count_; }
  const KnowledgeState& knowledge() const { return ks_; }

  void initials(uint32_t know,
                std::vector<std::pair<EventId, uint32_t>>& out) const override;
  std::optional<uint32_t> after(uint32_t know, EventId e) const override;
  void initials_outside(
      uint32_t know, uint32_t class_mask,
      std::vector<std::pair<EventId, uint32_t>>& out) const override;
  void alphabet(std::vector<EventId>& out) const override;

 private:
  uint32_t intern_state(const std::vector<uint64_t>& bits) const;
  uint32_t chase_learn(uint32_t know, uint32_t dense) const;
  std::span<const uint64_t> bits(uint32_t know) const;
  bool bit(uint32_t know, uint32_t dense) const;

  EventStore& events_;
  KnowledgeState ks_;
  uint32_t nblocks_ = 0;
  std::vector<int32_t> lidx_;   // FactId -> dense index, -1 when unlearnable
  std::vector<FactId> lfact_;   // dense index -> FactId
  std::vector<EventId> learn_ev_, say_ev_, knows_ev_;  // by dense index
  std::vector<uint64_t> sayable_bits_, banned_bits_;
  struct DenseRule {
    uint32_t concl;
    std::vector<uint32_t> prem;
  };
  std::vector<DenseRule> rules_;
  std::vector<std::vector<uint32_t>> by_premise_;  // dense index -> rule ids

  uint32_t initial_know_ = 0;
  mutable std::vector<uint64_t> blocks_;  // interned states, flat
  mutable std::unordered_map<uint64_t, std::vector<uint32_t>> state_bucket_;
  mutable std::unordered_map<uint64_t, uint32_t> learn_memo_;
  mutable size_t state_count_ = 0;
};

// The compressed attacker, its kernel registration, and its process node.
struct Intruder {
  std::unique_ptr<LazySpy> spy;
  uint32_t behavior = 0;
  NodeId process = kNoNode;
};

Intruder intruder_process(Kernel& k, const KnowledgeState& ks,
                          std::span<const FactId> sayable);

// Reference attacker: one cell per learnable fact, composed in parallel and
// synchronized on per-deduction events. A cell flips from ignorant to
// knowing on a learn or on a deduction concluding its fact; knowing cells
// feed deductions as premises and offer say / flag events. Exact but slow —
// kept to validate the compressed form against. `tag` distinguishes the
// definitions when one kernel hosts several of these.
NodeId intruder_cells(Kernel& k, const KnowledgeState& ks,
                      std::span<const FactId> sayable,
                      std::string_view tag = "");

}  // namespace votecheck
