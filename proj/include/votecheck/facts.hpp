#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "votecheck/config.hpp"

namespace votecheck {

using FactId = uint32_t;
using SymId = uint32_t;
using ListId = uint32_t;
inline constexpr FactId kNoFact = 0xFFFFFFFFu;

// Thrown when a lookup has no answer (candidate not on a list, position out
// of range). Distinct from config_error: these indicate a modeling bug, not
// bad user input.
struct lookup_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FactTag : uint8_t {
  Agent,
  Candidate,
  Nonce,
  Serial,
  Num,       // bare integer; the payload of an index, never sendable itself
  PubKey,
  SecKey,
  Index,
  CandList,  // full candidate ordering as printed on a ballot
  Enc,
  SymEnc,
  Sign,      // signature over a single atom
  SignPair,  // signature over a (serial, nonce) pair; a distinct shape
  Ballot,    // ballot(list, signed serial, ind0)
  Rhs,       // marked right-hand side: rhs(signed serial, index)
  Receipt,   // signature wrapper around an rhs
  Vote,
  DigBallot,
  RawBallot,
  Ciphertext,    // the single opaque token all unreadable encryptions map to
  ResultCount,   // (candidate, tally) — payload of an announcement
  FactSet,       // internal: canonical set argument for recursive definitions
};

struct FactNode {
  FactTag tag;
  int32_t a = -1;
  int32_t b = -1;
  int32_t c = -1;
  bool operator==(const FactNode&) const = default;
};

enum class AtomKind : uint8_t { None, Agent, Candidate, Nonce, Serial };

// Interning store for facts. Ids are dense and assigned in creation order,
// which is deterministic because every caller builds facts in fixed loops.
class FactStore {
 public:
  FactStore();

  SymId sym(std::string_view name);
  const std::string& sym_name(SymId s) const { return sym_names_[s]; }

  // Typed atoms. A name is bound to one atom kind forever; reusing it for a
  // different kind is a configuration error.
  FactId agent(std::string_view name);
  FactId candidate(std::string_view name);
  FactId nonce(std::string_view name);
  FactId serial(std::string_view name);
  FactId num(int value);
  FactId pubkey(std::string_view owner);
  FactId seckey(std::string_view owner);
  FactId index(int value);
  FactId candlist(std::span<const FactId> candidates);
  FactId enc(FactId key, FactId body);
  FactId symenc(FactId key, FactId body);
  FactId sign(FactId key, FactId body);
  FactId sign_pair(FactId key, FactId serial, FactId nonce);
  FactId ballot(FactId list, FactId signed_serial, FactId index);
  FactId rhs(FactId signed_serial, FactId index);
  FactId receipt(FactId signer, FactId rhs);
  FactId vote(FactId index, FactId enc_or_mask);
  FactId digballot(FactId signed_serial, FactId enc_or_mask);
  FactId rawballot(FactId serial, FactId enc_or_mask);
  FactId ciphertext() const { return ciphertext_; }
  FactId result_count(FactId candidate, int count);
  FactId fact_set(std::span<const FactId> members);  // sorted + deduped

  const FactNode& node(FactId f) const { return nodes_[f]; }
  FactTag tag(FactId f) const { return nodes_[f].tag; }
  size_t size() const { return nodes_.size(); }

  std::span<const FactId> list(ListId id) const;
  ListId intern_list(std::span<const FactId> items);

  // The matching other half of a key pair.
  FactId dual(FactId key) const;

  int int_value(FactId f) const;       // Num / Index
  SymId sym_of(FactId f) const;        // any named atom or key owner
  bool contains_enc(FactId f) const;   // true if an Enc sits anywhere inside

  std::string render(FactId f) const;
  // Parses the surface grammar produced by render(). Unknown atoms or
  // malformed syntax raise config_error.
  FactId parse(std::string_view text);

  // Name validation shared with config parsing.
  static void check_atom_name(std::string_view name);

 private:
  FactId intern(FactNode n);
  FactId typed_atom(std::string_view name, AtomKind kind, FactTag tag);

  std::vector<FactNode> nodes_;
  std::unordered_map<uint64_t, std::vector<FactId>> bucket_;  // hash -> ids
  std::vector<std::string> sym_names_;
  std::vector<AtomKind> sym_kinds_;
  std::unordered_map<std::string, SymId> sym_ids_;
  // One buffer per list: spans returned by list() stay valid while new
  // lists are interned, so callers may iterate one list and build others.
  std::vector<std::vector<FactId>> lists_;
  std::unordered_map<uint64_t, std::vector<ListId>> list_bucket_;
  FactId ciphertext_ = kNoFact;

  FactId parse_expr(std::string_view s, size_t& pos);
};

// The finite fact space of one scenario. Vectors are in deterministic
// construction order; `messages` is everything a channel may carry.
struct Universe {
  FactStore* store = nullptr;

  std::vector<FactId> candidates;
  std::vector<FactId> voters;
  std::vector<FactId> agents;  // voters + the nine fixed roles
  std::vector<FactId> serials;
  std::vector<FactId> nonces;
  std::vector<FactId> indices;  // ind0 .. ind|C|
  std::vector<FactId> nums;     // 0 .. |C|
  std::vector<FactId> lists;    // all |C|! orderings
  std::vector<FactId> pubkeys;
  std::vector<FactId> seckeys;
  std::vector<FactId> encryptions;    // enc(pk, l)
  std::vector<FactId> signednonces;   // sign(sk, n)
  std::vector<FactId> signedserials;  // sign(sk, s)
  std::vector<FactId> signednonsers;  // sign(sk, (s, n))
  std::vector<FactId> rawballots;
  std::vector<FactId> digballots;
  std::vector<FactId> ballots;
  std::vector<FactId> castrhs;
  std::vector<FactId> receipts;
  std::vector<FactId> votes;

  std::vector<FactId> atomic;     // voters + nonces + indices
  std::vector<FactId> messages;   // sendable payload set
  std::vector<FactId> learnable;  // everything the intruder can ever hold

  FactId tom, authority, wbb, teller, podservice, podclient, ballotmngr, ebm, printer;
  FactId pkW, skW, pkT, skT, pkEA, skEA, pkPS, skPS, pkPC, skPC, pkBM, skBM;

  std::vector<bool> in_messages_;  // indexed by FactId
  bool in_messages(FactId f) const {
    return f < in_messages_.size() && in_messages_[f];
  }
  bool in_learnable(FactId f) const {
    return f < in_learnable_.size() && in_learnable_[f];
  }
  std::vector<bool> in_learnable_;

  FactId role_agent(std::string_view name) const;
  // Secret key leaked when the named component is corrupt.
  FactId corrupt_key(std::string_view component) const;
};

Universe build_universe(FactStore& store, const ScenarioConfig& cfg);

// Position (1-based) of a candidate on a list; not-found raises lookup_error.
int find_candidate(const FactStore& store, FactId candidate, FactId list);
// Candidate at 1-based position i; out of range raises lookup_error.
FactId nth_candidate(const FactStore& store, int i, FactId list);

// Replaces any Enc subterm whose decryption key is outside `ik` with the
// ciphertext token. `ik` is indexed by FactId.
FactId mask_fact(FactStore& store, FactId f, const std::vector<bool>& ik);

}  // namespace votecheck
