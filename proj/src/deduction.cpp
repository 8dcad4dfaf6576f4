#include "votecheck/deduction.hpp"

#include <algorithm>
#include <string>

namespace votecheck {

std::string_view rule_label(RuleName r) {
  switch (r) {
    case RuleName::SymEnc: return "sym-enc";
    case RuleName::SymDec: return "sym-dec";
    case RuleName::AsymEnc: return "asym-enc";
    case RuleName::AsymDec: return "asym-dec";
    case RuleName::SignSig: return "sign-sig";
    case RuleName::SignExt: return "sign-ext";
    case RuleName::BallotComp: return "ballot-comp";
    case RuleName::BallotDcmp: return "ballot-dcmp";
    case RuleName::RhsComp: return "rhs-comp";
    case RuleName::RhsDcmp: return "rhs-dcmp";
    case RuleName::VoteComp: return "vote-comp";
    case RuleName::VoteDcmp: return "vote-dcmp";
    case RuleName::DigBltComp: return "digballot-comp";
    case RuleName::DigBltDcmp: return "digballot-dcmp";
    case RuleName::RawBltComp: return "rawballot-comp";
    case RuleName::RawBltDcmp: return "rawballot-dcmp";
    case RuleName::IndComp: return "ind-comp";
    case RuleName::IndDcmp: return "ind-dcmp";
  }
  return "unknown";
}

std::vector<Deduction> instantiate_rules(const Universe& u) {
  const FactStore& fs = *u.store;
  std::vector<Deduction> out;
  auto add = [&](RuleName r, std::vector<FactId> prem, FactId concl) {
    std::sort(prem.begin(), prem.end());
    prem.erase(std::unique(prem.begin(), prem.end()), prem.end());
    out.push_back(Deduction{r, std::move(prem), concl});
  };

  // No symmetric keys exist in the fact families, so the symmetric pair
  // contributes no ground instances here; it participates as soon as a
  // universe carries symmetric material.

  for (FactId e : u.encryptions) {
    const FactNode& n = fs.node(e);
    FactId pk = static_cast<FactId>(n.a), body = static_cast<FactId>(n.b);
    add(RuleName::AsymEnc, {pk, body}, e);
    add(RuleName::AsymDec, {fs.dual(pk), e}, body);
  }

  auto signed_atom = [&](FactId g) {
    const FactNode& n = fs.node(g);
    FactId sk = static_cast<FactId>(n.a), body = static_cast<FactId>(n.b);
    add(RuleName::SignSig, {sk, body}, g);
    add(RuleName::SignExt, {fs.dual(sk), g}, body);
  };
  for (FactId g : u.signednonces) signed_atom(g);
  for (FactId g : u.signedserials) signed_atom(g);
  for (FactId g : u.signednonsers) {
    const FactNode& n = fs.node(g);
    FactId sk = static_cast<FactId>(n.a);
    FactId serial = static_cast<FactId>(n.b), nonce = static_cast<FactId>(n.c);
    // The signed payload is a pair, which is not itself a fact; composing
    // takes both halves and extracting yields each half separately.
    add(RuleName::SignSig, {sk, serial, nonce}, g);
    add(RuleName::SignExt, {fs.dual(sk), g}, serial);
    add(RuleName::SignExt, {fs.dual(sk), g}, nonce);
  }
  for (FactId g : u.receipts) {
    const FactNode& n = fs.node(g);
    FactId sk = static_cast<FactId>(n.a), body = static_cast<FactId>(n.b);
    add(RuleName::SignSig, {sk, body}, g);
    add(RuleName::SignExt, {fs.dual(sk), g}, body);
  }

  for (FactId b : u.ballots) {
    const FactNode& n = fs.node(b);
    FactId list = static_cast<FactId>(n.a);
    FactId sg = static_cast<FactId>(n.b), ix = static_cast<FactId>(n.c);
    add(RuleName::BallotComp, {list, sg, ix}, b);
    add(RuleName::BallotDcmp, {b}, list);
    add(RuleName::BallotDcmp, {b}, sg);
    add(RuleName::BallotDcmp, {b}, ix);
  }
  for (FactId r : u.castrhs) {
    const FactNode& n = fs.node(r);
    FactId sg = static_cast<FactId>(n.a), ix = static_cast<FactId>(n.b);
    add(RuleName::RhsComp, {ix, sg}, r);
    add(RuleName::RhsDcmp, {r}, ix);
    add(RuleName::RhsDcmp, {r}, sg);
  }
  for (FactId v : u.votes) {
    const FactNode& n = fs.node(v);
    FactId ix = static_cast<FactId>(n.a), e = static_cast<FactId>(n.b);
    add(RuleName::VoteComp, {ix, e}, v);
    add(RuleName::VoteDcmp, {v}, ix);
    add(RuleName::VoteDcmp, {v}, e);
  }
  for (FactId d : u.digballots) {
    const FactNode& n = fs.node(d);
    FactId sg = static_cast<FactId>(n.a), e = static_cast<FactId>(n.b);
    add(RuleName::DigBltComp, {sg, e}, d);
    add(RuleName::DigBltDcmp, {d}, sg);
    add(RuleName::DigBltDcmp, {d}, e);
  }
  for (FactId rw : u.rawballots) {
    const FactNode& n = fs.node(rw);
    FactId s = static_cast<FactId>(n.a), e = static_cast<FactId>(n.b);
    add(RuleName::RawBltComp, {s, e}, rw);
    add(RuleName::RawBltDcmp, {rw}, s);
    add(RuleName::RawBltDcmp, {rw}, e);
  }
  for (size_t i = 0; i < u.indices.size(); ++i) {
    add(RuleName::IndComp, {u.nums[i]}, u.indices[i]);
    add(RuleName::IndDcmp, {u.indices[i]}, u.nums[i]);
  }
  return out;
}

KnowledgeState make_knowledge_state(const Universe& u,
                                    std::span<const FactId> extra,
                                    std::span<const FactId> banned) {
  KnowledgeState ks;
  ks.universe = &u;
  ks.rules = instantiate_rules(u);

  std::vector<FactId> init;
  init.insert(init.end(), u.agents.begin(), u.agents.end());
  init.insert(init.end(), u.pubkeys.begin(), u.pubkeys.end());
  init.insert(init.end(), u.indices.begin(), u.indices.end());
  init.insert(init.end(), u.nonces.begin(), u.nonces.end());
  for (FactId f : extra) {
    if (!u.in_learnable(f))
      throw config_error("initial knowledge entry outside the fact universe: " +
                         u.store->render(f));
    init.push_back(f);
  }
  std::sort(init.begin(), init.end());
  init.erase(std::unique(init.begin(), init.end()), init.end());
  ks.initial = init;
  ks.known = std::move(init);

  std::vector<FactId> ban(banned.begin(), banned.end());
  for (FactId f : ban) {
    if (!u.in_learnable(f))
      throw config_error("banned fact outside the fact universe: " +
                         u.store->render(f));
  }
  std::sort(ban.begin(), ban.end());
  ban.erase(std::unique(ban.begin(), ban.end()), ban.end());
  ks.banned = std::move(ban);
  return ks;
}

std::vector<FactId> close(const KnowledgeState& ks,
                          std::span<const FactId> learned) {
  if (!ks.universe || !ks.universe->store)
    throw wiring_error("knowledge state carries no universe");
  const size_t n = ks.universe->store->size();
  std::vector<char> known(n, 0);
  std::vector<FactId> work;
  auto admit = [&](FactId f) {
    if (f >= n) throw wiring_error("fact outside the store in a closure");
    if (!known[f]) {
      known[f] = 1;
      work.push_back(f);
    }
  };
  for (FactId f : ks.known) admit(f);
  for (FactId f : learned) admit(f);

  std::vector<std::vector<uint32_t>> byprem(n);
  std::vector<uint32_t> need(ks.rules.size());
  for (uint32_t r = 0; r < ks.rules.size(); ++r) {
    need[r] = static_cast<uint32_t>(ks.rules[r].premises.size());
    for (FactId p : ks.rules[r].premises) {
      if (p >= n) throw wiring_error("rule premise outside the store");
      byprem[p].push_back(r);
    }
  }
  size_t head = 0;
  while (head < work.size()) {
    FactId f = work[head++];
    for (uint32_t r : byprem[f]) {
      if (--need[r] == 0) admit(ks.rules[r].conclusion);
    }
  }
  std::vector<FactId> out;
  for (FactId f = 0; f < n; ++f)
    if (known[f]) out.push_back(f);
  return out;
}

// ---------------------------------------------------------------------------
// LazySpy

LazySpy::LazySpy(EventStore& events, KnowledgeState ks,
                 std::span<const FactId> sayable)
    : events_(events), ks_(std::move(ks)) {
  if (!ks_.universe || !ks_.universe->store)
    throw wiring_error("knowledge state carries no universe");
  const Universe& u = *ks_.universe;
  const size_t L = u.learnable.size();
  lfact_ = u.learnable;
  lidx_.assign(u.store->size(), -1);
  for (size_t i = 0; i < L; ++i) lidx_[lfact_[i]] = static_cast<int32_t>(i);

  nblocks_ = static_cast<uint32_t>((L + 63) / 64);
  learn_ev_.resize(L);
  say_ev_.assign(L, kNoEvent);
  knows_ev_.assign(L, kNoEvent);
  sayable_bits_.assign(nblocks_, 0);
  banned_bits_.assign(nblocks_, 0);
  for (size_t i = 0; i < L; ++i) learn_ev_[i] = events_.learn(lfact_[i]);
  for (FactId f : sayable) {
    if (f >= lidx_.size() || lidx_[f] < 0)
      throw config_error("sayable fact outside the fact universe: " +
                         u.store->render(f));
    uint32_t d = static_cast<uint32_t>(lidx_[f]);
    say_ev_[d] = events_.say(f);
    sayable_bits_[d >> 6] |= 1ull << (d & 63);
  }
  for (FactId f : ks_.banned) {
    if (f >= lidx_.size() || lidx_[f] < 0)
      throw config_error("banned fact outside the fact universe: " +
                         u.store->render(f));
    uint32_t d = static_cast<uint32_t>(lidx_[f]);
    knows_ev_[d] = events_.knows(f);
    banned_bits_[d >> 6] |= 1ull << (d & 63);
  }

  rules_.reserve(ks_.rules.size());
  by_premise_.assign(L, {});
  for (const Deduction& d : ks_.rules) {
    DenseRule dr;
    if (d.conclusion >= lidx_.size() || lidx_[d.conclusion] < 0)
      throw wiring_error("rule conclusion outside the learnable facts");
    dr.concl = static_cast<uint32_t>(lidx_[d.conclusion]);
    for (FactId p : d.premises) {
      if (p >= lidx_.size() || lidx_[p] < 0)
        throw wiring_error("rule premise outside the learnable facts");
      dr.prem.push_back(static_cast<uint32_t>(lidx_[p]));
    }
    uint32_t idx = static_cast<uint32_t>(rules_.size());
    for (uint32_t p : dr.prem) by_premise_[p].push_back(idx);
    rules_.push_back(std::move(dr));
  }

  std::vector<uint64_t> b(nblocks_, 0);
  std::vector<uint32_t> seed;
  for (FactId f : ks_.known) {
    if (f >= lidx_.size() || lidx_[f] < 0)
      throw config_error("initial knowledge entry outside the fact universe: " +
                         u.store->render(f));
    uint32_t d = static_cast<uint32_t>(lidx_[f]);
    if (!(b[d >> 6] & (1ull << (d & 63)))) {
      b[d >> 6] |= 1ull << (d & 63);
      seed.push_back(d);
    }
  }
  // Close the holdings before interning: handles always name closed sets.
  size_t head = 0;
  while (head < seed.size()) {
    uint32_t x = seed[head++];
    for (uint32_t r : by_premise_[x]) {
      const DenseRule& dr = rules_[r];
      if (b[dr.concl >> 6] & (1ull << (dr.concl & 63))) continue;
      bool ready = true;
      for (uint32_t p : dr.prem)
        if (!(b[p >> 6] & (1ull << (p & 63)))) {
          ready = false;
          break;
        }
      if (ready) {
        b[dr.concl >> 6] |= 1ull << (dr.concl & 63);
        seed.push_back(dr.concl);
      }
    }
  }
  initial_know_ = intern_state(b);
}

std::span<const uint64_t> LazySpy::bits(uint32_t know) const {
  return {blocks_.data() + static_cast<size_t>(know) * nblocks_, nblocks_};
}

bool LazySpy::bit(uint32_t know, uint32_t dense) const {
  return bits(know)[dense >> 6] & (1ull << (dense & 63));
}

uint32_t LazySpy::intern_state(const std::vector<uint64_t>& b) const {
  uint64_t h = 1469598103934665603ull;
  for (uint64_t w : b) {
    h ^= w;
    h *= 1099511628211ull;
  }
  auto& bucket = state_bucket_[h];
  for (uint32_t cand : bucket) {
    auto sp = bits(cand);
    if (std::equal(sp.begin(), sp.end(), b.begin())) return cand;
  }
  uint32_t id = static_cast<uint32_t>(state_count_++);
  blocks_.insert(blocks_.end(), b.begin(), b.end());
  bucket.push_back(id);
  return id;
}

uint32_t LazySpy::chase_learn(uint32_t know, uint32_t dense) const {
  uint64_t key = (static_cast<uint64_t>(know) << 32) | dense;
  if (auto it = learn_memo_.find(key); it != learn_memo_.end())
    return it->second;
  uint32_t result;
  if (bit(know, dense)) {
    result = know;
  } else {
    auto sp = bits(know);
    std::vector<uint64_t> b(sp.begin(), sp.end());
    b[dense >> 6] |= 1ull << (dense & 63);
    std::vector<uint32_t> work{dense};
    size_t head = 0;
    while (head < work.size()) {
      uint32_t x = work[head++];
      for (uint32_t r : by_premise_[x]) {
        const DenseRule& dr = rules_[r];
        if (b[dr.concl >> 6] & (1ull << (dr.concl & 63))) continue;
        bool ready = true;
        for (uint32_t p : dr.prem)
          if (!(b[p >> 6] & (1ull << (p & 63)))) {
            ready = false;
            break;
          }
        if (ready) {
          b[dr.concl >> 6] |= 1ull << (dr.concl & 63);
          work.push_back(dr.concl);
        }
      }
    }
    result = intern_state(b);
  }
  learn_memo_.emplace(key, result);
  return result;
}

void LazySpy::initials(uint32_t know,
                       std::vector<std::pair<EventId, uint32_t>>& out) const {
  out.clear();
  const size_t L = lfact_.size();
  for (uint32_t d = 0; d < L; ++d)
    out.emplace_back(learn_ev_[d], chase_learn(know, d));
  auto kn = bits(know);
  for (uint32_t blk = 0; blk < nblocks_; ++blk) {
    uint64_t says = kn[blk] & sayable_bits_[blk];
    while (says) {
      uint32_t d = blk * 64 + static_cast<uint32_t>(std::countr_zero(says));
      says &= says - 1;
      out.emplace_back(say_ev_[d], know);
    }
    uint64_t flags = kn[blk] & banned_bits_[blk];
    while (flags) {
      uint32_t d = blk * 64 + static_cast<uint32_t>(std::countr_zero(flags));
      flags &= flags - 1;
      out.emplace_back(knows_ev_[d], know);
    }
  }
  std::sort(out.begin(), out.end());
}

void LazySpy::initials_outside(
    uint32_t know, uint32_t class_mask,
    std::vector<std::pair<EventId, uint32_t>>& out) const {
  out.clear();
  const size_t L = lfact_.size();
  if (!(class_mask & class_bit(EvClass::Learn)))
    for (uint32_t d = 0; d < L; ++d)
      out.emplace_back(learn_ev_[d], chase_learn(know, d));
  auto kn = bits(know);
  if (!(class_mask & class_bit(EvClass::Say)))
    for (uint32_t blk = 0; blk < nblocks_; ++blk) {
      uint64_t says = kn[blk] & sayable_bits_[blk];
      while (says) {
        uint32_t d = blk * 64 + static_cast<uint32_t>(std::countr_zero(says));
        says &= says - 1;
        out.emplace_back(say_ev_[d], know);
      }
    }
  if (!(class_mask & class_bit(EvClass::Knows)))
    for (uint32_t blk = 0; blk < nblocks_; ++blk) {
      uint64_t flags = kn[blk] & banned_bits_[blk];
      while (flags) {
        uint32_t d = blk * 64 + static_cast<uint32_t>(std::countr_zero(flags));
        flags &= flags - 1;
        out.emplace_back(knows_ev_[d], know);
      }
    }
  std::sort(out.begin(), out.end());
}

std::optional<uint32_t> LazySpy::after(uint32_t know, EventId e) const {
  const EventNode& n = events_.node(e);
  auto dense_of = [&](int32_t fact) -> int32_t {
    if (fact < 0 || static_cast<size_t>(fact) >= lidx_.size()) return -1;
    return lidx_[fact];
  };
  switch (n.cls) {
    case EvClass::Learn: {
      int32_t d = dense_of(n.a);
      if (d < 0) return std::nullopt;
      return chase_learn(know, static_cast<uint32_t>(d));
    }
    case EvClass::Say: {
      int32_t d = dense_of(n.a);
      if (d < 0 || !bit(know, static_cast<uint32_t>(d))) return std::nullopt;
      if (!(sayable_bits_[d >> 6] & (1ull << (d & 63)))) return std::nullopt;
      return know;
    }
    case EvClass::Knows: {
      int32_t d = dense_of(n.a);
      if (d < 0 || !bit(know, static_cast<uint32_t>(d))) return std::nullopt;
      if (!(banned_bits_[d >> 6] & (1ull << (d & 63)))) return std::nullopt;
      return know;
    }
    default:
      return std::nullopt;
  }
}

bool LazySpy::knows(uint32_t know, FactId f) const {
  if (f >= lidx_.size() || lidx_[f] < 0) return false;
  return bit(know, static_cast<uint32_t>(lidx_[f]));
}

std::vector<FactId> LazySpy::known_facts(uint32_t know) const {
  std::vector<FactId> out;
  auto kn = bits(know);
  for (uint32_t blk = 0; blk < nblocks_; ++blk) {
    uint64_t w = kn[blk];
    while (w) {
      uint32_t d = blk * 64 + static_cast<uint32_t>(std::countr_zero(w));
      w &= w - 1;
      out.push_back(lfact_[d]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void LazySpy::alphabet(std::vector<EventId>& out) const {
  out.clear();
  for (EventId e : learn_ev_) out.push_back(e);
  for (EventId e : say_ev_)
    if (e != kNoEvent) out.push_back(e);
  for (EventId e : knows_ev_)
    if (e != kNoEvent) out.push_back(e);
  std::sort(out.begin(), out.end());
}

Intruder intruder_process(Kernel& k, const KnowledgeState& ks,
                          std::span<const FactId> sayable) {
  Intruder out;
  out.spy = std::make_unique<LazySpy>(k.events(), ks, sayable);
  out.behavior = k.add_spy(out.spy.get());
  out.process = k.spy(out.behavior, out.spy->initial_know());
  return out;
}

NodeId intruder_cells(Kernel& k, const KnowledgeState& ks,
                      std::span<const FactId> sayable, std::string_view tag) {
  EventStore& es = k.events();
  if (!ks.universe || !ks.universe->store)
    throw wiring_error("knowledge state carries no universe");
  const Universe& u = *ks.universe;
  FactStore& fs = *u.store;
  const size_t L = u.learnable.size();

  struct Tables {
    std::vector<int32_t> lidx;
    std::vector<EventId> learn, say, knows;
    std::vector<std::vector<EventId>> concl_evs, prem_evs;
  };
  auto tb = std::make_shared<Tables>();
  tb->lidx.assign(fs.size(), -1);
  for (size_t i = 0; i < L; ++i)
    tb->lidx[u.learnable[i]] = static_cast<int32_t>(i);
  tb->learn.resize(L);
  tb->say.assign(L, kNoEvent);
  tb->knows.assign(L, kNoEvent);
  tb->concl_evs.assign(L, {});
  tb->prem_evs.assign(L, {});
  for (size_t i = 0; i < L; ++i) tb->learn[i] = es.learn(u.learnable[i]);
  for (FactId f : sayable) {
    if (f >= tb->lidx.size() || tb->lidx[f] < 0)
      throw config_error("sayable fact outside the fact universe: " +
                         fs.render(f));
    tb->say[tb->lidx[f]] = es.say(f);
  }
  for (FactId f : ks.banned) {
    if (f >= tb->lidx.size() || tb->lidx[f] < 0)
      throw config_error("banned fact outside the fact universe: " +
                         fs.render(f));
    tb->knows[tb->lidx[f]] = es.knows(f);
  }

  // Participant cells of every deduction event, as sorted dense indices.
  std::vector<EventId> rule_ev(ks.rules.size());
  std::vector<std::vector<uint32_t>> rule_parts(ks.rules.size());
  for (size_t r = 0; r < ks.rules.size(); ++r) {
    const Deduction& d = ks.rules[r];
    EventId ev = es.infer_rule(fs.fact_set(d.premises), d.conclusion);
    std::vector<uint32_t> parts;
    if (d.conclusion >= tb->lidx.size() || tb->lidx[d.conclusion] < 0)
      throw wiring_error("rule conclusion outside the learnable facts");
    parts.push_back(static_cast<uint32_t>(tb->lidx[d.conclusion]));
    for (FactId p : d.premises) {
      if (p >= tb->lidx.size() || tb->lidx[p] < 0)
        throw wiring_error("rule premise outside the learnable facts");
      parts.push_back(static_cast<uint32_t>(tb->lidx[p]));
    }
    std::sort(parts.begin(), parts.end());
    parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
    tb->concl_evs[tb->lidx[d.conclusion]].push_back(ev);
    for (FactId p : d.premises) tb->prem_evs[tb->lidx[p]].push_back(ev);
    rule_ev[r] = ev;
    rule_parts[r] = std::move(parts);
  }

  std::string ign = "intruderCellIgn" + std::string(tag);
  std::string knw = "intruderCellKnw" + std::string(tag);
  Kernel* kp = &k;
  k.define(knw, [kp, tb, knw](std::span<const FactId> args) {
    FactId f = args[0];
    uint32_t d = static_cast<uint32_t>(tb->lidx[f]);
    NodeId cont = kp->call(knw, args);
    std::vector<NodeId> branches;
    branches.push_back(kp->prefix(tb->learn[d], cont));
    if (tb->say[d] != kNoEvent)
      branches.push_back(kp->prefix(tb->say[d], cont));
    if (tb->knows[d] != kNoEvent)
      branches.push_back(kp->prefix(tb->knows[d], cont));
    for (EventId ev : tb->prem_evs[d])
      branches.push_back(kp->prefix(ev, cont));
    return kp->ext_choice(branches);
  });
  k.define(ign, [kp, tb, knw](std::span<const FactId> args) {
    FactId f = args[0];
    uint32_t d = static_cast<uint32_t>(tb->lidx[f]);
    NodeId cont = kp->call(knw, args);
    std::vector<NodeId> branches;
    branches.push_back(kp->prefix(tb->learn[d], cont));
    for (EventId ev : tb->concl_evs[d])
      branches.push_back(kp->prefix(ev, cont));
    return kp->ext_choice(branches);
  });

  std::vector<char> starts_knowing(L, 0);
  for (FactId f : ks.known) {
    if (f >= tb->lidx.size() || tb->lidx[f] < 0)
      throw config_error("initial knowledge entry outside the fact universe: " +
                         fs.render(f));
    starts_knowing[tb->lidx[f]] = 1;
  }
  auto cell = [&](size_t d) {
    std::array<FactId, 1> arg{u.learnable[d]};
    return k.call(starts_knowing[d] ? knw : ign, arg);
  };
  // Balanced composition: every pair of participants meets at the split of
  // their lowest common ancestor, so each deduction event lands in the
  // interface of exactly the nodes that must agree on it. The tree shape
  // also keeps the rebuilt region small when one cell changes state.
  auto straddles = [&](const std::vector<uint32_t>& parts, uint32_t lo,
                       uint32_t mid, uint32_t hi) {
    auto l = std::lower_bound(parts.begin(), parts.end(), lo);
    if (l == parts.end() || *l > mid) return false;
    auto r = std::upper_bound(parts.begin(), parts.end(), hi);
    return r != parts.begin() && *(r - 1) > mid;
  };
  auto build = [&](auto&& self, uint32_t lo, uint32_t hi) -> NodeId {
    if (lo == hi) return cell(lo);
    uint32_t mid = lo + (hi - lo) / 2;
    NodeId a = self(self, lo, mid);
    NodeId b = self(self, mid + 1, hi);
    std::vector<EventId> sy;
    for (size_t r = 0; r < rule_parts.size(); ++r)
      if (straddles(rule_parts[r], lo, mid, hi)) sy.push_back(rule_ev[r]);
    std::sort(sy.begin(), sy.end());
    sy.erase(std::unique(sy.begin(), sy.end()), sy.end());
    return k.parallel(a, b, es.set(0, sy));
  };
  return build(build, 0, static_cast<uint32_t>(L - 1));
}

}  // namespace votecheck
