#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "votecheck/deduction.hpp"
#include "votecheck/events.hpp"
#include "votecheck/facts.hpp"
#include "votecheck/process.hpp"

using namespace votecheck;

namespace {

// Test-side oracle: repeatedly scan every rule until nothing new appears.
// Deliberately naive and independent of the production worklist closure.
std::set<FactId> naive_close(const std::vector<Deduction>& rules,
                             const std::set<FactId>& start) {
  std::set<FactId> s = start;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Deduction& d : rules) {
      if (s.count(d.conclusion)) continue;
      bool ready = true;
      for (FactId p : d.premises)
        if (!s.count(p)) {
          ready = false;
          break;
        }
      if (ready) {
        s.insert(d.conclusion);
        changed = true;
      }
    }
  }
  return s;
}

std::set<FactId> as_set(std::span<const FactId> v) {
  return {v.begin(), v.end()};
}

struct Fixture {
  FactStore store;
  ScenarioConfig cfg;
  Universe u;
  Fixture() : u(build_universe(store, cfg)) {}
};

// Drives one visible event, asserting the successor is unique.
NodeId drive(Kernel& k, NodeId n, EventId e) {
  std::vector<NodeId> succ;
  k.probe(n, e, succ);
  REQUIRE(succ.size() == 1);
  return succ[0];
}

// Follows internal moves to quiescence. take_last flips the scheduling
// order to show the final state does not depend on it.
NodeId tau_chase(Kernel& k, NodeId n, bool take_last = false) {
  for (int guard = 0; guard < 20000; ++guard) {
    auto ts = k.initials(n);
    NodeId next = kNoNode;
    for (const Transition& t : ts) {
      if (t.ev != k.events().tau()) continue;
      next = t.to;
      if (!take_last) break;
    }
    if (next == kNoNode) return n;
    n = next;
  }
  FAIL("internal moves did not quiesce");
  return n;
}

std::set<FactId> enabled_facts(Kernel& k, NodeId n, EvClass cls) {
  std::set<FactId> out;
  for (const Transition& t : k.initials(n))
    if (k.events().cls(t.ev) == cls)
      out.insert(static_cast<FactId>(k.events().node(t.ev).a));
  return out;
}

}  // namespace

TEST_CASE("every rule family instantiates exactly over its message shapes") {
  Fixture fx;
  auto rules = instantiate_rules(fx.u);

  std::map<RuleName, size_t> count;
  for (const Deduction& d : rules) ++count[d.rule];

  const Universe& u = fx.u;
  CHECK(count[RuleName::SymEnc] == 0);
  CHECK(count[RuleName::SymDec] == 0);
  CHECK(count[RuleName::AsymEnc] == u.encryptions.size());
  CHECK(count[RuleName::AsymDec] == u.encryptions.size());
  CHECK(count[RuleName::SignSig] == u.signednonces.size() +
                                        u.signedserials.size() +
                                        u.signednonsers.size() +
                                        u.receipts.size());
  CHECK(count[RuleName::SignExt] == u.signednonces.size() +
                                        u.signedserials.size() +
                                        2 * u.signednonsers.size() +
                                        u.receipts.size());
  CHECK(count[RuleName::BallotComp] == u.ballots.size());
  CHECK(count[RuleName::BallotDcmp] == 3 * u.ballots.size());
  CHECK(count[RuleName::RhsComp] == u.castrhs.size());
  CHECK(count[RuleName::RhsDcmp] == 2 * u.castrhs.size());
  CHECK(count[RuleName::VoteComp] == u.votes.size());
  CHECK(count[RuleName::VoteDcmp] == 2 * u.votes.size());
  CHECK(count[RuleName::DigBltComp] == u.digballots.size());
  CHECK(count[RuleName::DigBltDcmp] == 2 * u.digballots.size());
  CHECK(count[RuleName::RawBltComp] == u.rawballots.size());
  CHECK(count[RuleName::RawBltDcmp] == 2 * u.rawballots.size());
  CHECK(count[RuleName::IndComp] == u.indices.size());
  CHECK(count[RuleName::IndDcmp] == u.indices.size());

  // Frozen for the stock scenario: two candidates, three voters, three
  // serials, three nonces.
  CHECK(rules.size() == 2370);

  for (const Deduction& d : rules) {
    CHECK(!d.premises.empty());
    CHECK(std::is_sorted(d.premises.begin(), d.premises.end()));
    CHECK(std::adjacent_find(d.premises.begin(), d.premises.end()) ==
          d.premises.end());
    CHECK(!std::binary_search(d.premises.begin(), d.premises.end(),
                              d.conclusion));
    CHECK(u.in_learnable(d.conclusion));
    for (FactId p : d.premises) CHECK(u.in_learnable(p));
    // Keys, identities, and bare candidates are never derivable.
    FactTag t = fx.store.tag(d.conclusion);
    CHECK(t != FactTag::PubKey);
    CHECK(t != FactTag::SecKey);
    CHECK(t != FactTag::Agent);
    CHECK(t != FactTag::Candidate);
  }

  // Spot instances, located through the surface grammar.
  FactId list = fx.store.parse("<Archimedes,Babbage>");
  FactId encPS = fx.store.parse("enc(pkPS,<Archimedes,Babbage>)");
  FactId skPS = fx.store.parse("skPS");
  bool found_dec = false;
  for (const Deduction& d : rules) {
    if (d.rule != RuleName::AsymDec) continue;
    if (d.conclusion == list &&
        std::binary_search(d.premises.begin(), d.premises.end(), skPS) &&
        std::binary_search(d.premises.begin(), d.premises.end(), encPS))
      found_dec = true;
  }
  CHECK(found_dec);

  FactId bal = fx.store.parse("ballot(<Archimedes,Babbage>,sign(skPS,s1),ind0)");
  std::set<FactId> ballot_parts;
  for (const Deduction& d : rules)
    if (d.rule == RuleName::BallotDcmp && d.premises.size() == 1 &&
        d.premises[0] == bal)
      ballot_parts.insert(d.conclusion);
  std::set<FactId> expect{list, fx.store.parse("sign(skPS,s1)"),
                          fx.store.parse("ind0")};
  CHECK(ballot_parts == expect);

  // A second independent build yields the same rules, textually.
  FactStore store2;
  Universe u2 = build_universe(store2, fx.cfg);
  auto rules2 = instantiate_rules(u2);
  REQUIRE(rules2.size() == rules.size());
  for (size_t i = 0; i < rules.size(); ++i) {
    CHECK(rules[i].rule == rules2[i].rule);
    CHECK(fx.store.render(rules[i].conclusion) ==
          store2.render(rules2[i].conclusion));
    REQUIRE(rules[i].premises.size() == rules2[i].premises.size());
    for (size_t j = 0; j < rules[i].premises.size(); ++j)
      CHECK(fx.store.render(rules[i].premises[j]) ==
            store2.render(rules2[i].premises[j]));
  }
}

TEST_CASE("closure reaches the least fixed point") {
  Fixture fx;
  KnowledgeState ks = make_knowledge_state(fx.u);

  SUBCASE("empty holdings stay empty") {
    ks.known.clear();
    CHECK(close(ks).empty());
  }

  SUBCASE("a leaked key opens a recorded ballot") {
    FactId skEA = fx.store.parse("skEA");
    FactId rawb = fx.store.parse("raw(s1,enc(pkEA,<Archimedes,Babbage>))");
    ks.known = {skEA, rawb};
    auto got = close(ks);
    std::set<FactId> got_set = as_set(got);

    FactId s1 = fx.store.parse("s1");
    FactId encEA = fx.store.parse("enc(pkEA,<Archimedes,Babbage>)");
    FactId list = fx.store.parse("<Archimedes,Babbage>");
    CHECK(got_set.count(s1));
    CHECK(got_set.count(encEA));
    CHECK(got_set.count(list));

    // The exact reach: the two inputs, the three facts above, the serial
    // re-signed under the leaked key, and the resulting digital ballot.
    std::set<FactId> expect{skEA,
                            rawb,
                            s1,
                            encEA,
                            list,
                            fx.store.parse("sign(skEA,s1)"),
                            fx.store.parse("digballot(sign(skEA,s1),"
                                           "enc(pkEA,<Archimedes,Babbage>))")};
    CHECK(got_set == expect);
    CHECK(got_set == naive_close(ks.rules, {skEA, rawb}));
  }

  SUBCASE("random holdings agree with the scan-to-fixpoint oracle") {
    std::mt19937 rng(20240817);
    const auto& L = fx.u.learnable;
    std::uniform_int_distribution<size_t> pick(0, L.size() - 1);
    for (int trial = 0; trial < 120; ++trial) {
      std::uniform_int_distribution<int> len(0, 12);
      std::set<FactId> start;
      int n = len(rng);
      for (int i = 0; i < n; ++i) start.insert(L[pick(rng)]);

      ks.known.assign(start.begin(), start.end());
      auto got = close(ks);
      CHECK(as_set(got) == naive_close(ks.rules, start));

      // Idempotent: closing the closure adds nothing.
      ks.known = got;
      CHECK(close(ks) == got);

      // Monotone: a superset closes to a superset.
      std::set<FactId> bigger = start;
      bigger.insert(L[pick(rng)]);
      ks.known.assign(bigger.begin(), bigger.end());
      auto closed_bigger = as_set(close(ks));
      for (FactId f : got) CHECK(closed_bigger.count(f));
    }
  }

  SUBCASE("keys are never created") {
    std::mt19937 rng(7171);
    const auto& L = fx.u.learnable;
    std::uniform_int_distribution<size_t> pick(0, L.size() - 1);
    for (int trial = 0; trial < 40; ++trial) {
      std::set<FactId> start;
      for (int i = 0; i < 10; ++i) {
        FactId f = L[pick(rng)];
        if (fx.store.tag(f) != FactTag::SecKey) start.insert(f);
      }
      ks.known.assign(start.begin(), start.end());
      for (FactId f : close(ks)) CHECK(fx.store.tag(f) != FactTag::SecKey);
    }
  }
}

TEST_CASE("baseline holdings and their validation") {
  Fixture fx;
  const Universe& u = fx.u;

  KnowledgeState ks = make_knowledge_state(u);
  std::set<FactId> expect;
  for (FactId f : u.agents) expect.insert(f);
  for (FactId f : u.pubkeys) expect.insert(f);
  for (FactId f : u.indices) expect.insert(f);
  for (FactId f : u.nonces) expect.insert(f);
  CHECK(as_set(ks.initial) == expect);
  CHECK(ks.known == ks.initial);
  CHECK(ks.banned.empty());

  // Serials, candidate lists, and secret keys all start unknown.
  for (FactId f : u.serials) CHECK(!expect.count(f));
  for (FactId f : u.lists) CHECK(!expect.count(f));
  for (FactId f : u.seckeys) CHECK(!expect.count(f));

  // Closing the baseline only uncovers the bare index payloads.
  std::set<FactId> base_closed = expect;
  for (FactId f : u.nums) base_closed.insert(f);
  CHECK(as_set(close(ks)) == base_closed);

  // A leaked key joins the holdings; junk is rejected.
  std::array<FactId, 1> leak{u.corrupt_key("podservice")};
  KnowledgeState ks2 = make_knowledge_state(u, leak);
  CHECK(std::binary_search(ks2.initial.begin(), ks2.initial.end(), leak[0]));

  std::array<FactId, 1> list_ban{fx.store.parse("<Archimedes,Babbage>")};
  CHECK_NOTHROW(make_knowledge_state(u, {}, list_ban));
  std::array<FactId, 1> bad_ban{fx.store.parse("count(Archimedes,1)")};
  CHECK_THROWS_AS(make_knowledge_state(u, {}, bad_ban), config_error);
  std::array<FactId, 1> cand{fx.store.parse("Archimedes")};
  CHECK_THROWS_AS(make_knowledge_state(u, {}, cand), config_error);
  CHECK_THROWS_AS(make_knowledge_state(u, cand, {}), config_error);
}

TEST_CASE("compressed attacker matches the eager closure on random learns") {
  Fixture fx;
  EventStore events(fx.store);
  std::array<FactId, 1> ban{fx.store.parse("<Archimedes,Babbage>")};
  std::array<FactId, 1> leak{fx.store.parse("skPS")};

  std::mt19937 rng(99021);
  const auto& L = fx.u.learnable;
  std::uniform_int_distribution<size_t> pick(0, L.size() - 1);
  std::uniform_int_distribution<int> len(0, 10);

  for (int variant = 0; variant < 2; ++variant) {
    KnowledgeState ks =
        variant == 0 ? make_knowledge_state(fx.u, {}, ban)
                     : make_knowledge_state(fx.u, leak, ban);
    LazySpy spy(events, ks, fx.u.messages);

    for (int trial = 0; trial < 60; ++trial) {
      std::vector<FactId> seq;
      int n = len(rng);
      for (int i = 0; i < n; ++i) seq.push_back(L[pick(rng)]);

      uint32_t know = spy.initial_know();
      for (FactId f : seq) {
        auto next = spy.after(know, events.learn(f));
        REQUIRE(next.has_value());
        know = *next;
      }

      auto closed = close(ks, seq);
      CHECK(spy.known_facts(know) == closed);

      std::set<FactId> closed_set = as_set(closed);
      for (FactId f : fx.u.messages) {
        bool say_on = spy.after(know, events.say(f)).has_value();
        CHECK(say_on == (closed_set.count(f) > 0));
      }
      bool flag_on = spy.after(know, events.knows(ban[0])).has_value();
      CHECK(flag_on == (closed_set.count(ban[0]) > 0));
    }

    // The enabled-pair listing is sorted, unique per event, and consistent
    // with single-event queries.
    std::vector<std::pair<EventId, uint32_t>> en;
    spy.initials(spy.initial_know(), en);
    CHECK(std::is_sorted(en.begin(), en.end()));
    for (size_t i = 1; i < en.size(); ++i) CHECK(en[i - 1].first != en[i].first);
    size_t learns = 0;
    for (auto& [ev, to] : en) {
      auto via = spy.after(spy.initial_know(), ev);
      REQUIRE(via.has_value());
      CHECK(*via == to);
      if (events.cls(ev) == EvClass::Learn) ++learns;
    }
    CHECK(learns == L.size());
  }
}

TEST_CASE("attacker node wiring inside the kernel") {
  Fixture fx;
  EventStore events(fx.store);
  Kernel k(events);

  SUBCASE("nothing can be said from empty holdings") {
    KnowledgeState ks = make_knowledge_state(fx.u);
    ks.initial.clear();
    ks.known.clear();
    Intruder in = intruder_process(k, ks, fx.u.messages);
    auto says = enabled_facts(k, in.process, EvClass::Say);
    CHECK(says.empty());
    CHECK(enabled_facts(k, in.process, EvClass::Knows).empty());
    // Only learns are offered, one per learnable fact.
    CHECK(k.initials(in.process).size() == fx.u.learnable.size());
  }

  SUBCASE("a recorded ballot under a leaked key reveals the order") {
    std::array<FactId, 1> leak{fx.store.parse("skPS")};
    std::array<FactId, 1> ban{fx.store.parse("<Archimedes,Babbage>")};
    KnowledgeState ks = make_knowledge_state(fx.u, leak, ban);
    Intruder in = intruder_process(k, ks, fx.u.messages);

    FactId list = ban[0];
    // The bare candidate list is never a message, so it can be flagged but
    // not said; a composed vote built from the recovered list is sayable.
    FactId tell = fx.store.parse("vote(ind1,enc(pkPS,<Archimedes,Babbage>))");
    CHECK(!enabled_facts(k, in.process, EvClass::Say).count(tell));
    CHECK(!enabled_facts(k, in.process, EvClass::Say).count(list));
    CHECK(enabled_facts(k, in.process, EvClass::Knows).empty());

    FactId rawb = fx.store.parse("raw(s1,enc(pkPS,<Archimedes,Babbage>))");
    NodeId n = drive(k, in.process, events.learn(rawb));
    CHECK(enabled_facts(k, n, EvClass::Say).count(tell));
    CHECK(!enabled_facts(k, n, EvClass::Say).count(list));
    CHECK(enabled_facts(k, n, EvClass::Knows).count(list));
    CHECK(in.spy->knows(k.node(n).y, list));

    // Re-learning a known fact loops back to the same state.
    CHECK(drive(k, n, events.learn(rawb)) == n);
  }
}

TEST_CASE("deduction events render and parse both ways") {
  Fixture fx;
  EventStore events(fx.store);
  FactId prem = fx.store.fact_set(std::array<FactId, 2>{
      fx.store.parse("skPS"), fx.store.parse("enc(pkPS,<Archimedes,Babbage>)")});
  FactId concl = fx.store.parse("<Archimedes,Babbage>");
  EventId ev = events.infer_rule(prem, concl);
  std::string text = events.render(ev);
  CHECK(text == "infer." + fx.store.render(prem) + "." + fx.store.render(concl));
  CHECK(text.find("set(") != std::string::npos);
  CHECK(events.parse(text) == ev);

  EventId plain = events.infer(concl);
  CHECK(events.parse(events.render(plain)) == plain);
  CHECK(plain != ev);

  CHECK_THROWS_AS(events.infer_rule(concl, concl), wiring_error);
  CHECK_THROWS_AS(events.infer_rule(prem, prem), wiring_error);
}

TEST_CASE("reference cells agree with the compressed attacker") {
  // The smallest admissible world keeps the cell composition tractable.
  FactStore store;
  ScenarioConfig cfg;
  cfg.voters = {"Alice", "Bob"};
  cfg.dishonest = std::vector<std::string>{};
  Universe u = build_universe(store, cfg);
  EventStore events(store);
  Kernel k(events);

  std::array<FactId, 1> leak{store.parse("skEA")};
  std::array<FactId, 1> ban{store.parse("<Archimedes,Babbage>")};
  KnowledgeState ks = make_knowledge_state(u, leak, ban);

  Intruder in = intruder_process(k, ks, u.messages);
  NodeId cells = intruder_cells(k, ks, u.messages);
  NodeId hidden =
      k.hide(cells, events.set(class_bit(EvClass::Infer)));
  NodeId cq = tau_chase(k, hidden);

  std::mt19937 rng(5150);
  std::uniform_int_distribution<size_t> pick(0, u.learnable.size() - 1);
  std::uniform_int_distribution<int> len(1, 4);

  for (int trial = 0; trial < 40; ++trial) {
    std::vector<FactId> seq;
    int n = len(rng);
    for (int i = 0; i < n; ++i) seq.push_back(u.learnable[pick(rng)]);

    NodeId a = in.process;
    NodeId c = cq;
    for (FactId f : seq) {
      a = drive(k, a, events.learn(f));
      NodeId step = drive(k, c, events.learn(f));
      c = tau_chase(k, step);
      if (trial < 10) {
        // Scheduling order of the internal rule firings is irrelevant.
        CHECK(tau_chase(k, step, true) == c);
      }
    }
    CHECK(enabled_facts(k, a, EvClass::Say) == enabled_facts(k, c, EvClass::Say));
    CHECK(enabled_facts(k, a, EvClass::Knows) ==
          enabled_facts(k, c, EvClass::Knows));

    auto closed = as_set(close(ks, seq));
    for (FactId f : enabled_facts(k, c, EvClass::Say)) CHECK(closed.count(f));
  }
}
