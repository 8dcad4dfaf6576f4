#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "votecheck/channels.hpp"
#include "votecheck/deduction.hpp"
#include "votecheck/events.hpp"
#include "votecheck/facts.hpp"
#include "votecheck/process.hpp"

using namespace votecheck;

namespace {

struct Fixture {
  FactStore store;
  ScenarioConfig cfg;
  Universe u;
  Fixture() : u(build_universe(store, cfg)) {}
  FactId f(std::string_view text) { return store.parse(text); }
};

// Drives one visible event, asserting the successor is unique.
NodeId drive(Kernel& k, NodeId n, EventId e) {
  std::vector<NodeId> succ;
  k.probe(n, e, succ);
  REQUIRE(succ.size() == 1);
  return succ[0];
}

std::set<EventId> enabled(Kernel& k, NodeId n) {
  std::set<EventId> out;
  for (const Transition& t : k.initials(n)) out.insert(t.ev);
  return out;
}

struct Edge {
  NodeId from;
  EventId ev;
  NodeId to;
};

// Every transition reachable within `depth` steps. Node identity is the
// hash-consed term id, so cycles are cut off exactly.
std::vector<Edge> explore_edges(Kernel& k, NodeId root, int depth) {
  std::vector<Edge> edges;
  std::set<NodeId> seen{k.resolve(root)};
  std::deque<std::pair<NodeId, int>> queue{{k.resolve(root), 0}};
  while (!queue.empty()) {
    auto [n, d] = queue.front();
    queue.pop_front();
    if (d >= depth) continue;
    for (const Transition& t : k.initials(n)) {
      NodeId to = k.resolve(t.to);
      edges.push_back({n, t.ev, to});
      if (seen.insert(to).second) queue.emplace_back(to, d + 1);
    }
    REQUIRE(edges.size() < 200000);
  }
  return edges;
}

// The prefix-closed visible-trace language up to `depth`. The miniature
// models here have no internal moves, so every transition is a real event.
TraceSet languages(Kernel& k, NodeId root, int depth) {
  TraceSet out;
  std::vector<EventId> acc;
  auto walk = [&](auto&& self, NodeId n, int left) -> void {
    out.insert(acc);
    if (left == 0) return;
    for (const Transition& t : k.initials(n)) {
      REQUIRE(t.ev != k.events().tau());
      acc.push_back(t.ev);
      self(self, k.resolve(t.to), left - 1);
      acc.pop_back();
    }
  };
  walk(walk, k.resolve(root), depth);
  return out;
}

// Digs the attacker's knowledge handle out of a composed system state.
uint32_t spy_know(Kernel& k, NodeId system) {
  const NodeRec& par = k.node(k.resolve(system));
  REQUIRE(par.op == Op::Parallel);
  const NodeRec& ren = k.node(k.resolve(par.y));
  REQUIRE(ren.op == Op::Rename);
  const NodeRec& spy = k.node(k.resolve(ren.x));
  REQUIRE(spy.op == Op::Spy);
  return spy.y;
}

// Checks that every explored transition respects the channel capabilities:
// takes and fakes only over controlled traffic, overhears only over
// observable traffic, and no intercept alias of an honest private handover.
void check_capabilities(Kernel& k, std::span<const Edge> edges,
                        const CommSets& cs) {
  EventStore& es = k.events();
  for (const Edge& e : edges) {
    const EventNode& n = es.node(e.ev);
    CommTriple t{static_cast<FactId>(n.a), static_cast<FactId>(n.b),
                 static_cast<FactId>(n.c)};
    switch (n.cls) {
      case EvClass::Take:
      case EvClass::Fake:
        CHECK_MESSAGE(cs.in_ucomms(t), es.render(e.ev));
        break;
      case EvClass::Nsbcomm:
        CHECK_MESSAGE(cs.in_nsbcomms(t), es.render(e.ev));
        break;
      default:
        break;
    }
  }
}

}  // namespace

TEST_CASE("capability matrix pins the four channel kinds") {
  auto types = channel_types();
  REQUIRE(types.size() == 4);

  auto row = [&](std::string_view name, bool overhear, bool block,
                 bool spoof) {
    const ChannelType& c = channel_type(name);
    CHECK(c.name == name);
    CHECK(c.overhear == overhear);
    CHECK(c.block == block);
    CHECK(c.spoof == spoof);
  };
  row("S", false, false, false);
  row("NOH", false, true, true);
  row("NSB", true, false, false);
  row("InS", true, true, true);

  CHECK_THROWS_AS(channel_type("NB"), config_error);
  CHECK_THROWS_AS(channel_type(""), config_error);
}

TEST_CASE("traffic sets partition by payload and participants") {
  Fixture f;
  CommSets cs = build_comm_sets(f.u, f.cfg);  // James dishonest, restricted

  const size_t pairs = f.u.agents.size() * (f.u.agents.size() - 1);
  REQUIRE(f.u.agents.size() == 12);

  // comms: every ordered pair of distinct agents times every message.
  CHECK(cs.comms.size() == f.u.messages.size() * pairs);
  CHECK(cs.comms.size() == 112860);
  CHECK(std::is_sorted(cs.comms.begin(), cs.comms.end()));
  CHECK(std::adjacent_find(cs.comms.begin(), cs.comms.end()) ==
        cs.comms.end());
  size_t self_sends = 0;
  for (const CommTriple& t : cs.comms)
    if (t.sender == t.receiver) ++self_sends;
  CHECK(self_sends == 0);

  FactId alice = f.f("Alice");
  FactId james = f.f("James");
  FactId vote = f.f("vote(ind1,enc(pkEA,<Archimedes,Babbage>))");
  FactId ballot = f.f("ballot(<Archimedes,Babbage>,sign(skPS,s1),ind0)");
  FactId rhs = f.f("rhs(sign(skPS,s1),ind1)");
  CHECK(cs.in_comms({f.u.wbb, f.u.teller, vote}));
  CHECK_FALSE(cs.in_comms({alice, alice, vote}));

  // nsbcomms: exactly the ballot-free part of comms.
  CHECK(std::includes(cs.comms.begin(), cs.comms.end(), cs.nsbcomms.begin(),
                      cs.nsbcomms.end()));
  CHECK(cs.nsbcomms.size() == cs.comms.size() - f.u.ballots.size() * pairs);
  CHECK(cs.nsbcomms.size() == 98604);
  size_t nsb_mismatch = 0;
  for (const CommTriple& t : cs.comms) {
    bool want = f.store.tag(t.payload) != FactTag::Ballot;
    if (cs.in_nsbcomms(t) != want) ++nsb_mismatch;
  }
  CHECK(nsb_mismatch == 0);
  CHECK_FALSE(cs.in_nsbcomms({f.u.podclient, alice, ballot}));
  CHECK(cs.in_nsbcomms({f.u.ebm, f.u.wbb, rhs}));

  // ucomms (restricted): exactly the dishonest voter's traffic.
  CHECK(std::includes(cs.comms.begin(), cs.comms.end(), cs.ucomms.begin(),
                      cs.ucomms.end()));
  CHECK(cs.ucomms.size() == f.u.messages.size() * 2 * (f.u.agents.size() - 1));
  CHECK(cs.ucomms.size() == 18810);
  size_t u_mismatch = 0;
  for (const CommTriple& t : cs.comms) {
    bool want = t.sender == james || t.receiver == james;
    if (cs.in_ucomms(t) != want) ++u_mismatch;
  }
  CHECK(u_mismatch == 0);
  CHECK(cs.in_ucomms({james, f.u.ebm, f.f("ind2")}));
  CHECK_FALSE(cs.in_ucomms({alice, f.u.ebm, f.f("ind1")}));
  CHECK_FALSE(cs.in_ucomms({f.u.wbb, f.u.teller, vote}));

  // Handing the attacker the receipt traffic as well makes it blockable.
  {
    ScenarioConfig ext = f.cfg;
    ext.extend_receipts = true;
    CommSets er = build_comm_sets(f.u, ext);
    FactId receipt = f.f("receipt(skW,rhs(sign(skPS,s1),ind1))");
    CHECK(er.in_ucomms({f.u.printer, alice, receipt}));
    CHECK(er.ucomms.size() ==
          cs.ucomms.size() + f.u.receipts.size() * (pairs - 2 * (f.u.agents.size() - 1)));
    CHECK(er.ucomms.size() == 54450);
  }

  // The unrestricted threat controls everything except ballot handovers
  // between honest agents.
  {
    ScenarioConfig full = f.cfg;
    full.threat = ThreatModel::Full;
    CommSets fu = build_comm_sets(f.u, full);
    CHECK(fu.in_ucomms({f.u.wbb, f.u.teller, vote}));
    CHECK_FALSE(fu.in_ucomms({f.u.podclient, alice, ballot}));
    CHECK(fu.in_ucomms({f.u.podclient, james, ballot}));
    CHECK(fu.ucomms.size() ==
          cs.nsbcomms.size() + f.u.ballots.size() * 2 * (f.u.agents.size() - 1));
    CHECK(fu.ucomms.size() == 100980);
    CHECK(std::includes(fu.ucomms.begin(), fu.ucomms.end(),
                        cs.ucomms.begin(), cs.ucomms.end()));
  }

  // Nobody dishonest: nothing to control under the restricted threat, and
  // exactly the observable traffic under the unrestricted one.
  {
    ScenarioConfig honest = f.cfg;
    honest.dishonest = std::vector<std::string>{};
    CommSets hs = build_comm_sets(f.u, honest);
    CHECK(hs.ucomms.empty());
    honest.threat = ThreatModel::Full;
    CommSets hf = build_comm_sets(f.u, honest);
    CHECK(hf.ucomms == hf.nsbcomms);
  }

  // Dishonest names must be declared voters.
  {
    ScenarioConfig bad = f.cfg;
    bad.dishonest = std::vector<std::string>{"Tom"};
    CHECK_THROWS_AS(build_comm_sets(f.u, bad), config_error);
    bad.dishonest = std::vector<std::string>{"Nobody"};
    CHECK_THROWS_AS(build_comm_sets(f.u, bad), config_error);
  }
}

TEST_CASE("wiring an agent adds intercept aliases beside honest events") {
  Fixture f;
  EventStore es(f.store);
  Kernel k(es);

  FactId alice = f.f("Alice");
  FactId ind1 = f.f("ind1");
  FactId ballot = f.f("ballot(<Archimedes,Babbage>,sign(skPS,s1),ind0)");

  EventId send = es.comm(EvClass::Nsbcomm, alice, f.u.ebm, ind1);
  EventId recv = es.comm(EvClass::Scomm, f.u.podclient, alice, ballot);
  NodeId p = k.prefix(send, k.prefix(recv, k.stop()));
  NodeId w = wire_agent(k, p, alice);

  EventId take_send = es.comm(EvClass::Take, alice, f.u.ebm, ind1);
  EventId fake_recv = es.comm(EvClass::Fake, f.u.podclient, alice, ballot);

  CHECK(enabled(k, w) == std::set<EventId>{send, take_send});
  NodeId after = drive(k, w, send);
  CHECK(drive(k, w, take_send) == after);  // aliases share the continuation
  CHECK(enabled(k, after) == std::set<EventId>{recv, fake_recv});

  auto tr = [&](std::initializer_list<EventId> evs) {
    return std::vector<EventId>(evs);
  };
  TraceSet want{{},
                tr({send}),
                tr({take_send}),
                tr({send, recv}),
                tr({send, fake_recv}),
                tr({take_send, recv}),
                tr({take_send, fake_recv})};
  CHECK(k.traces_bruteforce(w, 2) == want);

  // Alice takes no part in podclient-to-ebm traffic.
  NodeId other =
      k.prefix(es.comm(EvClass::Nsbcomm, f.u.podclient, f.u.ebm, ind1), k.stop());
  CHECK_THROWS_AS(wire_agent(k, other, alice), wiring_error);

  // Events off the agent channels pass through untouched.
  NodeId opened = k.prefix(es.open_election(), k.prefix(send, k.stop()));
  NodeId wopen = wire_agent(k, opened, alice);
  CHECK(enabled(k, wopen) == std::set<EventId>{es.open_election()});
  CHECK(enabled(k, drive(k, wopen, es.open_election())) ==
        std::set<EventId>{send, take_send});

  // Wiring a looping definition converges to a recurring state.
  k.define("relay", [&](std::span<const FactId>) {
    return k.prefix(send, k.call("relay"));
  });
  NodeId loop = wire_agent(k, k.call("relay"), alice);
  NodeId s1 = drive(k, loop, take_send);
  NodeId s2 = drive(k, s1, send);
  CHECK(s1 == s2);
  CHECK(enabled(k, s1) == std::set<EventId>{send, take_send});
}

TEST_CASE("system wiring grants exactly the configured capabilities") {
  Fixture f;
  EventStore es(f.store);
  Kernel k(es);

  FactId alice = f.f("Alice");
  FactId james = f.f("James");
  FactId ind1 = f.f("ind1");
  FactId ballot = f.f("ballot(<Archimedes,Babbage>,sign(skPS,s1),ind0)");
  FactId signednonce = f.f("sign(skPC,na)");

  CommSets cs = build_comm_sets(f.u, f.cfg);
  KnowledgeState ks = make_knowledge_state(f.u);

  SUBCASE("the dishonest voter's handover can be intercepted and replayed") {
    EventId hand = es.comm(EvClass::Scomm, f.u.podclient, james, ballot);
    EventId take_hand = es.comm(EvClass::Take, f.u.podclient, james, ballot);
    EventId fake_hand = es.comm(EvClass::Fake, f.u.podclient, james, ballot);
    EventId jsend = es.comm(EvClass::Nsbcomm, james, f.u.ebm, ind1);
    EventId take_jsend = es.comm(EvClass::Take, james, f.u.ebm, ind1);

    NodeId pc = wire_agent(k, k.prefix(hand, k.stop()), f.u.podclient);
    NodeId jv = wire_agent(k, k.prefix(hand, k.prefix(jsend, k.stop())), james);
    NodeId model = k.parallel(pc, jv, es.set(0, std::array{hand}));

    WiredSystem ws = wire_system(k, model, ks, cs);

    // Initially the handover can happen honestly or be intercepted; a spoof
    // needs a ballot the attacker does not yet hold.
    CHECK(enabled(k, ws.system) == std::set<EventId>{hand, take_hand});
    CHECK_FALSE(ws.intruder.spy->knows(spy_know(k, ws.system), ballot));

    NodeId taken = drive(k, ws.system, take_hand);
    CHECK(ws.intruder.spy->knows(spy_know(k, taken), ballot));
    // The receiver never saw the handover; only a replay satisfies it now.
    CHECK(enabled(k, taken) == std::set<EventId>{fake_hand});

    NodeId replayed = drive(k, taken, fake_hand);
    CHECK(enabled(k, replayed) == std::set<EventId>{jsend, take_jsend});

    auto tr = [&](std::initializer_list<EventId> evs) {
      return std::vector<EventId>(evs);
    };
    TraceSet want{{},
                  tr({hand}),
                  tr({take_hand}),
                  tr({hand, jsend}),
                  tr({hand, take_jsend}),
                  tr({take_hand, fake_hand}),
                  tr({take_hand, fake_hand, jsend}),
                  tr({take_hand, fake_hand, take_jsend})};
    CHECK(languages(k, ws.system, 4) == want);

    // An honest handover leaks nothing.
    NodeId handed = drive(k, ws.system, hand);
    CHECK_FALSE(ws.intruder.spy->knows(spy_know(k, handed), ballot));

    auto edges = explore_edges(k, ws.system, 6);
    check_capabilities(k, edges, cs);
  }

  SUBCASE("honest traffic is observed but never touched") {
    EventId hand = es.comm(EvClass::Scomm, f.u.podclient, alice, ballot);
    EventId asend = es.comm(EvClass::Nsbcomm, alice, f.u.podservice, signednonce);
    EventId take_asend =
        es.comm(EvClass::Take, alice, f.u.podservice, signednonce);

    NodeId pc = wire_agent(k, k.prefix(hand, k.stop()), f.u.podclient);
    NodeId av = wire_agent(k, k.prefix(hand, k.prefix(asend, k.stop())), alice);
    NodeId model = k.parallel(pc, av, es.set(0, std::array{hand}));

    WiredSystem ws = wire_system(k, model, ks, cs);
    CHECK(enabled(k, ws.system) == std::set<EventId>{hand});
    NodeId handed = drive(k, ws.system, hand);
    CHECK(enabled(k, handed) == std::set<EventId>{asend});

    // Overhearing is how the attacker learns.
    CHECK_FALSE(ws.intruder.spy->knows(spy_know(k, handed), signednonce));
    NodeId heard = drive(k, handed, asend);
    CHECK(ws.intruder.spy->knows(spy_know(k, heard), signednonce));
    CHECK_FALSE(ws.intruder.spy->knows(spy_know(k, heard), ballot));

    auto edges = explore_edges(k, ws.system, 6);
    check_capabilities(k, edges, cs);
    for (const Edge& e : edges) {
      EvClass c = es.cls(e.ev);
      CHECK(c != EvClass::Take);
      CHECK(c != EvClass::Fake);
    }

    // The unrestricted threat reaches strictly more, but the private
    // handover stays beyond its reach.
    ScenarioConfig full_cfg = f.cfg;
    full_cfg.threat = ThreatModel::Full;
    CommSets full = build_comm_sets(f.u, full_cfg);
    WiredSystem wf = wire_system(k, model, ks, full);
    CHECK(enabled(k, wf.system) == std::set<EventId>{hand});
    CHECK(enabled(k, drive(k, wf.system, hand)) ==
          std::set<EventId>{asend, take_asend});
    TraceSet restricted_lang = languages(k, ws.system, 4);
    TraceSet full_lang = languages(k, wf.system, 4);
    CHECK(std::includes(full_lang.begin(), full_lang.end(),
                        restricted_lang.begin(), restricted_lang.end()));
    CHECK(full_lang.size() > restricted_lang.size());
    check_capabilities(k, explore_edges(k, wf.system, 6), full);
  }

  SUBCASE("ballot payloads deadlock on the observable channel") {
    EventId rogue = es.comm(EvClass::Nsbcomm, f.u.podclient, alice, ballot);
    NodeId model = wire_agent(k, k.prefix(rogue, k.stop()), f.u.podclient);
    WiredSystem ws = wire_system(k, model, ks, cs);
    CHECK(enabled(k, ws.system).empty());
    std::vector<NodeId> succ;
    k.probe(ws.system, rogue, succ);
    CHECK(succ.empty());
  }

  SUBCASE("an all-honest wiring is a purely passive observer") {
    ScenarioConfig honest_cfg = f.cfg;
    honest_cfg.dishonest = std::vector<std::string>{};
    CommSets honest = build_comm_sets(f.u, honest_cfg);

    EventId hand = es.comm(EvClass::Scomm, f.u.podclient, james, ballot);
    EventId jsend = es.comm(EvClass::Nsbcomm, james, f.u.ebm, ind1);
    NodeId pc = wire_agent(k, k.prefix(hand, k.stop()), f.u.podclient);
    NodeId jv = wire_agent(k, k.prefix(hand, k.prefix(jsend, k.stop())), james);
    NodeId model = k.parallel(pc, jv, es.set(0, std::array{hand}));

    WiredSystem ws = wire_system(k, model, ks, honest);
    CHECK(enabled(k, ws.system) == std::set<EventId>{hand});
    CHECK(enabled(k, drive(k, ws.system, hand)) == std::set<EventId>{jsend});
    for (const Edge& e : explore_edges(k, ws.system, 6)) {
      EvClass c = es.cls(e.ev);
      CHECK(c != EvClass::Take);
      CHECK(c != EvClass::Fake);
    }
  }

  SUBCASE("a banned fact raises its flag as a free event") {
    KnowledgeState flagged =
        make_knowledge_state(f.u, {}, std::array{signednonce});
    EventId hand = es.comm(EvClass::Scomm, f.u.podclient, alice, ballot);
    EventId asend = es.comm(EvClass::Nsbcomm, alice, f.u.podservice, signednonce);
    NodeId pc = wire_agent(k, k.prefix(hand, k.stop()), f.u.podclient);
    NodeId av = wire_agent(k, k.prefix(hand, k.prefix(asend, k.stop())), alice);
    NodeId model = k.parallel(pc, av, es.set(0, std::array{hand}));

    WiredSystem ws = wire_system(k, model, ks, cs);
    CHECK_FALSE(enabled(k, ws.system).count(es.knows(signednonce)));

    WiredSystem wsf = wire_system(k, model, flagged, cs);
    CHECK_FALSE(enabled(k, wsf.system).count(es.knows(signednonce)));
    NodeId heard = drive(k, drive(k, wsf.system, hand), asend);
    CHECK(enabled(k, heard).count(es.knows(signednonce)) == 1);
    // Raising the flag changes nothing else.
    CHECK(drive(k, heard, es.knows(signednonce)) == heard);
  }
}

TEST_CASE("wired exploration is identical across independent builds") {
  auto build = [](std::vector<std::string>& traces) {
    Fixture f;
    EventStore es(f.store);
    Kernel k(es);
    FactId james = f.store.parse("James");
    FactId ballot = f.store.parse("ballot(<Archimedes,Babbage>,sign(skPS,s1),ind0)");
    FactId ind1 = f.store.parse("ind1");

    EventId hand = es.comm(EvClass::Scomm, f.u.podclient, james, ballot);
    EventId jsend = es.comm(EvClass::Nsbcomm, james, f.u.ebm, ind1);
    NodeId pc = wire_agent(k, k.prefix(hand, k.stop()), f.u.podclient);
    NodeId jv = wire_agent(k, k.prefix(hand, k.prefix(jsend, k.stop())), james);
    NodeId model = k.parallel(pc, jv, es.set(0, std::array{hand}));

    CommSets cs = build_comm_sets(f.u, f.cfg);
    KnowledgeState ks = make_knowledge_state(f.u);
    WiredSystem ws = wire_system(k, model, ks, cs);
    for (const std::vector<EventId>& t : languages(k, ws.system, 4)) {
      std::string line;
      for (EventId e : t) {
        if (!line.empty()) line += ", ";
        line += es.render(e);
      }
      traces.push_back(std::move(line));
    }
  };
  std::vector<std::string> first, second;
  build(first);
  build(second);
  CHECK(first == second);
  CHECK(first.size() == 8);
}
