#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "votecheck/deduction.hpp"
#include "votecheck/events.hpp"
#include "votecheck/facts.hpp"
#include "votecheck/process.hpp"

namespace votecheck {

// What the attacker may do to traffic on one kind of channel.
struct ChannelType {
  std::string_view name;
  bool overhear = false;
  bool block = false;
  bool spoof = false;
};

// The four channel kinds. Scenarios use S (fully private) for ballot
// handovers and NSB (observable but reliable) for all other agent traffic;
// InS arises as the take/fake wiring over ucomms. NOH is representable but
// no scenario routes traffic over it on its own.
std::span<const ChannelType> channel_types();
// Lookup by name; unknown names raise config_error.
const ChannelType& channel_type(std::string_view name);

// One directed message occurrence on the network.
struct CommTriple {
  FactId sender = kNoFact;
  FactId receiver = kNoFact;
  FactId payload = kNoFact;
  auto operator<=>(const CommTriple&) const = default;
};

// The traffic classes the wiring distinguishes. All three vectors are
// sorted and duplicate-free; nsbcomms and ucomms are subsets of comms.
struct CommSets {
  std::vector<CommTriple> comms;     // every possible real communication
  std::vector<CommTriple> nsbcomms;  // what the attacker may overhear
  std::vector<CommTriple> ucomms;    // what he may intercept or spoof
  bool in_comms(const CommTriple& t) const;
  bool in_nsbcomms(const CommTriple& t) const;
  bool in_ucomms(const CommTriple& t) const;
};

// {(a, b, m) | m a sendable message, a and b agents, a != b}: no agent
// messages himself, so a self-send can never be blocked or spoofed.
std::vector<CommTriple> comms_set(const Universe& u);

// comms minus every triple carrying a physical ballot. Handing a ballot
// over happens off the network, so the attacker cannot even observe it.
std::vector<CommTriple> nsbcomms_set(const Universe& u,
                                     std::span<const CommTriple> comms);

// The traffic the attacker fully controls. Restricted: every triple a
// dishonest agent sends or receives. Full: additionally all triples between
// honest agents except ballot handovers, which stay private so that voters
// keep their booth. extend_receipts additionally surrenders every
// receipt-carrying triple, letting the attacker block voters from taking
// their receipts home.
std::vector<CommTriple> ucomms_set(const Universe& u,
                                   std::span<const CommTriple> comms,
                                   std::span<const FactId> dishonest,
                                   ThreatModel threat, bool extend_receipts);

// Assembles all three sets for one scenario. Dishonest names must be
// declared voters; anything else raises config_error.
CommSets build_comm_sets(const Universe& u, const ScenarioConfig& cfg);

// Aliases every communication of `agent` onto the intercept channels: a
// send nsbcomm/scomm.agent.b.m is also offered as take.agent.b.m and a
// receive nsbcomm/scomm.a.agent.m also as fake.a.agent.m. The original
// events remain available, so honest runs are untouched; whether an alias
// can ever fire is decided entirely by the attacker's side of the wiring.
// A communication event in p's alphabet that `agent` takes no part in
// raises wiring_error.
NodeId wire_agent(Kernel& k, NodeId p, FactId agent);

// A fully wired scenario. Keep this alive while exploring `system`: it
// owns the attacker behavior the kernel references.
struct WiredSystem {
  Intruder intruder;
  NodeId rintruder = kNoNode;  // attacker renamed onto the network
  NodeId system = kNoNode;     // model composed with rintruder
  EventSetId sync = 0;         // shared channels: nsbcomm, take, fake
};

// Connects the attacker to a composed agent model. learn.f is renamed to
// every overhearable occurrence nsbcomm.p.p'.f and every interceptable
// occurrence take.q.q'.f; say.f to every spoofable occurrence fake.q.q'.f;
// learn events for facts that never travel are suppressed. The composition
// synchronizes on all of nsbcomm, take and fake: overhearing rides on real
// communications, while an intercept consumes a send the receiver never
// sees and a spoof satisfies a receive the sender never made.
WiredSystem wire_system(Kernel& k, NodeId model, const KnowledgeState& ks,
                        const CommSets& cs);

}  // namespace votecheck
