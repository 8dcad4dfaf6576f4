#include "votecheck/channels.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace votecheck {

namespace {

constexpr std::array<ChannelType, 4> kChannelTypes{{
    {"S", false, false, false},
    {"NOH", false, true, true},
    {"NSB", true, false, false},
    {"InS", true, true, true},
}};

}  // namespace

std::span<const ChannelType> channel_types() { return kChannelTypes; }

const ChannelType& channel_type(std::string_view name) {
  for (const ChannelType& c : kChannelTypes)
    if (c.name == name) return c;
  throw config_error("unknown channel type: " + std::string(name));
}

bool CommSets::in_comms(const CommTriple& t) const {
  return std::binary_search(comms.begin(), comms.end(), t);
}
bool CommSets::in_nsbcomms(const CommTriple& t) const {
  return std::binary_search(nsbcomms.begin(), nsbcomms.end(), t);
}
bool CommSets::in_ucomms(const CommTriple& t) const {
  return std::binary_search(ucomms.begin(), ucomms.end(), t);
}

std::vector<CommTriple> comms_set(const Universe& u) {
  std::vector<CommTriple> out;
  out.reserve(u.messages.size() * u.agents.size() * (u.agents.size() - 1));
  for (FactId a : u.agents)
    for (FactId b : u.agents) {
      if (a == b) continue;
      for (FactId m : u.messages) out.push_back({a, b, m});
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CommTriple> nsbcomms_set(const Universe& u,
                                     std::span<const CommTriple> comms) {
  std::vector<CommTriple> out;
  out.reserve(comms.size());
  for (const CommTriple& t : comms)
    if (u.store->tag(t.payload) != FactTag::Ballot) out.push_back(t);
  return out;
}

std::vector<CommTriple> ucomms_set(const Universe& u,
                                   std::span<const CommTriple> comms,
                                   std::span<const FactId> dishonest,
                                   ThreatModel threat, bool extend_receipts) {
  std::vector<bool> dis(u.store->size(), false);
  for (FactId d : dishonest) {
    if (u.store->tag(d) != FactTag::Agent)
      throw config_error("dishonest entry is not an agent: " +
                         u.store->render(d));
    dis[d] = true;
  }
  std::vector<CommTriple> out;
  for (const CommTriple& t : comms) {
    FactTag tag = u.store->tag(t.payload);
    bool controlled = dis[t.sender] || dis[t.receiver];
    if (threat == ThreatModel::Full && tag != FactTag::Ballot)
      controlled = true;  // everything but the booth handover is fair game
    if (extend_receipts && tag == FactTag::Receipt) controlled = true;
    if (controlled) out.push_back(t);
  }
  return out;
}

CommSets build_comm_sets(const Universe& u, const ScenarioConfig& cfg) {
  std::vector<FactId> dishonest;
  for (const std::string& name : cfg.dishonest_voters()) {
    auto it = std::find_if(u.voters.begin(), u.voters.end(), [&](FactId v) {
      return u.store->sym_name(u.store->sym_of(v)) == name;
    });
    if (it == u.voters.end())
      throw config_error("dishonest voter is not a declared voter: " + name);
    dishonest.push_back(*it);
  }
  CommSets cs;
  cs.comms = comms_set(u);
  cs.nsbcomms = nsbcomms_set(u, cs.comms);
  cs.ucomms =
      ucomms_set(u, cs.comms, dishonest, cfg.threat, cfg.extend_receipts);
  return cs;
}

NodeId wire_agent(Kernel& k, NodeId p, FactId agent) {
  EventStore& es = k.events();
  std::vector<std::pair<EventId, EventId>> pairs;
  for (EventId e : k.alphabet(p)) {
    EvClass c = es.cls(e);
    if (c != EvClass::Nsbcomm && c != EvClass::Scomm) continue;
    const EventNode& n = es.node(e);
    pairs.emplace_back(e, e);  // the honest occurrence stays available
    if (static_cast<FactId>(n.a) == agent) {
      pairs.emplace_back(e, es.comm(EvClass::Take, static_cast<FactId>(n.a),
                                    static_cast<FactId>(n.b),
                                    static_cast<FactId>(n.c)));
    } else if (static_cast<FactId>(n.b) == agent) {
      pairs.emplace_back(e, es.comm(EvClass::Fake, static_cast<FactId>(n.a),
                                    static_cast<FactId>(n.b),
                                    static_cast<FactId>(n.c)));
    } else {
      throw wiring_error(
          es.facts().sym_name(es.facts().sym_of(agent)) +
          " takes no part in its own communication event: " + es.render(e));
    }
  }
  RenameRelId rel = es.rename_rel(
      std::move(pairs),
      class_bit(EvClass::Nsbcomm) | class_bit(EvClass::Scomm));
  return k.rename_proc(p, rel);
}

WiredSystem wire_system(Kernel& k, NodeId model, const KnowledgeState& ks,
                        const CommSets& cs) {
  EventStore& es = k.events();
  const Universe& u = *ks.universe;

  // Say capability exists exactly toward the traffic the attacker controls.
  std::vector<FactId> sayable;
  sayable.reserve(cs.ucomms.size());
  for (const CommTriple& t : cs.ucomms) sayable.push_back(t.payload);
  std::sort(sayable.begin(), sayable.end());
  sayable.erase(std::unique(sayable.begin(), sayable.end()), sayable.end());

  WiredSystem ws;
  ws.intruder = intruder_process(k, ks, sayable);

  std::vector<bool> carried(u.store->size(), false);
  std::vector<std::pair<EventId, EventId>> pairs;
  pairs.reserve(cs.nsbcomms.size() + 2 * cs.ucomms.size());
  for (const CommTriple& t : cs.nsbcomms) {
    if (!u.in_messages(t.payload))
      throw config_error("network carries a non-message fact: " +
                         u.store->render(t.payload));
    carried[t.payload] = true;
    pairs.emplace_back(es.learn(t.payload), es.comm(EvClass::Nsbcomm, t.sender,
                                                    t.receiver, t.payload));
  }
  for (const CommTriple& t : cs.ucomms) {
    if (!u.in_messages(t.payload))
      throw config_error("network carries a non-message fact: " +
                         u.store->render(t.payload));
    carried[t.payload] = true;
    pairs.emplace_back(es.learn(t.payload),
                       es.comm(EvClass::Take, t.sender, t.receiver, t.payload));
    pairs.emplace_back(es.say(t.payload),
                       es.comm(EvClass::Fake, t.sender, t.receiver, t.payload));
  }
  // Facts that never travel cannot be picked up from the network at all.
  std::vector<EventId> suppressed;
  for (FactId f : u.learnable)
    if (!carried[f]) suppressed.push_back(es.learn(f));

  RenameRelId rel = es.rename_rel(
      std::move(pairs), class_bit(EvClass::Learn) | class_bit(EvClass::Say),
      std::move(suppressed));
  ws.rintruder = k.rename_proc(ws.intruder.process, rel);
  ws.sync = es.set(class_bit(EvClass::Nsbcomm) | class_bit(EvClass::Take) |
                   class_bit(EvClass::Fake));
  // The model goes on the left: stepping a composition enumerates the left
  // side and only probes the right, and the attacker's side is far too wide
  // to enumerate.
  ws.system = k.parallel(model, ws.rintruder, ws.sync);
  return ws;
}

}  // namespace votecheck
