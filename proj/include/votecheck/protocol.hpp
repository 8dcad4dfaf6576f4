#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "votecheck/config.hpp"
#include "votecheck/facts.hpp"
#include "votecheck/process.hpp"

namespace votecheck {

// The candidate each honest voter marks, per the configured world side.
// With an explicit cfg.world_pair the entries must name every honest voter
// exactly once and only declared candidates; malformed tables raise
// config_error. Without one the assignment is derived: the first two honest
// voters swap the first two candidates between the world sides, any further
// honest voter keeps the same cyclically chosen candidate on both sides.
// Dishonest voters never appear here; they choose on their own inside the
// model. Pairs come back in voter declaration order.
std::vector<std::pair<FactId, FactId>> honest_choices(const Universe& u,
                                                      const ScenarioConfig& cfg);

// Binds the election participant definitions into the kernel and interns
// every event they can ever perform, so exploration after EventStore::freeze
// never needs a new event. Idempotent per kernel; a second call with a
// different universe or scenario raises wiring_error. The definitions are
// addressable by name for direct instantiation in tests:
//   Voter(voter, candidate)          Pollworker(voterSet, nonceSet)
//   Authority / Authority1(serialSet)
//   Podservice                       Podclient
//   Ballotmanager / Ballotmanager1(serialSet)
//   EBM                              Printer
//   WBB / WBB1(vote...) / WBB2(vote...)   (variadic args: the vote multiset)
//   Teller / Teller1(count...)       (one count per candidate)
void register_protocol(Kernel& k, const Universe& u, const ScenarioConfig& cfg);

// One participant's process, exactly as the protocol prescribes, with no
// intercept aliases. Roles: voter (the configured world's voter block),
// pollworker, authority, podservice, podclient, ballotmanager, ebm,
// printer, wbb, teller. Unknown roles raise config_error.
NodeId build_agent(Kernel& k, std::string_view role, const Universe& u,
                   const ScenarioConfig& cfg);

// The voter block of the configured world: honest voters run the plain
// voting sequence with their assigned candidate; each dishonest voter picks
// a candidate internally and, when `threat_aliased` is set, has all his
// communications aliased onto the intercept channels.
NodeId build_voters(Kernel& k, const Universe& u, const ScenarioConfig& cfg,
                    bool threat_aliased);

// The full election: voters, pollworker, authority, EBM, POD service,
// printer, ballot manager, POD client, WBB and teller, composed pairwise on
// exactly the communication events they share; openElection, closeElection
// and the tally endgame synchronize multiway through those interfaces.
// Every fixed role and every dishonest voter carries intercept aliases,
// ready for composition with the attacker. Honest voters stay plain: their
// traffic can be overheard on the shared channels but never absorbed or
// forged on their behalf.
NodeId build_model(Kernel& k, const Universe& u, const ScenarioConfig& cfg);

// The same composition with no intercept aliases anywhere: the election as
// its participants alone would run it. Attacker-free sanity checks (tally
// conservation, serial uniqueness, endgame uniqueness) explore this form.
NodeId build_plain_model(Kernel& k, const Universe& u, const ScenarioConfig& cfg);

}  // namespace votecheck
