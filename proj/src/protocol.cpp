#include "votecheck/protocol.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "votecheck/channels.hpp"
#include "votecheck/events.hpp"

namespace votecheck {
namespace {

// Everything the definition bodies need. Bodies run lazily, whenever the
// kernel first expands a (definition, arguments) pair, so they share one
// heap-allocated context instead of capturing references into the caller's
// frame.
struct ProtoCtx {
  Kernel* k = nullptr;
  EventStore* es = nullptr;
  FactStore* fs = nullptr;
  Universe u;  // by value: the context outlives the caller's copy
  bool booth = false;
  // The bulletin board never accumulates more submissions than this: every
  // submission pushes a receipt to the printer, the printer must hand the
  // previous receipt to a voter before accepting the next, and each voter
  // collects at most one. Bounding the recursion there keeps the set of
  // expandable argument tuples finite without cutting off any reachable run.
  int bag_cap = 0;
  std::vector<FactId> cast;  // markable positions: indices 1..|candidates|
  // Receipts the bulletin board can actually issue. The printer's intake must
  // range over exactly this set: a receive nobody can send would never be
  // pulled into a synchronization interface and would fire as a free event.
  std::vector<FactId> issuable;

  EventId nsb(FactId a, FactId b, FactId m) const {
    return es->comm(EvClass::Nsbcomm, a, b, m);
  }
  EventId priv(FactId a, FactId b, FactId m) const {
    return es->comm(EvClass::Scomm, a, b, m);
  }
  NodeId close_stop() const {
    return k->prefix(es->close_election(), k->stop());
  }
  FactId signed_serial(FactId s) const { return fs->sign(u.skPS, s); }
  FactId paper_ballot(FactId l, FactId s) const {
    return fs->ballot(l, signed_serial(s), u.indices[0]);
  }
};

using Ctx = std::shared_ptr<const ProtoCtx>;

std::span<const FactId> set_members(const FactStore& fs, FactId set) {
  if (fs.tag(set) != FactTag::FactSet)
    throw wiring_error("expected a fact set argument");
  return fs.list(static_cast<ListId>(fs.node(set).a));
}

FactId set_without(FactStore& fs, FactId set, FactId member) {
  auto ms = set_members(fs, set);
  std::vector<FactId> rest;
  rest.reserve(ms.size());
  for (FactId f : ms)
    if (f != member) rest.push_back(f);
  return fs.fact_set(rest);
}

// ---------------------------------------------------------------------------
// Definition bodies
// ---------------------------------------------------------------------------

// Voter(v, c): check in with the pollworker, receive a printed ballot form,
// hand it to the ballot marker, mark the position where c sits on the
// form's candidate order, take the printed receipt, then let the election
// close. The ballot handovers ride the private channel; everything else is
// public traffic.
NodeId voter_body(const Ctx& ctx, std::span<const FactId> a) {
  if (a.size() != 2) throw wiring_error("Voter takes (voter, candidate)");
  FactStore& fs = *ctx->fs;
  if (fs.tag(a[0]) != FactTag::Agent || fs.tag(a[1]) != FactTag::Candidate)
    throw wiring_error("Voter takes (voter, candidate)");
  Kernel& k = *ctx->k;
  EventStore& es = *ctx->es;
  const Universe& u = ctx->u;
  const FactId v = a[0], c = a[1];

  std::vector<NodeId> forms;
  for (FactId l : u.lists)
    for (FactId s : u.serials) {
      const FactId form = ctx->paper_ballot(l, s);
      const FactId mark = u.indices[static_cast<size_t>(find_candidate(fs, c, l))];
      NodeId t = ctx->close_stop();
      t = k.prefix(ctx->nsb(u.printer, v, fs.receipt(u.skW, fs.rhs(ctx->signed_serial(s), mark))), t);
      t = k.prefix(ctx->nsb(v, u.ebm, mark), t);
      t = k.prefix(ctx->priv(v, u.ebm, form), t);
      if (ctx->booth) t = k.prefix(es.enter_booth(v), t);
      t = k.prefix(ctx->priv(u.podclient, v, form), t);
      forms.push_back(t);
    }
  NodeId p = k.ext_choice(forms);
  p = k.prefix(ctx->nsb(v, u.tom, v), p);
  return k.prefix(es.open_election(), p);
}

// Pollworker(voters, nonces): admit any waiting voter, run a fresh session
// nonce through the print-on-demand pair for him, then serve the rest.
// Each voter is admitted once and each nonce used once.
NodeId pollworker_body(const Ctx& ctx, std::span<const FactId> a) {
  if (a.size() != 2) throw wiring_error("Pollworker takes (voter set, nonce set)");
  Kernel& k = *ctx->k;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;
  const FactId vs = a[0], ns = a[1];

  std::vector<NodeId> branches{ctx->close_stop()};
  const auto nonces = set_members(fs, ns);
  if (!nonces.empty()) {
    for (FactId v : set_members(fs, vs)) {
      std::vector<NodeId> sessions;
      for (FactId n : nonces) {
        const std::array<FactId, 2> rest{set_without(fs, vs, v), set_without(fs, ns, n)};
        NodeId t = k.call("Pollworker", rest);
        t = k.prefix(ctx->nsb(u.tom, u.podclient, n), t);
        t = k.prefix(ctx->nsb(u.podservice, u.tom, fs.sign(u.skPS, n)), t);
        t = k.prefix(ctx->nsb(u.tom, u.podservice, fs.sign(u.skT, n)), t);
        sessions.push_back(t);
      }
      branches.push_back(k.prefix(ctx->nsb(v, u.tom, v), k.int_choice(sessions)));
    }
  }
  return k.ext_choice(branches);
}

// Authority1(serials): on each signed serial request, pick a candidate
// order and submit it twice, encrypted for the tally on the bulletin board
// and encrypted for the print-on-demand service. Each serial is served once.
NodeId authority1_body(const Ctx& ctx, std::span<const FactId> a) {
  if (a.size() != 1) throw wiring_error("Authority1 takes (serial set)");
  Kernel& k = *ctx->k;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;
  const FactId ss = a[0];

  const auto remaining = set_members(fs, ss);
  std::vector<NodeId> branches{ctx->close_stop()};
  for (FactId s : remaining) {
    const FactId rest = set_without(fs, ss, s);
    for (FactId n : u.nonces) {
      std::vector<NodeId> picks;
      for (FactId l : u.lists) {
        NodeId t = k.call("Authority1", std::array<FactId, 1>{rest});
        t = k.prefix(ctx->nsb(u.authority, u.podservice, fs.rawballot(s, fs.enc(u.pkPS, l))), t);
        t = k.prefix(ctx->nsb(u.authority, u.wbb, fs.rawballot(s, fs.enc(u.pkEA, l))), t);
        picks.push_back(t);
      }
      branches.push_back(k.prefix(ctx->nsb(u.ballotmngr, u.authority, fs.sign_pair(u.skBM, s, n)), k.int_choice(picks)));
    }
  }
  return k.ext_choice(branches);
}

// Podservice: echo the pollworker's session nonce under its own key, take
// the client's counter-signature, register the session with the ballot
// manager, then turn the serial's raw ballot into the digital ballot the
// client can print: same candidate order, re-encrypted from the service's
// key to the client's.
NodeId podservice_body(const Ctx& ctx, std::span<const FactId> a) {
  if (!a.empty()) throw wiring_error("Podservice takes no arguments");
  Kernel& k = *ctx->k;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;

  std::vector<NodeId> branches{ctx->close_stop()};
  for (FactId n : u.nonces) {
    std::vector<NodeId> serials;
    for (FactId s : u.serials) {
      std::vector<NodeId> forms;
      for (FactId l : u.lists) {
        NodeId t = k.call("Podservice");
        t = k.prefix(ctx->nsb(u.podservice, u.podclient, fs.digballot(ctx->signed_serial(s), fs.enc(u.pkPC, l))), t);
        forms.push_back(k.prefix(ctx->nsb(u.authority, u.podservice, fs.rawballot(s, fs.enc(u.pkPS, l))), t));
      }
      serials.push_back(k.prefix(ctx->nsb(u.ballotmngr, u.podservice, fs.sign_pair(u.skW, s, n)), k.ext_choice(forms)));
    }
    NodeId t = k.ext_choice(serials);
    t = k.prefix(ctx->nsb(u.podservice, u.ballotmngr, fs.sign(u.skPS, n)), t);
    t = k.prefix(ctx->nsb(u.podclient, u.podservice, fs.sign(u.skPC, n)), t);
    t = k.prefix(ctx->nsb(u.podservice, u.tom, fs.sign(u.skPS, n)), t);
    branches.push_back(k.prefix(ctx->nsb(u.tom, u.podservice, fs.sign(u.skT, n)), t));
  }
  return k.ext_choice(branches);
}

// Podclient: take the session nonce from the pollworker, counter-sign it to
// the service, receive the digital ballot and print it for whichever voter
// walks up to collect it.
NodeId podclient_body(const Ctx& ctx, std::span<const FactId> a) {
  if (!a.empty()) throw wiring_error("Podclient takes no arguments");
  Kernel& k = *ctx->k;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;

  std::vector<NodeId> branches{ctx->close_stop()};
  for (FactId n : u.nonces) {
    std::vector<NodeId> digital;
    for (FactId s : u.serials)
      for (FactId l : u.lists) {
        std::vector<NodeId> handover;
        for (FactId v : u.voters)
          handover.push_back(k.prefix(ctx->priv(u.podclient, v, ctx->paper_ballot(l, s)), k.call("Podclient")));
        digital.push_back(k.prefix(ctx->nsb(u.podservice, u.podclient, fs.digballot(ctx->signed_serial(s), fs.enc(u.pkPC, l))), k.int_choice(handover)));
      }
    NodeId t = k.ext_choice(digital);
    t = k.prefix(ctx->nsb(u.podclient, u.podservice, fs.sign(u.skPC, n)), t);
    branches.push_back(k.prefix(ctx->nsb(u.tom, u.podclient, n), t));
  }
  return k.ext_choice(branches);
}

// Ballotmanager1(serials): when the service registers a session, pick a
// fresh serial for it, commit the pairing on the bulletin board, forward it
// to the authority, and relay the board's confirmation back to the service.
NodeId ballotmanager1_body(const Ctx& ctx, std::span<const FactId> a) {
  if (a.size() != 1) throw wiring_error("Ballotmanager1 takes (serial set)");
  Kernel& k = *ctx->k;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;
  const FactId ss = a[0];

  const auto remaining = set_members(fs, ss);
  std::vector<NodeId> branches{ctx->close_stop()};
  if (!remaining.empty()) {
    for (FactId n : u.nonces) {
      std::vector<NodeId> picks;
      for (FactId s : remaining) {
        NodeId t = k.call("Ballotmanager1", std::array<FactId, 1>{set_without(fs, ss, s)});
        t = k.prefix(ctx->nsb(u.ballotmngr, u.podservice, fs.sign_pair(u.skW, s, n)), t);
        t = k.prefix(ctx->nsb(u.wbb, u.ballotmngr, fs.sign_pair(u.skW, s, n)), t);
        t = k.prefix(ctx->nsb(u.ballotmngr, u.authority, fs.sign_pair(u.skBM, s, n)), t);
        t = k.prefix(ctx->nsb(u.ballotmngr, u.wbb, fs.sign_pair(u.skBM, s, n)), t);
        picks.push_back(t);
      }
      branches.push_back(k.prefix(ctx->nsb(u.podservice, u.ballotmngr, fs.sign(u.skPS, n)), k.int_choice(picks)));
    }
  }
  return k.ext_choice(branches);
}

// EBM: accept a handed-over ballot form, let the voter mark a position,
// then submit the marked right-hand side to the bulletin board.
NodeId ebm_body(const Ctx& ctx, std::span<const FactId> a) {
  if (!a.empty()) throw wiring_error("EBM takes no arguments");
  Kernel& k = *ctx->k;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;

  std::vector<NodeId> branches{ctx->close_stop()};
  for (FactId l : u.lists)
    for (FactId s : u.serials)
      for (FactId v : u.voters) {
        std::vector<NodeId> marks;
        for (FactId mark : ctx->cast) {
          NodeId t = k.call("EBM");
          t = k.prefix(ctx->nsb(u.ebm, u.wbb, fs.rhs(ctx->signed_serial(s), mark)), t);
          marks.push_back(k.prefix(ctx->nsb(v, u.ebm, mark), t));
        }
        branches.push_back(k.prefix(ctx->priv(v, u.ebm, ctx->paper_ballot(l, s)), k.ext_choice(marks)));
      }
  return k.ext_choice(branches);
}

// Printer: print whatever receipt the bulletin board issues and hand it to
// the voter who collects it.
NodeId printer_body(const Ctx& ctx, std::span<const FactId> a) {
  if (!a.empty()) throw wiring_error("Printer takes no arguments");
  Kernel& k = *ctx->k;
  const Universe& u = ctx->u;

  std::vector<NodeId> branches{ctx->close_stop()};
  for (FactId r : ctx->issuable) {
    std::vector<NodeId> collect;
    for (FactId v : u.voters)
      collect.push_back(k.prefix(ctx->nsb(u.printer, v, r), k.call("Printer")));
    branches.push_back(k.prefix(ctx->nsb(u.wbb, u.printer, r), k.ext_choice(collect)));
  }
  return k.ext_choice(branches);
}

// WBB1(votes...): the bulletin board during the election. Per round it
// takes the manager's serial commitment, confirms it, pairs the serial with
// the authority's encrypted candidate order and the marker's submitted
// position, issues the voter's receipt, and keeps the distilled vote for
// the tally. The argument list is the accumulated vote multiset, sorted.
NodeId wbb1_body(const Ctx& ctx, std::span<const FactId> bag) {
  Kernel& k = *ctx->k;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;
  if (!std::is_sorted(bag.begin(), bag.end()))
    throw wiring_error("the vote multiset must be sorted");

  std::vector<NodeId> branches{
      k.prefix(ctx->es->close_election(), k.call("WBB2", bag))};
  if (std::cmp_less(bag.size(), ctx->bag_cap)) {
    for (FactId n : u.nonces)
      for (FactId s : u.serials) {
        std::vector<NodeId> forms;
        for (FactId l : u.lists) {
          std::vector<NodeId> marks;
          for (FactId mark : ctx->cast) {
            std::vector<FactId> grown(bag.begin(), bag.end());
            const FactId v = fs.vote(mark, fs.enc(u.pkEA, l));
            grown.insert(std::upper_bound(grown.begin(), grown.end(), v), v);
            NodeId t = k.call("WBB1", grown);
            t = k.prefix(ctx->nsb(u.wbb, u.printer, fs.receipt(u.skW, fs.rhs(ctx->signed_serial(s), mark))), t);
            marks.push_back(k.prefix(ctx->nsb(u.ebm, u.wbb, fs.rhs(ctx->signed_serial(s), mark)), t));
          }
          forms.push_back(k.prefix(ctx->nsb(u.authority, u.wbb, fs.rawballot(s, fs.enc(u.pkEA, l))), k.ext_choice(marks)));
        }
        NodeId t = k.ext_choice(forms);
        t = k.prefix(ctx->nsb(u.wbb, u.ballotmngr, fs.sign_pair(u.skW, s, n)), t);
        branches.push_back(k.prefix(ctx->nsb(u.ballotmngr, u.wbb, fs.sign_pair(u.skBM, s, n)), t));
      }
  }
  return k.ext_choice(branches);
}

// WBB2(votes...): after close of election the board plays mixnet: it hands
// its votes to the teller one at a time in an order of its own choosing.
// Once drained it declares the bag empty, accepts the teller's count for
// each candidate in declaration order, and closes the record.
NodeId wbb2_body(const Ctx& ctx, std::span<const FactId> bag) {
  Kernel& k = *ctx->k;
  EventStore& es = *ctx->es;
  const Universe& u = ctx->u;
  if (!std::is_sorted(bag.begin(), bag.end()))
    throw wiring_error("the vote multiset must be sorted");

  if (bag.empty()) {
    NodeId t = k.prefix(es.done(), k.stop());
    for (size_t j = u.candidates.size(); j-- > 0;) {
      std::vector<NodeId> counts;
      for (int total = 0; total <= ctx->bag_cap; ++total)
        counts.push_back(k.prefix(es.announce(u.candidates[j], total), t));
      t = k.ext_choice(counts);
    }
    return k.prefix(es.bag_empty(), t);
  }

  std::vector<NodeId> outs;
  FactId prev = kNoFact;
  for (size_t i = 0; i < bag.size(); ++i) {
    if (bag[i] == prev) continue;  // one branch per distinct vote value
    prev = bag[i];
    std::vector<FactId> rest(bag.begin(), bag.end());
    rest.erase(rest.begin() + static_cast<ptrdiff_t>(i));
    outs.push_back(k.prefix(ctx->nsb(u.wbb, u.teller, bag[i]), k.call("WBB2", rest)));
  }
  return k.int_choice(outs);
}

// Teller1(count...): decrypt each vote coming off the board and credit the
// candidate sitting at the marked position of the decrypted order; when the
// board runs empty, publish every candidate's count and finish. One count
// argument per candidate, in declaration order.
NodeId teller1_body(const Ctx& ctx, std::span<const FactId> counts) {
  Kernel& k = *ctx->k;
  EventStore& es = *ctx->es;
  FactStore& fs = *ctx->fs;
  const Universe& u = ctx->u;
  if (counts.size() != u.candidates.size())
    throw wiring_error("Teller1 takes one count per candidate");

  std::vector<NodeId> branches;
  for (size_t pos = 1; pos <= ctx->cast.size(); ++pos)
    for (FactId l : u.lists) {
      const FactId credited = nth_candidate(fs, static_cast<int>(pos), l);
      const size_t j = static_cast<size_t>(
          std::find(u.candidates.begin(), u.candidates.end(), credited) -
          u.candidates.begin());
      if (j == u.candidates.size())
        throw wiring_error("candidate order names an undeclared candidate");
      const int tally = fs.int_value(counts[j]) + 1;
      if (tally > ctx->bag_cap) continue;  // beyond any reachable bag
      std::vector<FactId> credit(counts.begin(), counts.end());
      credit[j] = fs.num(tally);
      branches.push_back(k.prefix(ctx->nsb(u.wbb, u.teller, fs.vote(u.indices[pos], fs.enc(u.pkEA, l))), k.call("Teller1", credit)));
    }

  NodeId t = k.skip();
  for (size_t j = u.candidates.size(); j-- > 0;)
    t = k.prefix(es.announce(u.candidates[j], fs.int_value(counts[j])), t);
  branches.push_back(k.prefix(es.bag_empty(), t));
  return k.ext_choice(branches);
}

// ---------------------------------------------------------------------------
// Registration
// ---------------------------------------------------------------------------

std::string scenario_marker(const ScenarioConfig& cfg, const Universe& u) {
  std::string s = "vote-scenario[voters=";
  for (size_t i = 0; i < cfg.voters.size(); ++i) {
    if (i) s += ',';
    s += cfg.voters[i];
  }
  s += ";cands=";
  for (size_t i = 0; i < cfg.candidates.size(); ++i) {
    if (i) s += ',';
    s += cfg.candidates[i];
  }
  s += ";serials=" + std::to_string(u.serials.size());
  s += ";nonces=" + std::to_string(u.nonces.size());
  s += cfg.booth_events ? ";booth=1]" : ";booth=0]";
  return s;
}

// Interns every event a definition body can ever mention, so that bodies
// expanding after EventStore::freeze never ask for a new event.
void intern_protocol_events(const ProtoCtx& c) {
  EventStore& es = *c.es;
  FactStore& fs = *c.fs;
  const Universe& u = c.u;

  es.open_election();
  es.close_election();
  es.bag_empty();
  es.done();
  for (FactId v : u.voters) es.enter_booth(v);
  for (FactId cand : u.candidates)
    for (int total = 0; total <= c.bag_cap; ++total) es.announce(cand, total);

  for (FactId v : u.voters) c.nsb(v, u.tom, v);
  for (FactId n : u.nonces) {
    c.nsb(u.tom, u.podservice, fs.sign(u.skT, n));
    c.nsb(u.podservice, u.tom, fs.sign(u.skPS, n));
    c.nsb(u.tom, u.podclient, n);
    c.nsb(u.podclient, u.podservice, fs.sign(u.skPC, n));
    c.nsb(u.podservice, u.ballotmngr, fs.sign(u.skPS, n));
    for (FactId s : u.serials) {
      c.nsb(u.ballotmngr, u.wbb, fs.sign_pair(u.skBM, s, n));
      c.nsb(u.ballotmngr, u.authority, fs.sign_pair(u.skBM, s, n));
      c.nsb(u.wbb, u.ballotmngr, fs.sign_pair(u.skW, s, n));
      c.nsb(u.ballotmngr, u.podservice, fs.sign_pair(u.skW, s, n));
    }
  }
  for (FactId s : u.serials) {
    for (FactId l : u.lists) {
      c.nsb(u.authority, u.wbb, fs.rawballot(s, fs.enc(u.pkEA, l)));
      c.nsb(u.authority, u.podservice, fs.rawballot(s, fs.enc(u.pkPS, l)));
      c.nsb(u.podservice, u.podclient, fs.digballot(c.signed_serial(s), fs.enc(u.pkPC, l)));
      for (FactId v : u.voters) {
        c.priv(u.podclient, v, c.paper_ballot(l, s));
        c.priv(v, u.ebm, c.paper_ballot(l, s));
      }
    }
    for (FactId mark : c.cast) c.nsb(u.ebm, u.wbb, fs.rhs(c.signed_serial(s), mark));
  }
  for (FactId v : u.voters)
    for (FactId mark : c.cast) c.nsb(v, u.ebm, mark);
  for (FactId r : c.issuable) {
    c.nsb(u.wbb, u.printer, r);
    for (FactId v : u.voters) c.nsb(u.printer, v, r);
  }
  for (FactId mark : c.cast)
    for (FactId l : u.lists) c.nsb(u.wbb, u.teller, fs.vote(mark, fs.enc(u.pkEA, l)));
}

// Alphabetized composition: each new part synchronizes with the whole built
// so far on exactly the events both sides could ever perform.
NodeId fold_alphabetized(Kernel& k, std::span<const NodeId> parts) {
  if (parts.empty()) return k.stop();
  NodeId acc = parts[0];
  std::vector<EventId> seen = k.alphabet(parts[0]);
  for (size_t i = 1; i < parts.size(); ++i) {
    const std::vector<EventId> next = k.alphabet(parts[i]);
    std::vector<EventId> shared;
    std::set_intersection(seen.begin(), seen.end(), next.begin(), next.end(),
                          std::back_inserter(shared));
    acc = k.parallel(acc, parts[i], k.events().set(0, shared));
    std::vector<EventId> merged;
    merged.reserve(seen.size() + next.size());
    std::set_union(seen.begin(), seen.end(), next.begin(), next.end(),
                   std::back_inserter(merged));
    seen = std::move(merged);
  }
  return acc;
}

struct RoleEntry {
  std::string_view role;
  std::string_view def;
  FactId Universe::* agent;
};

// Composition order: voters first, then the fixed roles.
constexpr std::array<RoleEntry, 9> kFixedRoles{{
    {"pollworker", "Pollworker", &Universe::tom},
    {"authority", "Authority", &Universe::authority},
    {"ebm", "EBM", &Universe::ebm},
    {"podservice", "Podservice", &Universe::podservice},
    {"printer", "Printer", &Universe::printer},
    {"ballotmanager", "Ballotmanager", &Universe::ballotmngr},
    {"podclient", "Podclient", &Universe::podclient},
    {"wbb", "WBB", &Universe::wbb},
    {"teller", "Teller", &Universe::teller},
}};

NodeId call_fixed_role(Kernel& k, const Universe& u, const RoleEntry& entry) {
  if (entry.def == "Pollworker") {
    FactStore& fs = *u.store;
    const std::array<FactId, 2> args{fs.fact_set(u.voters), fs.fact_set(u.nonces)};
    return k.call("Pollworker", args);
  }
  return k.call(entry.def);
}

NodeId build_model_impl(Kernel& k, const Universe& u, const ScenarioConfig& cfg,
                        bool aliased) {
  register_protocol(k, u, cfg);
  std::vector<NodeId> parts{build_voters(k, u, cfg, aliased)};
  for (const RoleEntry& entry : kFixedRoles) {
    NodeId p = call_fixed_role(k, u, entry);
    if (aliased) p = wire_agent(k, p, u.*(entry.agent));
    parts.push_back(p);
  }
  return fold_alphabetized(k, parts);
}

}  // namespace

std::vector<std::pair<FactId, FactId>> honest_choices(const Universe& u,
                                                      const ScenarioConfig& cfg) {
  const std::vector<std::string> dishonest = cfg.dishonest_voters();
  auto is_dishonest = [&](const std::string& name) {
    return std::find(dishonest.begin(), dishonest.end(), name) != dishonest.end();
  };
  auto candidate_named = [&](const std::string& name) -> FactId {
    for (size_t i = 0; i < cfg.candidates.size(); ++i)
      if (cfg.candidates[i] == name) return u.candidates[i];
    throw config_error("world table names an unknown candidate: " + name);
  };

  std::vector<std::string> honest;
  std::vector<FactId> honest_facts;
  for (size_t i = 0; i < cfg.voters.size(); ++i)
    if (!is_dishonest(cfg.voters[i])) {
      honest.push_back(cfg.voters[i]);
      honest_facts.push_back(u.voters[i]);
    }

  std::vector<std::pair<FactId, FactId>> out;
  if (!cfg.world_pair.empty()) {
    for (const auto& [name, pick] : cfg.world_pair) {
      if (std::find(cfg.voters.begin(), cfg.voters.end(), name) == cfg.voters.end())
        throw config_error("world table names an unknown voter: " + name);
      if (is_dishonest(name))
        throw config_error("a dishonest voter chooses on his own: " + name);
    }
    for (size_t i = 0; i < honest.size(); ++i) {
      const auto entry = std::find_if(
          cfg.world_pair.begin(), cfg.world_pair.end(),
          [&](const auto& e) { return e.first == honest[i]; });
      if (entry == cfg.world_pair.end())
        throw config_error("world table misses voter " + honest[i]);
      if (std::find_if(entry + 1, cfg.world_pair.end(), [&](const auto& e) {
            return e.first == honest[i];
          }) != cfg.world_pair.end())
        throw config_error("world table lists " + honest[i] + " twice");
      const std::string& pick = cfg.world == WorldSide::Prime
                                    ? entry->second.first
                                    : entry->second.second;
      out.emplace_back(honest_facts[i], candidate_named(pick));
    }
    return out;
  }

  if (!honest.empty() && u.candidates.size() < 2)
    throw config_error("comparing two worlds needs at least two candidates");
  const bool prime = cfg.world == WorldSide::Prime;
  for (size_t i = 0; i < honest.size(); ++i) {
    FactId pick;
    if (i == 0)
      pick = prime ? u.candidates[0] : u.candidates[1];
    else if (i == 1)
      pick = prime ? u.candidates[1] : u.candidates[0];
    else
      pick = u.candidates[i % u.candidates.size()];
    out.emplace_back(honest_facts[i], pick);
  }
  return out;
}

void register_protocol(Kernel& k, const Universe& u, const ScenarioConfig& cfg) {
  const std::string marker = scenario_marker(cfg, u);
  if (k.has_def("Voter")) {
    if (!k.has_def(marker))
      throw wiring_error("this kernel already carries a different election scenario");
    return;
  }
  if (u.nonces.size() < u.voters.size())
    throw config_error("every voter needs a fresh session nonce: " +
                       std::to_string(u.nonces.size()) + " nonces for " +
                       std::to_string(u.voters.size()) + " voters");
  if (u.serials.size() < u.voters.size())
    throw config_error("every voter needs his own ballot serial: " +
                       std::to_string(u.serials.size()) + " serials for " +
                       std::to_string(u.voters.size()) + " voters");

  auto ctx = std::make_shared<ProtoCtx>();
  ctx->k = &k;
  ctx->es = &k.events();
  ctx->fs = u.store;
  ctx->u = u;
  ctx->booth = cfg.booth_events;
  ctx->bag_cap = static_cast<int>(u.voters.size()) + 1;
  ctx->cast.assign(u.indices.begin() + 1, u.indices.end());
  for (FactId s : u.serials)
    for (FactId mark : ctx->cast)
      ctx->issuable.push_back(u.store->receipt(u.skW, u.store->rhs(ctx->signed_serial(s), mark)));

  intern_protocol_events(*ctx);

  const Ctx c = ctx;
  k.define("Voter", [c](std::span<const FactId> a) { return voter_body(c, a); });
  k.define("Pollworker", [c](std::span<const FactId> a) { return pollworker_body(c, a); });
  k.define("Authority", [c](std::span<const FactId> a) -> NodeId {
    if (!a.empty()) throw wiring_error("Authority takes no arguments");
    const std::array<FactId, 1> all{c->fs->fact_set(c->u.serials)};
    return c->k->prefix(c->es->open_election(), c->k->call("Authority1", all));
  });
  k.define("Authority1", [c](std::span<const FactId> a) { return authority1_body(c, a); });
  k.define("Podservice", [c](std::span<const FactId> a) { return podservice_body(c, a); });
  k.define("Podclient", [c](std::span<const FactId> a) { return podclient_body(c, a); });
  k.define("Ballotmanager", [c](std::span<const FactId> a) -> NodeId {
    if (!a.empty()) throw wiring_error("Ballotmanager takes no arguments");
    const std::array<FactId, 1> all{c->fs->fact_set(c->u.serials)};
    return c->k->prefix(c->es->open_election(), c->k->call("Ballotmanager1", all));
  });
  k.define("Ballotmanager1", [c](std::span<const FactId> a) { return ballotmanager1_body(c, a); });
  k.define("EBM", [c](std::span<const FactId> a) { return ebm_body(c, a); });
  k.define("Printer", [c](std::span<const FactId> a) { return printer_body(c, a); });
  k.define("WBB", [c](std::span<const FactId> a) -> NodeId {
    if (!a.empty()) throw wiring_error("WBB takes no arguments");
    return c->k->prefix(c->es->open_election(), c->k->call("WBB1"));
  });
  k.define("WBB1", [c](std::span<const FactId> a) { return wbb1_body(c, a); });
  k.define("WBB2", [c](std::span<const FactId> a) { return wbb2_body(c, a); });
  k.define("Teller", [c](std::span<const FactId> a) -> NodeId {
    if (!a.empty()) throw wiring_error("Teller takes no arguments");
    const std::vector<FactId> zeros(c->u.candidates.size(), c->fs->num(0));
    return c->k->prefix(c->es->open_election(), c->k->call("Teller1", zeros));
  });
  k.define("Teller1", [c](std::span<const FactId> a) { return teller1_body(c, a); });

  k.define(marker, [c](std::span<const FactId>) { return c->k->stop(); });
}

NodeId build_agent(Kernel& k, std::string_view role, const Universe& u,
                   const ScenarioConfig& cfg) {
  register_protocol(k, u, cfg);
  if (role == "voter") return build_voters(k, u, cfg, false);
  for (const RoleEntry& entry : kFixedRoles)
    if (entry.role == role) return call_fixed_role(k, u, entry);
  throw config_error(
      "unknown role: " + std::string(role) +
      " (expected voter, pollworker, authority, podservice, podclient, "
      "ballotmanager, ebm, printer, wbb or teller)");
}

NodeId build_voters(Kernel& k, const Universe& u, const ScenarioConfig& cfg,
                    bool threat_aliased) {
  register_protocol(k, u, cfg);

  std::vector<NodeId> parts;
  for (const auto& [voter, choice] : honest_choices(u, cfg))
    parts.push_back(k.call("Voter", std::array<FactId, 2>{voter, choice}));

  std::vector<std::string> seen;
  for (const std::string& name : cfg.dishonest_voters()) {
    const auto at = std::find(cfg.voters.begin(), cfg.voters.end(), name);
    if (at == cfg.voters.end())
      throw config_error("dishonest voter is not a declared voter: " + name);
    if (std::find(seen.begin(), seen.end(), name) != seen.end())
      throw config_error("voter listed dishonest twice: " + name);
    seen.push_back(name);
    const FactId voter = u.voters[static_cast<size_t>(at - cfg.voters.begin())];
    std::vector<NodeId> picks;
    for (FactId cand : u.candidates)
      picks.push_back(k.call("Voter", std::array<FactId, 2>{voter, cand}));
    NodeId block = k.int_choice(picks);
    if (threat_aliased) block = wire_agent(k, block, voter);
    parts.push_back(block);
  }
  return fold_alphabetized(k, parts);
}

NodeId build_model(Kernel& k, const Universe& u, const ScenarioConfig& cfg) {
  return build_model_impl(k, u, cfg, true);
}

NodeId build_plain_model(Kernel& k, const Universe& u, const ScenarioConfig& cfg) {
  return build_model_impl(k, u, cfg, false);
}

}  // namespace votecheck
