#include "votecheck/checker.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "votecheck/channels.hpp"
#include "votecheck/deduction.hpp"
#include "votecheck/protocol.hpp"

namespace votecheck {
namespace {

using Clock = std::chrono::steady_clock;

// Wall-clock guard; disarmed when the configured budget is zero.
class Deadline {
 public:
  explicit Deadline(double seconds) {
    if (seconds > 0.0) {
      end_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                std::chrono::duration<double>(seconds));
      armed_ = true;
    }
  }
  void check() const {
    if (armed_ && Clock::now() > end_)
      throw resource_limit_error("time budget exhausted");
  }

 private:
  Clock::time_point end_{};
  bool armed_ = false;
};

uint64_t hash_ids(std::span<const uint32_t> ids) {
  uint64_t h = 1469598103934665603ull;
  for (uint32_t v : ids) {
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

// Interned family of sorted state-id sets. Each set owns its buffer, so
// references into earlier sets stay valid while new ones are added.
class SubsetPool {
 public:
  // Returns (id, inserted).
  std::pair<uint32_t, bool> intern(std::vector<uint32_t> ids) {
    auto& bucket = by_hash_[hash_ids(ids)];
    for (uint32_t c : bucket)
      if (sets_[c] == ids) return {c, false};
    const auto id = static_cast<uint32_t>(sets_.size());
    sets_.push_back(std::move(ids));
    bucket.push_back(id);
    return {id, true};
  }
  size_t size() const { return sets_.size(); }
  std::span<const uint32_t> operator[](uint32_t id) const { return sets_[id]; }

 private:
  std::vector<std::vector<uint32_t>> sets_;
  std::unordered_map<uint64_t, std::vector<uint32_t>> by_hash_;
};

}  // namespace

Lts explore(Kernel& k, NodeId root, const Limits& limits, int workers) {
  const Deadline deadline(limits.time_budget_s);
  Lts out;
  out.initial = 0;
  out.row_off.push_back(0);

  if (limits.max_states == 0) throw resource_limit_error("state cap exceeded");
  std::unordered_map<NodeId, uint32_t> index;
  const NodeId start = k.resolve(root);
  out.states.push_back(start);
  index.emplace(start, 0u);

  // States are discovered breadth-first, so each depth level occupies one
  // contiguous id range [lo, hi). A level is cut into `workers` contiguous
  // stripes whose successor batches are concatenated in stripe order —
  // identical to processing the level front to back — so state numbering,
  // edge order and therefore every result downstream are independent of the
  // worker count. Successor enumeration shares the kernel's memo tables,
  // which are not synchronized, so stripes run one after another.
  struct Succ {
    uint32_t src;
    EventId ev;
    NodeId to;
  };
  std::vector<Succ> batch;

  uint32_t lo = 0;
  uint32_t hi = 1;
  uint32_t depth = 0;
  while (lo < hi) {
    out.stats.max_depth_reached = depth;
    batch.clear();
    const uint32_t width = hi - lo;
    const auto stripes =
        std::clamp<uint32_t>(workers <= 0 ? 1u : static_cast<uint32_t>(workers),
                             1u, width);
    const uint32_t per = (width + stripes - 1) / stripes;
    for (uint32_t st = 0; st < stripes; ++st) {
      const uint32_t a = lo + st * per;
      const uint32_t b = std::min(hi, a + per);
      for (uint32_t s = a; s < b; ++s) {
        for (const Transition& t : k.initials(out.states[s]))
          batch.push_back({s, t.ev, k.resolve(t.to)});
        if (((s - lo) & 0x0fffu) == 0) deadline.check();
      }
    }

    // Merge the level's batch in order: number fresh targets, lay out the
    // edge rows of every source in this level.
    auto it = batch.begin();
    for (uint32_t s = lo; s < hi; ++s) {
      for (; it != batch.end() && it->src == s; ++it) {
        auto [slot, inserted] =
            index.try_emplace(it->to, static_cast<uint32_t>(out.states.size()));
        if (inserted) {
          if (out.states.size() >= limits.max_states)
            throw resource_limit_error("state cap exceeded");
          out.states.push_back(it->to);
        }
        out.edges.push_back({it->ev, slot->second});
      }
      out.row_off.push_back(out.edges.size());
    }

    lo = hi;
    hi = static_cast<uint32_t>(out.states.size());
    if (lo < hi) {
      if (depth + 1 > limits.max_depth)
        throw resource_limit_error("depth cap exceeded");
      ++depth;
      deadline.check();
    }
  }

  out.stats.states_explored = out.states.size();
  out.stats.transitions = out.edges.size();
  return out;
}

TraceDfa normalize(Kernel& k, const Lts& lts, const Limits& limits) {
  const EventId tau = k.events().tau();
  TraceDfa dfa;
  dfa.initial = 0;
  dfa.row_off.push_back(0);

  // Epoch-marked closure under hidden moves: no per-call clearing.
  std::vector<uint32_t> mark(lts.states.size(), 0);
  uint32_t epoch = 0;
  std::vector<uint32_t> stack;
  auto closure = [&](std::span<const uint32_t> seed) {
    ++epoch;
    std::vector<uint32_t> res;
    stack.clear();
    for (uint32_t s : seed) {
      if (mark[s] != epoch) {
        mark[s] = epoch;
        stack.push_back(s);
        res.push_back(s);
      }
    }
    while (!stack.empty()) {
      const uint32_t s = stack.back();
      stack.pop_back();
      for (const Lts::Edge& e : lts.out(s)) {
        if (e.ev == tau && mark[e.to] != epoch) {
          mark[e.to] = epoch;
          stack.push_back(e.to);
          res.push_back(e.to);
        }
      }
    }
    std::sort(res.begin(), res.end());
    return res;
  };

  SubsetPool pool;
  pool.intern(closure(std::array<uint32_t, 1>{lts.initial}));

  std::vector<std::pair<EventId, uint32_t>> moves;
  std::vector<uint32_t> seed;
  for (uint32_t cur = 0; cur < pool.size(); ++cur) {
    moves.clear();
    for (uint32_t s : pool[cur])
      for (const Lts::Edge& e : lts.out(s))
        if (e.ev != tau) moves.emplace_back(e.ev, e.to);
    std::sort(moves.begin(), moves.end());
    moves.erase(std::unique(moves.begin(), moves.end()), moves.end());

    for (size_t i = 0; i < moves.size();) {
      const EventId ev = moves[i].first;
      seed.clear();
      for (; i < moves.size() && moves[i].first == ev; ++i)
        seed.push_back(moves[i].second);
      auto [id, inserted] = pool.intern(closure(seed));
      if (inserted && pool.size() > limits.max_states)
        throw resource_limit_error("state cap exceeded during determinization");
      dfa.edges.push_back({ev, id});
    }
    dfa.row_off.push_back(dfa.edges.size());
  }

  dfa.states = static_cast<uint32_t>(pool.size());
  return dfa;
}

namespace {

// Steps `trace` through `d`; true iff every event has an outgoing edge.
bool dfa_accepts(const TraceDfa& d, std::span<const EventId> trace) {
  uint32_t at = d.initial;
  for (EventId ev : trace) {
    const auto row = d.out(at);
    const auto it = std::lower_bound(
        row.begin(), row.end(), ev,
        [](const TraceDfa::Edge& e, EventId v) { return e.ev < v; });
    if (it == row.end() || it->ev != ev) return false;
    at = it->to;
  }
  return true;
}

// Breadth-first search of the product of `impl` against `spec` for a shortest
// sequence `impl` can perform and `spec` cannot. Both automata must have
// their edge rows sorted by event (normalize produces exactly that).
std::optional<std::vector<EventId>> refute(const TraceDfa& impl,
                                           const TraceDfa& spec) {
  struct Step {
    uint32_t parent;
    EventId ev;
  };
  const auto pack = [](uint32_t a, uint32_t b) {
    return (static_cast<uint64_t>(a) << 32) | b;
  };

  std::vector<uint64_t> queue;
  std::vector<Step> back;
  std::unordered_set<uint64_t> seen;
  queue.push_back(pack(impl.initial, spec.initial));
  back.push_back({UINT32_MAX, kNoEvent});
  seen.insert(queue.front());

  for (uint32_t qi = 0; qi < queue.size(); ++qi) {
    const auto ia = static_cast<uint32_t>(queue[qi] >> 32);
    const auto is = static_cast<uint32_t>(queue[qi]);
    const auto spec_row = spec.out(is);
    for (const TraceDfa::Edge& e : impl.out(ia)) {
      const auto it = std::lower_bound(
          spec_row.begin(), spec_row.end(), e.ev,
          [](const TraceDfa::Edge& x, EventId v) { return x.ev < v; });
      if (it == spec_row.end() || it->ev != e.ev) {
        std::vector<EventId> trace{e.ev};
        for (uint32_t at = qi; back[at].parent != UINT32_MAX;
             at = back[at].parent)
          trace.push_back(back[at].ev);
        std::reverse(trace.begin(), trace.end());
        return trace;
      }
      const uint64_t key = pack(e.to, it->to);
      if (seen.insert(key).second) {
        queue.push_back(key);
        back.push_back({qi, e.ev});
      }
    }
  }
  return std::nullopt;
}

// A counter-example out of the product search must replay cleanly: the
// implementation performs it in full and the specification rejects it.
void validate_counterexample(const TraceDfa& impl, const TraceDfa& spec,
                             std::span<const EventId> trace) {
  if (!dfa_accepts(impl, trace) || dfa_accepts(spec, trace))
    throw std::logic_error("counter-example failed replay validation");
}

CheckStats combine(const CheckStats& a, const CheckStats& b) {
  return {a.states_explored + b.states_explored, a.transitions + b.transitions,
          std::max(a.max_depth_reached, b.max_depth_reached)};
}

std::vector<std::string> render_trace(const EventStore& es,
                                      std::span<const EventId> trace) {
  std::vector<std::string> out;
  out.reserve(trace.size());
  for (EventId ev : trace) out.push_back(es.render(ev));
  return out;
}

std::vector<FactId> leaked_keys(const Universe& u, const ScenarioConfig& cfg) {
  std::vector<FactId> keys;
  keys.reserve(cfg.corrupt.size());
  for (const std::string& component : cfg.corrupt)
    keys.push_back(u.corrupt_key(component));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

}  // namespace

Refinement trace_refines(Kernel& k, NodeId spec, NodeId impl,
                         const Limits& limits, int workers) {
  Refinement r;
  try {
    const Lts li = explore(k, impl, limits, workers);
    const Lts ls = explore(k, spec, limits, workers);
    r.stats = combine(li.stats, ls.stats);
    const TraceDfa di = normalize(k, li, limits);
    const TraceDfa ds = normalize(k, ls, limits);
    if (auto ce = refute(di, ds)) {
      validate_counterexample(di, ds, *ce);
      r.result = CheckResult::Fails;
      r.counterexample = std::move(*ce);
    }
  } catch (const resource_limit_error& err) {
    r.result = CheckResult::ResourceLimit;
    r.limit = err.what();
  }
  return r;
}

NodeId mask_process(Kernel& k, FactStore& fs, NodeId p,
                    const std::vector<bool>& ik) {
  EventStore& es = k.events();
  constexpr uint32_t kOverheard = class_bit(EvClass::Nsbcomm) |
                                  class_bit(EvClass::Take) |
                                  class_bit(EvClass::Fake);
  std::vector<std::pair<EventId, EventId>> pairs;
  for (EventId e : k.alphabet(p)) {
    if (!(es.cls_bit(e) & kOverheard)) continue;
    const EventNode& n = es.node(e);
    const auto payload = static_cast<FactId>(n.c);
    const FactId masked = mask_fact(fs, payload, ik);
    if (masked != payload)
      pairs.emplace_back(e, es.comm(n.cls, static_cast<FactId>(n.a),
                                    static_cast<FactId>(n.b), masked));
  }
  if (pairs.empty()) return p;
  const RenameRelId rel = es.rename_rel(std::move(pairs), 0);
  return k.rename_proc(p, rel);
}

Verdict anonymity_check(const ScenarioConfig& cfg) {
  FactStore fs;
  const Universe u = build_universe(fs, cfg);
  EventStore es(fs);
  Kernel k(es);
  const CommSets cs = build_comm_sets(u, cfg);
  const std::vector<FactId> leaked = leaked_keys(u, cfg);
  const KnowledgeState ks = make_knowledge_state(u, leaked);

  // The two runs differ only in which ballot each voter casts; both live in
  // one kernel so shared structure is built and interned exactly once.
  ScenarioConfig first = cfg;
  first.world = WorldSide::Prime;
  ScenarioConfig second = cfg;
  second.world = WorldSide::DoublePrime;
  const NodeId m1 = build_model(k, u, first);
  const NodeId m2 = build_model(k, u, second);
  const WiredSystem w1 = wire_system(k, m1, ks, cs);
  const WiredSystem w2 = wire_system(k, m2, ks, cs);

  // Everything the attacker can ever deduce without traffic; ciphertexts
  // sealed with any other key are collapsed to an opaque blob.
  std::vector<bool> ik(fs.size(), false);
  for (FactId f : close(ks)) ik[f] = true;

  const EventSetId booth = es.set(class_bit(EvClass::Scomm));
  const NodeId v1 = k.hide(mask_process(k, fs, w1.system, ik), booth);
  const NodeId v2 = k.hide(mask_process(k, fs, w2.system, ik), booth);
  es.freeze();

  Verdict verdict;
  try {
    const Lts l1 = explore(k, v1, cfg.limits, cfg.workers);
    const Lts l2 = explore(k, v2, cfg.limits, cfg.workers);
    verdict.stats = combine(l1.stats, l2.stats);
    const TraceDfa d1 = normalize(k, l1, cfg.limits);
    const TraceDfa d2 = normalize(k, l2, cfg.limits);
    if (auto ce = refute(d2, d1)) {
      validate_counterexample(d2, d1, *ce);
      verdict.result = CheckResult::Fails;
      verdict.direction = FailDirection::RightNotInLeft;
      verdict.counterexample = render_trace(es, *ce);
    } else if (auto ce2 = refute(d1, d2)) {
      validate_counterexample(d1, d2, *ce2);
      verdict.result = CheckResult::Fails;
      verdict.direction = FailDirection::LeftNotInRight;
      verdict.counterexample = render_trace(es, *ce2);
    }
  } catch (const resource_limit_error& err) {
    verdict.result = CheckResult::ResourceLimit;
    verdict.limit = err.what();
  }
  return verdict;
}

Verdict secrecy_check(const ScenarioConfig& cfg) {
  if (cfg.banned.empty())
    throw config_error("secrecy check requires at least one banned fact");

  FactStore fs;
  const Universe u = build_universe(fs, cfg);
  EventStore es(fs);
  Kernel k(es);
  const CommSets cs = build_comm_sets(u, cfg);
  const std::vector<FactId> leaked = leaked_keys(u, cfg);

  std::vector<FactId> banned;
  banned.reserve(cfg.banned.size());
  for (const std::string& text : cfg.banned) banned.push_back(fs.parse(text));
  std::sort(banned.begin(), banned.end());
  banned.erase(std::unique(banned.begin(), banned.end()), banned.end());

  const KnowledgeState ks = make_knowledge_state(u, leaked, banned);
  const NodeId model = build_model(k, u, cfg);
  const WiredSystem ws = wire_system(k, model, ks, cs);

  // Keep only the attacker's disclosure flags visible: the property is that
  // none ever fires, i.e. the flagged system refines a process doing nothing.
  const EventSetId all_but_flags =
      es.set(kVisibleMask & ~class_bit(EvClass::Knows));
  const NodeId flags_only = k.hide(ws.system, all_but_flags);
  es.freeze();

  Verdict verdict;
  try {
    const Lts li = explore(k, flags_only, cfg.limits, cfg.workers);
    const Lts ls = explore(k, k.stop(), cfg.limits, cfg.workers);
    verdict.stats = combine(li.stats, ls.stats);
    const TraceDfa di = normalize(k, li, cfg.limits);
    const TraceDfa ds = normalize(k, ls, cfg.limits);
    if (auto ce = refute(di, ds)) {
      validate_counterexample(di, ds, *ce);
      verdict.result = CheckResult::Fails;
      verdict.counterexample = render_trace(es, *ce);
    }
  } catch (const resource_limit_error& err) {
    verdict.result = CheckResult::ResourceLimit;
    verdict.limit = err.what();
  }
  return verdict;
}

}  // namespace votecheck
