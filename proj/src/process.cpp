#include "votecheck/process.hpp"

#include <algorithm>
#include <cassert>

namespace votecheck {

namespace {

constexpr int kMaxResolveChase = 64;
constexpr int kMaxRecursionDepth = 4000;
constexpr int kMaxTransformerNesting = 64;
constexpr size_t kArenaChunk = 1u << 15;

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

uint64_t node_hash(const NodeRec& n) {
  uint64_t h = static_cast<uint64_t>(n.op) * 0x100000001b3ull;
  h = mix(h, n.x);
  h = mix(h, n.y);
  h = mix(h, n.z);
  return h;
}

struct DepthGuard {
  int& depth;
  explicit DepthGuard(int& d) : depth(d) {
    if (++depth > kMaxRecursionDepth)
      throw wiring_error("process recursion exceeds the kernel depth bound "
                         "(unguarded recursion?)");
  }
  ~DepthGuard() { --depth; }
};

}  // namespace

Kernel::Kernel(EventStore& events) : events_(events) {
  stop_ = intern(NodeRec{Op::Stop, kNoNode, kNoNode, kNoNode});
  skip_ = intern(NodeRec{Op::Skip, kNoNode, kNoNode, kNoNode});
  arena_.emplace_back();
  arena_.back().reserve(kArenaChunk);
}

NodeId Kernel::intern(NodeRec n) {
  uint64_t h = node_hash(n);
  auto& bucket = bucket_[h];
  for (NodeId id : bucket)
    if (nodes_[id] == n) return id;
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(n);
  bucket.push_back(id);
  return id;
}

NodeId Kernel::prefix(EventId e, NodeId cont) {
  if (e == events_.tau() || e == events_.tick())
    throw wiring_error("prefix event must be a visible event");
  return intern(NodeRec{Op::Prefix, e, cont, kNoNode});
}

NodeId Kernel::choice(Op op, std::span<const NodeId> branches) {
  if (branches.empty()) throw wiring_error("choice needs at least one branch");
  std::vector<NodeId> flat;
  flat.reserve(branches.size());
  for (NodeId b : branches) {
    if (nodes_[b].op == op) {
      auto inner = lists_.get(nodes_[b].x);
      flat.insert(flat.end(), inner.begin(), inner.end());
    } else {
      flat.push_back(b);
    }
  }
  std::sort(flat.begin(), flat.end());
  flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
  if (flat.size() == 1) return flat[0];
  return intern(NodeRec{op, lists_.intern(flat), kNoNode, kNoNode});
}

NodeId Kernel::ext_choice(std::span<const NodeId> branches) {
  return choice(Op::ExtChoice, branches);
}

NodeId Kernel::int_choice(std::span<const NodeId> branches) {
  return choice(Op::IntChoice, branches);
}

NodeId Kernel::parallel(NodeId a, NodeId b, EventSetId interface_set) {
  return intern(NodeRec{Op::Parallel, a, b, interface_set});
}

NodeId Kernel::interleave(NodeId a, NodeId b) {
  return parallel(a, b, events_.empty_set());
}

NodeId Kernel::hide(NodeId p, EventSetId hidden) {
  if (hidden == events_.empty_set()) return p;
  return intern(NodeRec{Op::Hide, p, hidden, kNoNode});
}

NodeId Kernel::rename_proc(NodeId p, RenameRelId rel) {
  return intern(NodeRec{Op::Rename, p, rel, kNoNode});
}

DefId Kernel::define(std::string name,
                     std::function<NodeId(std::span<const FactId>)> body) {
  if (def_ids_.count(name))
    throw wiring_error("definition already exists: " + name);
  DefId id = static_cast<DefId>(def_bodies_.size());
  def_ids_.emplace(name, id);
  def_names_.push_back(std::move(name));
  def_bodies_.push_back(std::move(body));
  return id;
}

DefId Kernel::def_id(std::string_view name) const {
  auto it = def_ids_.find(std::string(name));
  if (it == def_ids_.end())
    throw wiring_error("unknown definition: " + std::string(name));
  return it->second;
}

NodeId Kernel::call(DefId def, std::span<const FactId> args) {
  if (def >= def_bodies_.size()) throw wiring_error("unknown definition id");
  return intern(NodeRec{Op::Call, def, lists_.intern(args), kNoNode});
}

NodeId Kernel::call(std::string_view name, std::span<const FactId> args) {
  return call(def_id(name), args);
}

uint32_t Kernel::add_spy(const SpyBehavior* behavior) {
  spies_.push_back(behavior);
  return static_cast<uint32_t>(spies_.size() - 1);
}

NodeId Kernel::spy(uint32_t behavior, uint32_t know) {
  if (behavior >= spies_.size()) throw wiring_error("unknown spy behavior");
  return intern(NodeRec{Op::Spy, behavior, know, kNoNode});
}

std::span<const uint32_t> Kernel::children(NodeId n) const {
  const NodeRec& r = nodes_[n];
  if (r.op != Op::ExtChoice && r.op != Op::IntChoice) return {};
  return lists_.get(r.x);
}

std::span<const uint32_t> Kernel::call_args(NodeId n) const {
  const NodeRec& r = nodes_[n];
  if (r.op != Op::Call) return {};
  return lists_.get(r.y);
}

NodeId Kernel::resolve(NodeId n) {
  if (nodes_[n].op != Op::Call) return n;
  auto memo = resolve_.find(n);
  if (memo != resolve_.end()) return memo->second;
  NodeId cur = n;
  std::vector<NodeId> path;
  int chase = 0;
  while (nodes_[cur].op == Op::Call) {
    if (++chase > kMaxResolveChase)
      throw wiring_error("unproductive recursion through definition: " +
                         def_names_[nodes_[cur].x]);
    path.push_back(cur);
    uint64_t key = (static_cast<uint64_t>(nodes_[cur].x) << 32) | nodes_[cur].y;
    auto it = expansion_.find(key);
    if (it != expansion_.end()) {
      if (it->second == kNoNode)
        throw wiring_error("unguarded recursion in definition: " +
                           def_names_[nodes_[cur].x]);
      cur = it->second;
      continue;
    }
    expansion_.emplace(key, kNoNode);
    // Copy the arguments: the body builder interns new lists, which may
    // reallocate the pool the span points into.
    auto argIds = lists_.get(nodes_[cur].y);
    std::vector<FactId> args(argIds.begin(), argIds.end());
    NodeId body = def_bodies_[nodes_[cur].x](std::span<const FactId>(args));
    expansion_[key] = body;
    cur = body;
  }
  for (NodeId p : path) resolve_.emplace(p, cur);
  return cur;
}

Kernel::TrSpan Kernel::store_transitions(const std::vector<Transition>& ts) {
  if (arena_.back().size() + ts.size() > arena_.back().capacity()) {
    arena_.emplace_back();
    arena_.back().reserve(std::max(kArenaChunk, ts.size()));
  }
  auto& chunk = arena_.back();
  const Transition* ptr = chunk.data() + chunk.size();
  chunk.insert(chunk.end(), ts.begin(), ts.end());
  return TrSpan{ptr, static_cast<uint32_t>(ts.size())};
}

std::span<const Transition> Kernel::initials(NodeId n) {
  n = resolve(n);
  if (n < initials_memo_.size() && initials_memo_[n].ptr != nullptr) {
    const TrSpan& s = initials_memo_[n];
    return {s.ptr, s.len};
  }
  DepthGuard guard(depth_guard_);
  std::vector<Transition> out;
  compute_initials(n, out);
  std::stable_sort(out.begin(), out.end(),
                   [](const Transition& a, const Transition& b) { return a.ev < b.ev; });
  TrSpan span = store_transitions(out);
  if (n >= initials_memo_.size()) initials_memo_.resize(nodes_.size());
  initials_memo_[n] = span;
  return {span.ptr, span.len};
}

void Kernel::compute_initials(NodeId n, std::vector<Transition>& out) {
  const NodeRec rec = nodes_[n];
  const EventId tau = events_.tau();
  const EventId tick = events_.tick();
  switch (rec.op) {
    case Op::Stop:
      return;
    case Op::Skip:
      out.push_back({tick, stop_});
      return;
    case Op::Prefix:
      out.push_back({rec.x, rec.y});
      return;
    case Op::ExtChoice: {
      // Copy the branch list: building successor terms below may grow the
      // id-list pool and invalidate the span.
      auto cspan = lists_.get(rec.x);
      std::vector<NodeId> cs(cspan.begin(), cspan.end());
      for (NodeId c : cs) {
        for (const Transition& t : initials(c)) {
          if (t.ev == tau) {
            // An internal move of one branch does not resolve the choice.
            std::vector<NodeId> next = cs;
            for (NodeId& m : next)
              if (m == c) m = resolve(t.to);
            out.push_back({tau, ext_choice(next)});
          } else {
            out.push_back(t);
          }
        }
      }
      return;
    }
    case Op::IntChoice: {
      for (NodeId c : lists_.get(rec.x)) out.push_back({tau, c});
      return;
    }
    case Op::Parallel: {
      NodeId a = resolve(rec.x);
      NodeId b = resolve(rec.y);
      EventSetId sync = rec.z;
      bool a_ticks = false;
      std::vector<NodeId> partners;
      for (const Transition& t : initials(a)) {
        if (t.ev == tau) {
          out.push_back({tau, parallel(resolve(t.to), b, sync)});
        } else if (t.ev == tick) {
          a_ticks = true;
        } else if (events_.member(sync, t.ev)) {
          partners.clear();
          probe(b, t.ev, partners);
          for (NodeId b2 : partners)
            out.push_back({t.ev, parallel(resolve(t.to), resolve(b2), sync)});
        } else {
          out.push_back({t.ev, parallel(resolve(t.to), b, sync)});
        }
      }
      std::vector<Transition> free;
      free_tau_offers(b, sync, free);
      for (const Transition& t : free)
        out.push_back({t.ev, parallel(a, resolve(t.to), sync)});
      if (a_ticks && can_tick(b)) out.push_back({tick, stop_});
      return;
    }
    case Op::Hide: {
      NodeId child = resolve(rec.x);
      EventSetId hidden = rec.y;
      for (const Transition& t : initials(child)) {
        NodeId succ = hide(resolve(t.to), hidden);
        if (t.ev != tau && t.ev != tick && events_.member(hidden, t.ev))
          out.push_back({tau, succ});
        else
          out.push_back({t.ev, succ});
      }
      return;
    }
    case Op::Rename: {
      NodeId child = resolve(rec.x);
      RenameRelId rel = rec.y;
      for (const Transition& t : initials(child)) {
        NodeId succ = rename_proc(resolve(t.to), rel);
        if (t.ev == tau || t.ev == tick) {
          out.push_back({t.ev, succ});
        } else if (events_.in_domain(rel, t.ev)) {
          for (EventId target : events_.targets(rel, t.ev))
            out.push_back({target, succ});
        } else if (events_.cls_bit(t.ev) & events_.strict_mask(rel)) {
          throw wiring_error("event of a strict channel has no renaming entry: " +
                             events_.render(t.ev));
        } else {
          out.push_back({t.ev, succ});
        }
      }
      return;
    }
    case Op::Spy: {
      std::vector<std::pair<EventId, uint32_t>> moves;
      spies_[rec.x]->initials(rec.y, moves);
      for (auto [e, k] : moves) out.push_back({e, spy(rec.x, k)});
      return;
    }
    case Op::Call:
      throw wiring_error("unresolved call reached the step function");
  }
}

void Kernel::free_tau_offers(NodeId n, EventSetId sync, std::vector<Transition>& out) {
  n = resolve(n);
  const NodeRec rec = nodes_[n];
  const EventId tau = events_.tau();
  const EventId tick = events_.tick();
  bool pure = events_.set_plus(sync).empty() && events_.set_minus(sync).empty();
  if (rec.op == Op::Spy && pure) {
    std::vector<std::pair<EventId, uint32_t>> moves;
    spies_[rec.x]->initials_outside(rec.y, events_.set_mask(sync), moves);
    for (auto [e, k] : moves) out.push_back({e, spy(rec.x, k)});
    return;
  }
  if (rec.op == Op::Rename && pure) {
    RenameRelId rel = rec.y;
    uint32_t smask = events_.set_mask(sync);
    bool targets_synced = (events_.target_mask(rel) & ~smask) == 0;
    bool strict_covers = (events_.source_mask(rel) & ~events_.strict_mask(rel)) == 0;
    if (targets_synced && strict_covers) {
      // Renamed events always land inside the interface, so the only free
      // offers are the child's offers outside both the interface and the
      // renamed channels, which pass through the renaming unchanged.
      EventSetId narrowed = events_.set(smask | events_.strict_mask(rel));
      std::vector<Transition> inner;
      free_tau_offers(rec.x, narrowed, inner);
      for (const Transition& t : inner) {
        NodeId succ = rename_proc(resolve(t.to), rel);
        if (t.ev == tau) {
          out.push_back({tau, succ});
        } else if (events_.in_domain(rel, t.ev)) {
          for (EventId target : events_.targets(rel, t.ev))
            if (!events_.member(sync, target)) out.push_back({target, succ});
        } else {
          out.push_back({t.ev, succ});
        }
      }
      return;
    }
  }
  for (const Transition& t : initials(n)) {
    if (t.ev == tick) continue;
    if (t.ev == tau || !events_.member(sync, t.ev)) out.push_back(t);
  }
}

void Kernel::probe(NodeId n, EventId e, std::vector<NodeId>& out) {
  n = resolve(n);
  const NodeRec rec = nodes_[n];
  switch (rec.op) {
    case Op::Stop:
    case Op::Skip:
    case Op::IntChoice:
      return;
    case Op::Prefix:
      if (rec.x == e) out.push_back(rec.y);
      return;
    case Op::ExtChoice: {
      auto cspan = lists_.get(rec.x);
      std::vector<NodeId> cs(cspan.begin(), cspan.end());
      for (NodeId c : cs) probe(c, e, out);
      return;
    }
    case Op::Parallel: {
      DepthGuard guard(depth_guard_);
      NodeId a = resolve(rec.x);
      NodeId b = resolve(rec.y);
      EventSetId sync = rec.z;
      if (events_.member(sync, e)) {
        std::vector<NodeId> left, right;
        probe(a, e, left);
        if (left.empty()) return;
        probe(b, e, right);
        for (NodeId a2 : left)
          for (NodeId b2 : right)
            out.push_back(parallel(resolve(a2), resolve(b2), sync));
      } else {
        std::vector<NodeId> side;
        probe(a, e, side);
        for (NodeId a2 : side) out.push_back(parallel(resolve(a2), b, sync));
        side.clear();
        probe(b, e, side);
        for (NodeId b2 : side) out.push_back(parallel(a, resolve(b2), sync));
      }
      return;
    }
    case Op::Hide: {
      if (events_.member(rec.y, e)) return;
      std::vector<NodeId> side;
      probe(rec.x, e, side);
      for (NodeId c : side) out.push_back(hide(resolve(c), rec.y));
      return;
    }
    case Op::Rename: {
      std::vector<NodeId> side;
      for (EventId pre : events_.preimages(rec.y, e)) probe(rec.x, pre, side);
      if (!events_.in_domain(rec.y, e)) {
        std::vector<NodeId> ident;
        probe(rec.x, e, ident);
        if (!ident.empty() && (events_.cls_bit(e) & events_.strict_mask(rec.y)))
          throw wiring_error("event of a strict channel has no renaming entry: " +
                             events_.render(e));
        side.insert(side.end(), ident.begin(), ident.end());
      }
      for (NodeId c : side) out.push_back(rename_proc(resolve(c), rec.y));
      return;
    }
    case Op::Spy: {
      if (auto k = spies_[rec.x]->after(rec.y, e)) out.push_back(spy(rec.x, *k));
      return;
    }
    case Op::Call:
      throw wiring_error("unresolved call reached the step function");
  }
}

bool Kernel::can_tick(NodeId n) {
  n = resolve(n);
  const NodeRec rec = nodes_[n];
  switch (rec.op) {
    case Op::Stop:
    case Op::Prefix:
    case Op::IntChoice:
    case Op::Spy:
      return false;
    case Op::Skip:
      return true;
    case Op::ExtChoice: {
      DepthGuard guard(depth_guard_);
      auto cspan = lists_.get(rec.x);
      std::vector<NodeId> cs(cspan.begin(), cspan.end());
      for (NodeId c : cs)
        if (can_tick(c)) return true;
      return false;
    }
    case Op::Parallel: {
      DepthGuard guard(depth_guard_);
      return can_tick(rec.x) && can_tick(rec.y);
    }
    case Op::Hide:
    case Op::Rename: {
      DepthGuard guard(depth_guard_);
      return can_tick(rec.x);
    }
    case Op::Call:
      throw wiring_error("unresolved call reached the step function");
  }
  return false;
}

std::vector<EventId> Kernel::alphabet(NodeId n) {
  std::set<EventId> acc;
  std::unordered_set<NodeId> visited;
  alphabet_walk(n, 0, visited, acc);
  return {acc.begin(), acc.end()};
}

void Kernel::alphabet_walk(NodeId n, int transformer_depth,
                           std::unordered_set<NodeId>& visited,
                           std::set<EventId>& out) {
  n = resolve(n);
  if (!visited.insert(n).second) return;
  const NodeRec rec = nodes_[n];
  switch (rec.op) {
    case Op::Stop:
    case Op::Skip:
      return;
    case Op::Prefix:
      out.insert(rec.x);
      alphabet_walk(rec.y, transformer_depth, visited, out);
      return;
    case Op::ExtChoice:
    case Op::IntChoice: {
      auto cspan = lists_.get(rec.x);
      std::vector<NodeId> cs(cspan.begin(), cspan.end());
      for (NodeId c : cs) alphabet_walk(c, transformer_depth, visited, out);
      return;
    }
    case Op::Parallel:
      alphabet_walk(rec.x, transformer_depth, visited, out);
      alphabet_walk(rec.y, transformer_depth, visited, out);
      return;
    case Op::Hide: {
      if (transformer_depth >= kMaxTransformerNesting)
        throw wiring_error("alphabet: hiding/renaming nesting too deep");
      std::set<EventId> sub;
      std::unordered_set<NodeId> fresh;
      alphabet_walk(rec.x, transformer_depth + 1, fresh, sub);
      for (EventId e : sub)
        if (!events_.member(rec.y, e)) out.insert(e);
      return;
    }
    case Op::Rename: {
      if (transformer_depth >= kMaxTransformerNesting)
        throw wiring_error("alphabet: hiding/renaming nesting too deep");
      std::set<EventId> sub;
      std::unordered_set<NodeId> fresh;
      alphabet_walk(rec.x, transformer_depth + 1, fresh, sub);
      for (EventId e : sub) {
        if (events_.in_domain(rec.y, e)) {
          for (EventId target : events_.targets(rec.y, e)) out.insert(target);
        } else if (events_.cls_bit(e) & events_.strict_mask(rec.y)) {
          throw wiring_error("event of a strict channel has no renaming entry: " +
                             events_.render(e));
        } else {
          out.insert(e);
        }
      }
      return;
    }
    case Op::Spy: {
      std::vector<EventId> a;
      spies_[rec.x]->alphabet(a);
      out.insert(a.begin(), a.end());
      return;
    }
    case Op::Call:
      return;  // unreachable: resolved above
  }
}

TraceSet Kernel::traces_bruteforce(NodeId p, int depth, size_t work_cap) {
  if (depth < 0) throw oracle_overflow("negative oracle depth");
  BfCtx ctx;
  ctx.cap = work_cap;
  return bf(p, depth, ctx);
}

TraceSet Kernel::bf(NodeId n, int depth, BfCtx& ctx) {
  if (++ctx.work > ctx.cap)
    throw oracle_overflow("trace oracle exceeded its work cap");
  n = resolve(n);
  const NodeRec rec = nodes_[n];
  const EventId tick = events_.tick();
  TraceSet out;
  out.emplace();  // the empty trace belongs to every process
  switch (rec.op) {
    case Op::Stop:
      return out;
    case Op::Skip:
      if (depth >= 1) out.insert({tick});
      return out;
    case Op::Prefix: {
      if (depth >= 1) {
        for (const auto& t : bf(rec.y, depth - 1, ctx)) {
          std::vector<EventId> ext;
          ext.reserve(t.size() + 1);
          ext.push_back(rec.x);
          ext.insert(ext.end(), t.begin(), t.end());
          out.insert(std::move(ext));
        }
      }
      return out;
    }
    case Op::ExtChoice:
    case Op::IntChoice: {
      auto cspan = lists_.get(rec.x);
      std::vector<NodeId> cs(cspan.begin(), cspan.end());
      for (NodeId c : cs) {
        TraceSet sub = bf(c, depth, ctx);
        out.insert(sub.begin(), sub.end());
      }
      return out;
    }
    case Op::Parallel: {
      TraceSet ta = bf(rec.x, depth, ctx);
      TraceSet tb = bf(rec.y, depth, ctx);
      std::vector<EventId> acc;
      for (const auto& t1 : ta)
        for (const auto& t2 : tb) {
          acc.clear();
          bf_merge(t1, t2, rec.z, static_cast<size_t>(depth), acc, out, ctx);
        }
      return out;
    }
    case Op::Hide: {
      int inner_depth = depth + ctx.hide_slack;
      TraceSet sub = bf(rec.x, inner_depth, ctx);
      for (const auto& t : sub) {
        std::vector<EventId> kept;
        for (EventId e : t)
          if (e == tick || !events_.member(rec.y, e)) kept.push_back(e);
        if (kept.size() <= static_cast<size_t>(depth)) {
          if (t.size() == static_cast<size_t>(inner_depth) &&
              kept.size() < static_cast<size_t>(depth))
            throw oracle_overflow(
                "trace oracle cannot bound a hidden recursion; raise the depth "
                "slack");
          out.insert(std::move(kept));
        }
      }
      return out;
    }
    case Op::Rename: {
      TraceSet sub = bf(rec.x, depth, ctx);
      std::vector<EventId> acc;
      for (const auto& t : sub) {
        acc.clear();
        bf_rename(t, 0, rec.y, acc, out, ctx);
      }
      return out;
    }
    case Op::Spy: {
      if (depth >= 1) {
        std::vector<std::pair<EventId, uint32_t>> moves;
        spies_[rec.x]->initials(rec.y, moves);
        for (auto [e, k] : moves) {
          for (const auto& t : bf(spy(rec.x, k), depth - 1, ctx)) {
            std::vector<EventId> ext;
            ext.reserve(t.size() + 1);
            ext.push_back(e);
            ext.insert(ext.end(), t.begin(), t.end());
            out.insert(std::move(ext));
          }
        }
      }
      return out;
    }
    case Op::Call:
      throw wiring_error("unresolved call reached the trace oracle");
  }
  return out;
}

void Kernel::bf_merge(std::span<const EventId> t1, std::span<const EventId> t2,
                      EventSetId sync, size_t depth, std::vector<EventId>& acc,
                      TraceSet& out, BfCtx& ctx) {
  if (++ctx.work > ctx.cap)
    throw oracle_overflow("trace oracle exceeded its work cap");
  out.insert(std::vector<EventId>(acc));
  if (acc.size() >= depth) return;
  const EventId tick = events_.tick();
  bool h1 = !t1.empty(), h2 = !t2.empty();
  // Joint termination: tick fires only when it heads both traces.
  if (h1 && h2 && t1.front() == tick && t2.front() == tick) {
    acc.push_back(tick);
    bf_merge(t1.subspan(1), t2.subspan(1), sync, depth, acc, out, ctx);
    acc.pop_back();
  }
  if (h1 && t1.front() != tick) {
    EventId e = t1.front();
    if (!events_.member(sync, e)) {
      acc.push_back(e);
      bf_merge(t1.subspan(1), t2, sync, depth, acc, out, ctx);
      acc.pop_back();
    } else if (h2 && t2.front() == e) {
      acc.push_back(e);
      bf_merge(t1.subspan(1), t2.subspan(1), sync, depth, acc, out, ctx);
      acc.pop_back();
    }
  }
  if (h2 && t2.front() != tick) {
    EventId e = t2.front();
    // Interface events advance both sides at once; the branch above covers
    // that, so only a free right-side head moves alone here.
    if (!events_.member(sync, e)) {
      acc.push_back(e);
      bf_merge(t1, t2.subspan(1), sync, depth, acc, out, ctx);
      acc.pop_back();
    }
  }
}

void Kernel::bf_rename(std::span<const EventId> t, size_t i, RenameRelId rel,
                       std::vector<EventId>& acc, TraceSet& out, BfCtx& ctx) {
  if (++ctx.work > ctx.cap)
    throw oracle_overflow("trace oracle exceeded its work cap");
  out.insert(std::vector<EventId>(acc));
  if (i == t.size()) return;
  EventId e = t[i];
  if (e == events_.tick()) {
    acc.push_back(e);
    bf_rename(t, i + 1, rel, acc, out, ctx);
    acc.pop_back();
    return;
  }
  if (events_.in_domain(rel, e)) {
    for (EventId target : events_.targets(rel, e)) {
      acc.push_back(target);
      bf_rename(t, i + 1, rel, acc, out, ctx);
      acc.pop_back();
    }
    return;  // empty target list: the event is suppressed, trace ends here
  }
  if (events_.cls_bit(e) & events_.strict_mask(rel))
    throw wiring_error("event of a strict channel has no renaming entry: " +
                       events_.render(e));
  acc.push_back(e);
  bf_rename(t, i + 1, rel, acc, out, ctx);
  acc.pop_back();
}

}  // namespace votecheck
