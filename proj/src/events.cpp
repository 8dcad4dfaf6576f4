#include "votecheck/events.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace votecheck {

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

uint64_t node_hash(const EventNode& n) {
  uint64_t h = static_cast<uint64_t>(n.cls) * 0x100000001b3ull;
  h = mix(h, static_cast<uint32_t>(n.a));
  h = mix(h, static_cast<uint32_t>(n.b));
  h = mix(h, static_cast<uint32_t>(n.c));
  return h;
}

std::string_view class_name(EvClass c) {
  switch (c) {
    case EvClass::Tau: return "tau";
    case EvClass::Tick: return "tick";
    case EvClass::Nsbcomm: return "nsbcomm";
    case EvClass::Scomm: return "scomm";
    case EvClass::Take: return "take";
    case EvClass::Fake: return "fake";
    case EvClass::Learn: return "learn";
    case EvClass::Say: return "say";
    case EvClass::Infer: return "infer";
    case EvClass::Knows: return "intruderknows";
    case EvClass::OpenElection: return "openElection";
    case EvClass::CloseElection: return "closeElection";
    case EvClass::EnterBooth: return "enterBooth";
    case EvClass::LeaveBooth: return "leaveBooth";
    case EvClass::BagEmpty: return "bagempty";
    case EvClass::Done: return "done";
    case EvClass::Announce: return "announce";
  }
  return "?";
}

}  // namespace

EventStore::EventStore(FactStore& facts) : facts_(facts) {
  tau_ = intern(EventNode{EvClass::Tau, -1, -1, -1});
  tick_ = intern(EventNode{EvClass::Tick, -1, -1, -1});
  empty_set_ = set(0, {}, {});
}

EventId EventStore::intern(EventNode n) {
  uint64_t h = node_hash(n);
  auto& bucket = bucket_[h];
  for (EventId id : bucket)
    if (nodes_[id] == n) return id;
  if (frozen_)
    throw std::logic_error("event store frozen: new event during exploration");
  EventId id = static_cast<EventId>(nodes_.size());
  nodes_.push_back(n);
  bucket.push_back(id);
  return id;
}

EventId EventStore::comm(EvClass cls, FactId sender, FactId receiver, FactId payload) {
  if ((class_bit(cls) & kCommMask) == 0)
    throw wiring_error("not an agent channel class");
  if (facts_.tag(sender) != FactTag::Agent || facts_.tag(receiver) != FactTag::Agent)
    throw wiring_error("communication endpoints must be agents");
  if (sender == receiver)
    throw wiring_error("no agent sends a message to itself");
  return intern(EventNode{cls, static_cast<int32_t>(sender),
                          static_cast<int32_t>(receiver),
                          static_cast<int32_t>(payload)});
}

EventId EventStore::fact_event(EvClass cls, FactId f) {
  return intern(EventNode{cls, static_cast<int32_t>(f), -1, -1});
}

EventId EventStore::infer_rule(FactId premise_set, FactId conclusion) {
  if (facts_.tag(premise_set) != FactTag::FactSet)
    throw wiring_error("a deduction event names its premises as a fact set");
  if (facts_.tag(conclusion) == FactTag::FactSet)
    throw wiring_error("a deduction event concludes a single fact");
  return intern(EventNode{EvClass::Infer, static_cast<int32_t>(conclusion),
                          static_cast<int32_t>(premise_set), -1});
}

EventId EventStore::nullary(EvClass cls) {
  return intern(EventNode{cls, -1, -1, -1});
}

EventId EventStore::booth(EvClass cls, FactId voter) {
  if (facts_.tag(voter) != FactTag::Agent)
    throw wiring_error("booth events carry an agent");
  return intern(EventNode{cls, static_cast<int32_t>(voter), -1, -1});
}

EventId EventStore::announce(FactId candidate, int count) {
  if (facts_.tag(candidate) != FactTag::Candidate || count < 0)
    throw wiring_error("announce carries a candidate and a tally");
  return intern(EventNode{EvClass::Announce, static_cast<int32_t>(candidate), count, -1});
}

std::string EventStore::render(EventId e) const {
  const EventNode& n = nodes_[e];
  std::string out(class_name(n.cls));
  switch (n.cls) {
    case EvClass::Tau:
    case EvClass::Tick:
    case EvClass::OpenElection:
    case EvClass::CloseElection:
    case EvClass::BagEmpty:
    case EvClass::Done:
      return out;
    case EvClass::Nsbcomm:
    case EvClass::Scomm:
    case EvClass::Take:
    case EvClass::Fake:
      return out + "." + facts_.render(n.a) + "." + facts_.render(n.b) + "." +
             facts_.render(n.c);
    case EvClass::Infer:
      if (n.b >= 0)
        return out + "." + facts_.render(n.b) + "." + facts_.render(n.a);
      return out + "." + facts_.render(n.a);
    case EvClass::Learn:
    case EvClass::Say:
    case EvClass::Knows:
    case EvClass::EnterBooth:
    case EvClass::LeaveBooth:
      return out + "." + facts_.render(n.a);
    case EvClass::Announce:
      return out + "." + facts_.render(n.a) + "." + std::to_string(n.b);
  }
  return out;
}

EventId EventStore::parse(std::string_view line) {
  auto head = [&](std::string_view prefix) {
    return line.size() > prefix.size() && line.substr(0, prefix.size()) == prefix &&
           line[prefix.size()] == '.';
  };
  auto rest_after = [&](std::string_view prefix) {
    return line.substr(prefix.size() + 1);
  };
  FactStore& fs = facts_;
  if (line == "tau") return tau_;
  if (line == "tick") return tick_;
  if (line == "openElection") return nullary(EvClass::OpenElection);
  if (line == "closeElection") return nullary(EvClass::CloseElection);
  if (line == "bagempty") return nullary(EvClass::BagEmpty);
  if (line == "done") return nullary(EvClass::Done);
  for (EvClass c : {EvClass::Learn, EvClass::Say, EvClass::Infer, EvClass::Knows}) {
    if (!head(class_name(c))) continue;
    std::string_view rest = rest_after(class_name(c));
    // Fact expressions never contain dots, so a dot separates the premise
    // set of a deduction step from its conclusion.
    size_t dot = rest.find('.');
    if (c == EvClass::Infer && dot != std::string_view::npos)
      return infer_rule(fs.parse(rest.substr(0, dot)), fs.parse(rest.substr(dot + 1)));
    return fact_event(c, fs.parse(rest));
  }
  for (EvClass c : {EvClass::EnterBooth, EvClass::LeaveBooth}) {
    if (head(class_name(c))) return booth(c, fs.parse(rest_after(class_name(c))));
  }
  if (head("announce")) {
    std::string_view rest = rest_after("announce");
    size_t dot = rest.rfind('.');
    if (dot == std::string_view::npos)
      throw config_error("announce event needs candidate and count: '" +
                         std::string(line) + "'");
    int count = 0;
    auto num = rest.substr(dot + 1);
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), count);
    if (ec != std::errc() || p != num.data() + num.size())
      throw config_error("bad announce count in '" + std::string(line) + "'");
    return announce(fs.parse(rest.substr(0, dot)), count);
  }
  for (EvClass c : {EvClass::Nsbcomm, EvClass::Scomm, EvClass::Take, EvClass::Fake}) {
    if (!head(class_name(c))) continue;
    std::string_view rest = rest_after(class_name(c));
    size_t d1 = rest.find('.');
    size_t d2 = d1 == std::string_view::npos ? d1 : rest.find('.', d1 + 1);
    if (d2 == std::string_view::npos)
      throw config_error("communication event needs sender.receiver.payload: '" +
                         std::string(line) + "'");
    FactId sender = fs.parse(rest.substr(0, d1));
    FactId receiver = fs.parse(rest.substr(d1 + 1, d2 - d1 - 1));
    FactId payload = fs.parse(rest.substr(d2 + 1));
    return comm(c, sender, receiver, payload);
  }
  throw config_error("unrecognized event: '" + std::string(line) + "'");
}

EventSetId EventStore::set(uint32_t class_mask, std::span<const EventId> plus,
                           std::span<const EventId> minus) {
  if (class_mask & (kTauBit | kTickBit))
    throw wiring_error("tau/tick may not appear in an event set");
  auto canon = [&](std::span<const EventId> in, bool want_in_mask) {
    std::vector<uint32_t> v;
    for (EventId e : in) {
      uint32_t b = cls_bit(e);
      if (b & (kTauBit | kTickBit))
        throw wiring_error("tau/tick may not appear in an event set");
      bool in_mask = (b & class_mask) != 0;
      if (in_mask == want_in_mask) continue;  // already covered / irrelevant
      v.push_back(e);
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<uint32_t> p = canon(plus, true);
  std::vector<uint32_t> m = canon(minus, false);
  IdListId pl = lists_.intern(p);
  IdListId ml = lists_.intern(m);
  uint64_t h = mix(mix(class_mask, pl), ml);
  auto& bucket = set_bucket_[h];
  for (EventSetId id : bucket) {
    const SetRec& r = sets_[id];
    if (r.mask == class_mask && r.plus == pl && r.minus == ml) return id;
  }
  EventSetId id = static_cast<EventSetId>(sets_.size());
  sets_.push_back(SetRec{class_mask, pl, ml});
  bucket.push_back(id);
  return id;
}

bool EventStore::member(EventSetId s, EventId e) const {
  const SetRec& r = sets_[s];
  uint32_t b = cls_bit(e);
  if (b & (kTauBit | kTickBit)) return false;
  auto plus = lists_.get(r.plus);
  auto minus = lists_.get(r.minus);
  if (b & r.mask)
    return !std::binary_search(minus.begin(), minus.end(), e);
  return std::binary_search(plus.begin(), plus.end(), e);
}

EventSetId EventStore::set_with_mask(EventSetId s, uint32_t extra_mask) {
  const SetRec r = sets_[s];
  std::vector<EventId> plus(lists_.get(r.plus).begin(), lists_.get(r.plus).end());
  std::vector<EventId> minus(lists_.get(r.minus).begin(), lists_.get(r.minus).end());
  return set(r.mask | extra_mask, plus, minus);
}

RenameRelId EventStore::rename_rel(std::vector<std::pair<EventId, EventId>> pairs,
                                   uint32_t strict_mask,
                                   std::vector<EventId> suppressed) {
  if (strict_mask & (kTauBit | kTickBit))
    throw wiring_error("tau/tick may not be renamed");
  RelRec rec;
  rec.strict = strict_mask;
  rec.src_mask = 0;
  rec.tgt_mask = 0;
  for (auto [from, to] : pairs) {
    if ((cls_bit(from) | cls_bit(to)) & (kTauBit | kTickBit))
      throw wiring_error("tau/tick may not be renamed");
    rec.src_mask |= cls_bit(from);
    rec.tgt_mask |= cls_bit(to);
  }
  for (EventId e : suppressed) {
    if (cls_bit(e) & (kTauBit | kTickBit))
      throw wiring_error("tau/tick may not be suppressed");
    rec.src_mask |= cls_bit(e);
  }
  // Forward CSR: stable sort keeps per-source target order deterministic.
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<EventId> keys;
  for (auto [from, to] : pairs)
    if (keys.empty() || keys.back() != from) keys.push_back(from);
  keys.insert(keys.end(), suppressed.begin(), suppressed.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  rec.src_keys = keys;
  rec.src_off.assign(keys.size() + 1, 0);
  {
    size_t k = 0;
    for (auto [from, to] : pairs) {
      while (keys[k] != from) ++k;
      rec.src_off[k + 1]++;
      (void)to;
    }
    for (size_t i = 1; i < rec.src_off.size(); ++i) rec.src_off[i] += rec.src_off[i - 1];
    rec.src_vals.resize(pairs.size());
    std::vector<uint32_t> cursor(rec.src_off.begin(), rec.src_off.end() - 1);
    k = 0;
    for (auto [from, to] : pairs) {
      while (keys[k] != from) ++k;
      rec.src_vals[cursor[k]++] = to;
    }
  }
  // Reverse CSR.
  std::vector<std::pair<EventId, EventId>> rev;
  rev.reserve(pairs.size());
  for (auto [from, to] : pairs) rev.emplace_back(to, from);
  std::stable_sort(rev.begin(), rev.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto [to, from] : rev) {
    if (rec.tgt_keys.empty() || rec.tgt_keys.back() != to) rec.tgt_keys.push_back(to);
    (void)from;
  }
  rec.tgt_off.assign(rec.tgt_keys.size() + 1, 0);
  {
    size_t k = 0;
    for (auto [to, from] : rev) {
      while (rec.tgt_keys[k] != to) ++k;
      rec.tgt_off[k + 1]++;
      (void)from;
    }
    for (size_t i = 1; i < rec.tgt_off.size(); ++i) rec.tgt_off[i] += rec.tgt_off[i - 1];
    rec.tgt_vals.resize(rev.size());
    std::vector<uint32_t> cursor(rec.tgt_off.begin(), rec.tgt_off.end() - 1);
    k = 0;
    for (auto [to, from] : rev) {
      while (rec.tgt_keys[k] != to) ++k;
      rec.tgt_vals[cursor[k]++] = from;
    }
  }
  RenameRelId id = static_cast<RenameRelId>(rels_.size());
  rels_.push_back(std::move(rec));
  return id;
}

bool EventStore::in_domain(RenameRelId r, EventId e) const {
  const RelRec& rec = rels_[r];
  return std::binary_search(rec.src_keys.begin(), rec.src_keys.end(), e);
}

std::span<const EventId> EventStore::targets(RenameRelId r, EventId e) const {
  const RelRec& rec = rels_[r];
  auto it = std::lower_bound(rec.src_keys.begin(), rec.src_keys.end(), e);
  if (it == rec.src_keys.end() || *it != e) return {};
  size_t k = static_cast<size_t>(it - rec.src_keys.begin());
  return {rec.src_vals.data() + rec.src_off[k], rec.src_off[k + 1] - rec.src_off[k]};
}

std::span<const EventId> EventStore::preimages(RenameRelId r, EventId e) const {
  const RelRec& rec = rels_[r];
  auto it = std::lower_bound(rec.tgt_keys.begin(), rec.tgt_keys.end(), e);
  if (it == rec.tgt_keys.end() || *it != e) return {};
  size_t k = static_cast<size_t>(it - rec.tgt_keys.begin());
  return {rec.tgt_vals.data() + rec.tgt_off[k], rec.tgt_off[k + 1] - rec.tgt_off[k]};
}

}  // namespace votecheck
