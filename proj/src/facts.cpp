#include "votecheck/facts.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace votecheck {

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

uint64_t node_hash(const FactNode& n) {
  uint64_t h = static_cast<uint64_t>(n.tag) * 0x100000001b3ull;
  h = mix(h, static_cast<uint32_t>(n.a));
  h = mix(h, static_cast<uint32_t>(n.b));
  h = mix(h, static_cast<uint32_t>(n.c));
  return h;
}

bool is_atom_tag(FactTag t) {
  switch (t) {
    case FactTag::Agent:
    case FactTag::Candidate:
    case FactTag::Nonce:
    case FactTag::Serial:
    case FactTag::Num:
    case FactTag::Index:
      return true;
    default:
      return false;
  }
}

bool is_enc_slot(FactTag t) { return t == FactTag::Enc || t == FactTag::Ciphertext; }

const std::array<std::string_view, 9> kRoleNames = {
    "Tom",       "authority", "wbb",       "teller", "podservice",
    "podclient", "ballotmngr", "ebm",      "printer"};

const std::array<std::string_view, 6> kKeyOwners = {"W", "T", "EA", "PS", "PC", "BM"};

bool reserved_word(std::string_view s) {
  static const std::array<std::string_view, 24> words = {
      "enc",        "symenc",     "sign",       "ballot",     "rhs",
      "receipt",    "vote",       "digballot",  "raw",        "ciphertext",
      "count",      "announce",   "take",       "fake",       "nsbcomm",
      "scomm",      "learn",      "say",        "infer",      "tau",
      "tick",       "set",        "holds",      "fails"};
  for (auto w : words)
    if (w == s) return true;
  static const std::array<std::string_view, 7> controls = {
      "openElection", "closeElection", "enterBooth", "leaveBooth",
      "bagempty",     "done",          "intruderknows"};
  for (auto w : controls)
    if (w == s) return true;
  return false;
}

}  // namespace

void FactStore::check_atom_name(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0])))
    throw config_error("atom name must start with a letter: '" + std::string(name) + "'");
  for (char ch : name)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_')
      throw config_error("atom name has invalid character: '" + std::string(name) + "'");
  if (reserved_word(name))
    throw config_error("atom name is a reserved word: '" + std::string(name) + "'");
  if (name.size() >= 3 && (name.substr(0, 2) == "pk" || name.substr(0, 2) == "sk") &&
      std::isupper(static_cast<unsigned char>(name[2])))
    throw config_error("atom name collides with key naming: '" + std::string(name) + "'");
  if (name.size() > 3 && name.substr(0, 3) == "ind" &&
      std::all_of(name.begin() + 3, name.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw config_error("atom name collides with index naming: '" + std::string(name) + "'");
}

FactStore::FactStore() {
  FactNode n{FactTag::Ciphertext, -1, -1, -1};
  ciphertext_ = intern(n);
}

SymId FactStore::sym(std::string_view name) {
  auto it = sym_ids_.find(std::string(name));
  if (it != sym_ids_.end()) return it->second;
  SymId id = static_cast<SymId>(sym_names_.size());
  sym_names_.emplace_back(name);
  sym_kinds_.push_back(AtomKind::None);
  sym_ids_.emplace(std::string(name), id);
  return id;
}

FactId FactStore::intern(FactNode n) {
  uint64_t h = node_hash(n);
  auto& bucket = bucket_[h];
  for (FactId id : bucket)
    if (nodes_[id] == n) return id;
  FactId id = static_cast<FactId>(nodes_.size());
  nodes_.push_back(n);
  bucket.push_back(id);
  return id;
}

FactId FactStore::typed_atom(std::string_view name, AtomKind kind, FactTag tag) {
  check_atom_name(name);
  SymId s = sym(name);
  if (sym_kinds_[s] != AtomKind::None && sym_kinds_[s] != kind)
    throw config_error("name used for two different atom kinds: '" + std::string(name) + "'");
  sym_kinds_[s] = kind;
  return intern(FactNode{tag, static_cast<int32_t>(s), -1, -1});
}

FactId FactStore::agent(std::string_view name) {
  return typed_atom(name, AtomKind::Agent, FactTag::Agent);
}
FactId FactStore::candidate(std::string_view name) {
  return typed_atom(name, AtomKind::Candidate, FactTag::Candidate);
}
FactId FactStore::nonce(std::string_view name) {
  return typed_atom(name, AtomKind::Nonce, FactTag::Nonce);
}
FactId FactStore::serial(std::string_view name) {
  return typed_atom(name, AtomKind::Serial, FactTag::Serial);
}

FactId FactStore::num(int value) {
  if (value < 0) throw config_error("numeric fact must be non-negative");
  return intern(FactNode{FactTag::Num, value, -1, -1});
}

FactId FactStore::pubkey(std::string_view owner) {
  return intern(FactNode{FactTag::PubKey, static_cast<int32_t>(sym(owner)), -1, -1});
}
FactId FactStore::seckey(std::string_view owner) {
  return intern(FactNode{FactTag::SecKey, static_cast<int32_t>(sym(owner)), -1, -1});
}

FactId FactStore::index(int value) {
  if (value < 0) throw config_error("index must be non-negative");
  return intern(FactNode{FactTag::Index, value, -1, -1});
}

ListId FactStore::intern_list(std::span<const FactId> items) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (FactId f : items) h = mix(h, f);
  auto& bucket = list_bucket_[h];
  for (ListId id : bucket) {
    auto existing = list(id);
    if (existing.size() == items.size() &&
        std::equal(existing.begin(), existing.end(), items.begin()))
      return id;
  }
  ListId id = static_cast<ListId>(lists_.size());
  lists_.emplace_back(items.begin(), items.end());
  bucket.push_back(id);
  return id;
}

std::span<const FactId> FactStore::list(ListId id) const { return lists_[id]; }

FactId FactStore::candlist(std::span<const FactId> candidates) {
  if (candidates.empty()) throw config_error("candidate list may not be empty");
  for (FactId c : candidates)
    if (tag(c) != FactTag::Candidate)
      throw config_error("candidate list member is not a candidate");
  ListId id = intern_list(candidates);
  return intern(FactNode{FactTag::CandList, static_cast<int32_t>(id), -1, -1});
}

FactId FactStore::enc(FactId key, FactId body) {
  if (tag(key) != FactTag::PubKey)
    throw config_error("enc requires a public key");
  if (!is_atom_tag(tag(body)) && tag(body) != FactTag::CandList)
    throw config_error("enc body must be an atom or candidate list");
  return intern(FactNode{FactTag::Enc, static_cast<int32_t>(key),
                         static_cast<int32_t>(body), -1});
}

FactId FactStore::symenc(FactId key, FactId body) {
  if (!is_atom_tag(tag(key)))
    throw config_error("symenc key must be an atom");
  if (!is_atom_tag(tag(body)) && tag(body) != FactTag::CandList)
    throw config_error("symenc body must be an atom or candidate list");
  return intern(FactNode{FactTag::SymEnc, static_cast<int32_t>(key),
                         static_cast<int32_t>(body), -1});
}

FactId FactStore::sign(FactId key, FactId body) {
  if (tag(key) != FactTag::SecKey)
    throw config_error("sign requires a secret key");
  if (!is_atom_tag(tag(body)) && tag(body) != FactTag::CandList)
    throw config_error("sign body must be an atom or candidate list");
  return intern(FactNode{FactTag::Sign, static_cast<int32_t>(key),
                         static_cast<int32_t>(body), -1});
}

FactId FactStore::sign_pair(FactId key, FactId serial, FactId nonce) {
  if (tag(key) != FactTag::SecKey)
    throw config_error("sign requires a secret key");
  if (tag(serial) != FactTag::Serial || tag(nonce) != FactTag::Nonce)
    throw config_error("pair signature is over (serial, nonce)");
  return intern(FactNode{FactTag::SignPair, static_cast<int32_t>(key),
                         static_cast<int32_t>(serial), static_cast<int32_t>(nonce)});
}

FactId FactStore::ballot(FactId list, FactId signed_serial, FactId index_) {
  if (tag(list) != FactTag::CandList || tag(signed_serial) != FactTag::Sign ||
      tag(node(signed_serial).b) != FactTag::Serial || tag(index_) != FactTag::Index)
    throw config_error("ballot is (list, signed serial, index)");
  return intern(FactNode{FactTag::Ballot, static_cast<int32_t>(list),
                         static_cast<int32_t>(signed_serial), static_cast<int32_t>(index_)});
}

FactId FactStore::rhs(FactId signed_serial, FactId index_) {
  if (tag(signed_serial) != FactTag::Sign ||
      tag(node(signed_serial).b) != FactTag::Serial || tag(index_) != FactTag::Index)
    throw config_error("rhs is (signed serial, index)");
  return intern(FactNode{FactTag::Rhs, static_cast<int32_t>(signed_serial),
                         static_cast<int32_t>(index_), -1});
}

FactId FactStore::receipt(FactId signer, FactId rhs_) {
  if (tag(signer) != FactTag::SecKey || tag(rhs_) != FactTag::Rhs)
    throw config_error("receipt is (secret key, rhs)");
  return intern(FactNode{FactTag::Receipt, static_cast<int32_t>(signer),
                         static_cast<int32_t>(rhs_), -1});
}

FactId FactStore::vote(FactId index_, FactId enc_or_mask) {
  if (tag(index_) != FactTag::Index || !is_enc_slot(tag(enc_or_mask)))
    throw config_error("vote is (index, encrypted list)");
  return intern(FactNode{FactTag::Vote, static_cast<int32_t>(index_),
                         static_cast<int32_t>(enc_or_mask), -1});
}

FactId FactStore::digballot(FactId signed_serial, FactId enc_or_mask) {
  if (tag(signed_serial) != FactTag::Sign ||
      tag(node(signed_serial).b) != FactTag::Serial || !is_enc_slot(tag(enc_or_mask)))
    throw config_error("digballot is (signed serial, encrypted list)");
  return intern(FactNode{FactTag::DigBallot, static_cast<int32_t>(signed_serial),
                         static_cast<int32_t>(enc_or_mask), -1});
}

FactId FactStore::rawballot(FactId serial_, FactId enc_or_mask) {
  if (tag(serial_) != FactTag::Serial || !is_enc_slot(tag(enc_or_mask)))
    throw config_error("raw ballot is (serial, encrypted list)");
  return intern(FactNode{FactTag::RawBallot, static_cast<int32_t>(serial_),
                         static_cast<int32_t>(enc_or_mask), -1});
}

FactId FactStore::result_count(FactId candidate_, int count) {
  if (tag(candidate_) != FactTag::Candidate || count < 0)
    throw config_error("result count is (candidate, tally)");
  return intern(FactNode{FactTag::ResultCount, static_cast<int32_t>(candidate_), count, -1});
}

FactId FactStore::fact_set(std::span<const FactId> members) {
  std::vector<FactId> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  ListId id = intern_list(sorted);
  return intern(FactNode{FactTag::FactSet, static_cast<int32_t>(id), -1, -1});
}

FactId FactStore::dual(FactId key) const {
  const FactNode& n = nodes_[key];
  FactNode d = n;
  if (n.tag == FactTag::PubKey)
    d.tag = FactTag::SecKey;
  else if (n.tag == FactTag::SecKey)
    d.tag = FactTag::PubKey;
  else
    throw lookup_error("dual of a non-key fact");
  uint64_t h = node_hash(d);
  auto it = bucket_.find(h);
  if (it != bucket_.end())
    for (FactId id : it->second)
      if (nodes_[id] == d) return id;
  throw lookup_error("key pair incomplete");
}

int FactStore::int_value(FactId f) const {
  const FactNode& n = nodes_[f];
  if (n.tag != FactTag::Num && n.tag != FactTag::Index)
    throw lookup_error("fact has no integer value");
  return n.a;
}

SymId FactStore::sym_of(FactId f) const {
  const FactNode& n = nodes_[f];
  switch (n.tag) {
    case FactTag::Agent:
    case FactTag::Candidate:
    case FactTag::Nonce:
    case FactTag::Serial:
    case FactTag::PubKey:
    case FactTag::SecKey:
      return static_cast<SymId>(n.a);
    default:
      throw lookup_error("fact has no name");
  }
}

bool FactStore::contains_enc(FactId f) const {
  const FactNode& n = nodes_[f];
  switch (n.tag) {
    case FactTag::Enc:
      return true;
    case FactTag::Vote:
    case FactTag::DigBallot:
    case FactTag::RawBallot:
      return nodes_[n.b].tag == FactTag::Enc;
    default:
      return false;
  }
}

std::string FactStore::render(FactId f) const {
  const FactNode& n = nodes_[f];
  switch (n.tag) {
    case FactTag::Agent:
    case FactTag::Candidate:
    case FactTag::Nonce:
    case FactTag::Serial:
      return sym_names_[n.a];
    case FactTag::Num:
      return std::to_string(n.a);
    case FactTag::PubKey:
      return "pk" + sym_names_[n.a];
    case FactTag::SecKey:
      return "sk" + sym_names_[n.a];
    case FactTag::Index:
      return "ind" + std::to_string(n.a);
    case FactTag::CandList: {
      std::string out = "<";
      auto items = list(static_cast<ListId>(n.a));
      for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += render(items[i]);
      }
      out += '>';
      return out;
    }
    case FactTag::Enc:
      return "enc(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::SymEnc:
      return "symenc(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::Sign:
      return "sign(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::SignPair:
      return "sign(" + render(n.a) + ",(" + render(n.b) + "," + render(n.c) + "))";
    case FactTag::Ballot:
      return "ballot(" + render(n.a) + "," + render(n.b) + "," + render(n.c) + ")";
    case FactTag::Rhs:
      return "rhs(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::Receipt:
      return "receipt(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::Vote:
      return "vote(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::DigBallot:
      return "digballot(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::RawBallot:
      return "raw(" + render(n.a) + "," + render(n.b) + ")";
    case FactTag::Ciphertext:
      return "ciphertext";
    case FactTag::ResultCount:
      return "count(" + render(n.a) + "," + std::to_string(n.b) + ")";
    case FactTag::FactSet: {
      std::string out = "set(";
      auto items = list(static_cast<ListId>(n.a));
      for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += render(items[i]);
      }
      out += ')';
      return out;
    }
  }
  throw lookup_error("unrenderable fact");
}

namespace {

void skip_ws(std::string_view s, size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

void expect(std::string_view s, size_t& pos, char ch) {
  if (pos >= s.size() || s[pos] != ch)
    throw config_error("fact syntax error: expected '" + std::string(1, ch) +
                       "' at offset " + std::to_string(pos) + " in '" + std::string(s) + "'");
  ++pos;
}

std::string_view take_word(std::string_view s, size_t& pos) {
  size_t start = pos;
  while (pos < s.size() &&
         (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
    ++pos;
  if (pos == start)
    throw config_error("fact syntax error at offset " + std::to_string(pos) + " in '" +
                       std::string(s) + "'");
  return s.substr(start, pos - start);
}

}  // namespace

FactId FactStore::parse_expr(std::string_view s, size_t& pos) {
  skip_ws(s, pos);
  if (pos >= s.size()) throw config_error("fact expression is empty");
  if (s[pos] == '<') {
    ++pos;
    std::vector<FactId> items;
    while (true) {
      items.push_back(parse_expr(s, pos));
      skip_ws(s, pos);
      if (pos < s.size() && s[pos] == ',') {
        ++pos;
        continue;
      }
      break;
    }
    expect(s, pos, '>');
    return candlist(items);
  }
  if (std::isdigit(static_cast<unsigned char>(s[pos]))) {
    int value = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), value);
    if (ec != std::errc()) throw config_error("bad number in fact expression");
    pos = static_cast<size_t>(p - s.data());
    return num(value);
  }
  std::string_view word = take_word(s, pos);
  skip_ws(s, pos);
  bool call = pos < s.size() && s[pos] == '(';
  if (!call) {
    if (word == "ciphertext") return ciphertext_;
    if (word.size() > 3 && word.substr(0, 3) == "ind" &&
        std::all_of(word.begin() + 3, word.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return index(std::stoi(std::string(word.substr(3))));
    if (word.size() > 2 && (word.substr(0, 2) == "pk" || word.substr(0, 2) == "sk") &&
        std::isupper(static_cast<unsigned char>(word[2]))) {
      std::string owner(word.substr(2));
      auto it = sym_ids_.find(owner);
      if (it == sym_ids_.end())
        throw config_error("unknown key owner in fact expression: '" + std::string(word) + "'");
      return word[0] == 'p' ? pubkey(owner) : seckey(owner);
    }
    auto it = sym_ids_.find(std::string(word));
    if (it == sym_ids_.end() || sym_kinds_[it->second] == AtomKind::None)
      throw config_error("unknown atom in fact expression: '" + std::string(word) + "'");
    FactTag t;
    switch (sym_kinds_[it->second]) {
      case AtomKind::Agent: t = FactTag::Agent; break;
      case AtomKind::Candidate: t = FactTag::Candidate; break;
      case AtomKind::Nonce: t = FactTag::Nonce; break;
      case AtomKind::Serial: t = FactTag::Serial; break;
      default: throw config_error("unknown atom kind");
    }
    return intern(FactNode{t, static_cast<int32_t>(it->second), -1, -1});
  }
  expect(s, pos, '(');
  auto arg = [&]() { return parse_expr(s, pos); };
  auto comma = [&]() {
    skip_ws(s, pos);
    expect(s, pos, ',');
  };
  FactId out;
  if (word == "enc") {
    FactId k = arg();
    comma();
    FactId b = arg();
    out = enc(k, b);
  } else if (word == "symenc") {
    FactId k = arg();
    comma();
    FactId b = arg();
    out = symenc(k, b);
  } else if (word == "sign") {
    FactId k = arg();
    comma();
    skip_ws(s, pos);
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      FactId a = arg();
      comma();
      FactId b = arg();
      skip_ws(s, pos);
      expect(s, pos, ')');
      out = sign_pair(k, a, b);
    } else {
      out = sign(k, arg());
    }
  } else if (word == "ballot") {
    FactId l = arg();
    comma();
    FactId sg = arg();
    comma();
    FactId ix = arg();
    out = ballot(l, sg, ix);
  } else if (word == "rhs") {
    FactId sg = arg();
    comma();
    FactId ix = arg();
    out = rhs(sg, ix);
  } else if (word == "receipt") {
    FactId k = arg();
    comma();
    FactId r = arg();
    out = receipt(k, r);
  } else if (word == "vote") {
    FactId ix = arg();
    comma();
    FactId e = arg();
    out = vote(ix, e);
  } else if (word == "digballot") {
    FactId sg = arg();
    comma();
    FactId e = arg();
    out = digballot(sg, e);
  } else if (word == "raw") {
    FactId sr = arg();
    comma();
    FactId e = arg();
    out = rawballot(sr, e);
  } else if (word == "count") {
    FactId c = arg();
    comma();
    skip_ws(s, pos);
    int value = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), value);
    if (ec != std::errc()) throw config_error("bad count in fact expression");
    pos = static_cast<size_t>(p - s.data());
    out = result_count(c, value);
  } else if (word == "set") {
    std::vector<FactId> members;
    skip_ws(s, pos);
    if (pos >= s.size() || s[pos] != ')') {
      members.push_back(arg());
      skip_ws(s, pos);
      while (pos < s.size() && s[pos] == ',') {
        ++pos;
        members.push_back(arg());
        skip_ws(s, pos);
      }
    }
    out = fact_set(members);
  } else {
    throw config_error("unknown fact constructor: '" + std::string(word) + "'");
  }
  skip_ws(s, pos);
  expect(s, pos, ')');
  return out;
}

FactId FactStore::parse(std::string_view text) {
  size_t pos = 0;
  FactId f = parse_expr(text, pos);
  skip_ws(text, pos);
  if (pos != text.size())
    throw config_error("trailing characters in fact expression: '" + std::string(text) + "'");
  return f;
}

FactId Universe::role_agent(std::string_view name) const {
  for (size_t i = 0; i < kRoleNames.size(); ++i)
    if (kRoleNames[i] == name) return agents[voters.size() + i];
  throw lookup_error("unknown role agent: " + std::string(name));
}

FactId Universe::corrupt_key(std::string_view component) const {
  if (component == "podservice") return skPS;
  if (component == "authority") return skEA;
  if (component == "wbb") return skW;
  throw config_error("component cannot be marked corrupt: '" + std::string(component) + "'");
}

Universe build_universe(FactStore& store, const ScenarioConfig& cfg) {
  if (cfg.candidates.size() < 2 || cfg.candidates.size() > 4)
    throw config_error("candidate count must be between 2 and 4");
  if (cfg.voters.size() < 2 || cfg.voters.size() > 4)
    throw config_error("voter count must be between 2 and 4");
  size_t n_serials = cfg.serials < 0 ? cfg.voters.size() : static_cast<size_t>(cfg.serials);
  size_t n_nonces = cfg.nonces < 0 ? cfg.voters.size() : static_cast<size_t>(cfg.nonces);
  if (n_serials < cfg.voters.size())
    throw config_error("serial count must be at least the voter count");
  if (n_nonces < cfg.voters.size())
    throw config_error("nonce count must be at least the voter count");
  if (n_serials > 6 || n_nonces > 6)
    throw config_error("serial/nonce counts above 6 are not supported");

  {
    // Names must be unique across candidates, voters and the fixed roles.
    std::vector<std::string> all;
    all.insert(all.end(), cfg.candidates.begin(), cfg.candidates.end());
    all.insert(all.end(), cfg.voters.begin(), cfg.voters.end());
    for (auto r : kRoleNames) all.emplace_back(r);
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
      throw config_error("candidate/voter names must be distinct from each other and from role names");
  }

  Universe u;
  u.store = &store;
  for (const auto& c : cfg.candidates) u.candidates.push_back(store.candidate(c));
  for (const auto& v : cfg.voters) u.voters.push_back(store.agent(v));
  u.agents = u.voters;
  for (auto r : kRoleNames) u.agents.push_back(store.agent(r));
  u.tom = u.role_agent("Tom");
  u.authority = u.role_agent("authority");
  u.wbb = u.role_agent("wbb");
  u.teller = u.role_agent("teller");
  u.podservice = u.role_agent("podservice");
  u.podclient = u.role_agent("podclient");
  u.ballotmngr = u.role_agent("ballotmngr");
  u.ebm = u.role_agent("ebm");
  u.printer = u.role_agent("printer");

  static const char* serial_names[] = {"s1", "s2", "s3", "s4", "s5", "s6"};
  static const char* nonce_names[] = {"na", "nb", "nc", "nd", "ne", "nf"};
  for (size_t i = 0; i < n_serials; ++i) u.serials.push_back(store.serial(serial_names[i]));
  for (size_t i = 0; i < n_nonces; ++i) u.nonces.push_back(store.nonce(nonce_names[i]));

  for (size_t i = 0; i <= cfg.candidates.size(); ++i) {
    u.indices.push_back(store.index(static_cast<int>(i)));
    u.nums.push_back(store.num(static_cast<int>(i)));
  }

  for (auto owner : kKeyOwners) {
    u.pubkeys.push_back(store.pubkey(owner));
    u.seckeys.push_back(store.seckey(owner));
  }
  u.pkW = u.pubkeys[0]; u.skW = u.seckeys[0];
  u.pkT = u.pubkeys[1]; u.skT = u.seckeys[1];
  u.pkEA = u.pubkeys[2]; u.skEA = u.seckeys[2];
  u.pkPS = u.pubkeys[3]; u.skPS = u.seckeys[3];
  u.pkPC = u.pubkeys[4]; u.skPC = u.seckeys[4];
  u.pkBM = u.pubkeys[5]; u.skBM = u.seckeys[5];

  // All candidate orderings, in a deterministic permutation order.
  {
    std::vector<size_t> perm(u.candidates.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    do {
      std::vector<FactId> members;
      members.reserve(perm.size());
      for (size_t i : perm) members.push_back(u.candidates[i]);
      u.lists.push_back(store.candlist(members));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  for (FactId pk : u.pubkeys)
    for (FactId l : u.lists) u.encryptions.push_back(store.enc(pk, l));
  for (FactId sk : u.seckeys)
    for (FactId n : u.nonces) u.signednonces.push_back(store.sign(sk, n));
  for (FactId sk : u.seckeys)
    for (FactId s : u.serials) u.signedserials.push_back(store.sign(sk, s));
  for (FactId sk : u.seckeys)
    for (FactId s : u.serials)
      for (FactId n : u.nonces) u.signednonsers.push_back(store.sign_pair(sk, s, n));
  for (FactId s : u.serials)
    for (FactId e : u.encryptions) u.rawballots.push_back(store.rawballot(s, e));
  for (FactId sk : u.seckeys)
    for (FactId s : u.serials)
      for (FactId e : u.encryptions)
        u.digballots.push_back(store.digballot(store.sign(sk, s), e));
  for (FactId l : u.lists)
    for (FactId sk : u.seckeys)
      for (FactId s : u.serials)
        for (FactId ix : u.indices)
          u.ballots.push_back(store.ballot(l, store.sign(sk, s), ix));
  for (FactId sk : u.seckeys)
    for (FactId s : u.serials)
      for (FactId ix : u.indices) u.castrhs.push_back(store.rhs(store.sign(sk, s), ix));
  for (FactId signer : u.seckeys)
    for (FactId r : u.castrhs) u.receipts.push_back(store.receipt(signer, r));
  for (FactId ix : u.indices)
    for (FactId e : u.encryptions) u.votes.push_back(store.vote(ix, e));

  u.atomic = u.voters;
  u.atomic.insert(u.atomic.end(), u.nonces.begin(), u.nonces.end());
  u.atomic.insert(u.atomic.end(), u.indices.begin(), u.indices.end());

  auto add_all = [](std::vector<FactId>& dst, const std::vector<FactId>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
  };
  add_all(u.messages, u.atomic);
  add_all(u.messages, u.signednonces);
  add_all(u.messages, u.signednonsers);
  add_all(u.messages, u.rawballots);
  add_all(u.messages, u.digballots);
  add_all(u.messages, u.ballots);
  add_all(u.messages, u.castrhs);
  add_all(u.messages, u.receipts);
  add_all(u.messages, u.votes);
  std::sort(u.messages.begin(), u.messages.end());
  u.messages.erase(std::unique(u.messages.begin(), u.messages.end()), u.messages.end());

  u.learnable = u.messages;
  add_all(u.learnable, u.agents);
  add_all(u.learnable, u.serials);
  add_all(u.learnable, u.lists);
  add_all(u.learnable, u.encryptions);
  add_all(u.learnable, u.signedserials);
  add_all(u.learnable, u.pubkeys);
  add_all(u.learnable, u.seckeys);
  add_all(u.learnable, u.nums);
  std::sort(u.learnable.begin(), u.learnable.end());
  u.learnable.erase(std::unique(u.learnable.begin(), u.learnable.end()), u.learnable.end());

  u.in_messages_.assign(store.size(), false);
  for (FactId f : u.messages) u.in_messages_[f] = true;
  u.in_learnable_.assign(store.size(), false);
  for (FactId f : u.learnable) u.in_learnable_[f] = true;
  return u;
}

int find_candidate(const FactStore& store, FactId candidate, FactId list) {
  if (store.tag(list) != FactTag::CandList) throw lookup_error("not a candidate list");
  auto items = store.list(static_cast<ListId>(store.node(list).a));
  for (size_t i = 0; i < items.size(); ++i)
    if (items[i] == candidate) return static_cast<int>(i) + 1;
  throw lookup_error("candidate not on list: " + store.render(candidate));
}

FactId nth_candidate(const FactStore& store, int i, FactId list) {
  if (store.tag(list) != FactTag::CandList) throw lookup_error("not a candidate list");
  auto items = store.list(static_cast<ListId>(store.node(list).a));
  if (i < 1 || static_cast<size_t>(i) > items.size())
    throw lookup_error("list position out of range: " + std::to_string(i));
  return items[static_cast<size_t>(i) - 1];
}

FactId mask_fact(FactStore& store, FactId f, const std::vector<bool>& ik) {
  auto mask_enc = [&](FactId e) -> FactId {
    if (store.tag(e) != FactTag::Enc) return e;
    FactId key = static_cast<FactId>(store.node(e).a);
    FactId d = store.dual(key);
    bool readable = d < ik.size() && ik[d];
    return readable ? e : store.ciphertext();
  };
  const FactNode& n = store.node(f);
  switch (n.tag) {
    case FactTag::Enc:
      return mask_enc(f);
    case FactTag::Vote: {
      FactId m = mask_enc(static_cast<FactId>(n.b));
      return m == static_cast<FactId>(n.b) ? f : store.vote(static_cast<FactId>(n.a), m);
    }
    case FactTag::DigBallot: {
      FactId m = mask_enc(static_cast<FactId>(n.b));
      return m == static_cast<FactId>(n.b) ? f : store.digballot(static_cast<FactId>(n.a), m);
    }
    case FactTag::RawBallot: {
      FactId m = mask_enc(static_cast<FactId>(n.b));
      return m == static_cast<FactId>(n.b) ? f : store.rawballot(static_cast<FactId>(n.a), m);
    }
    default:
      return f;
  }
}

}  // namespace votecheck
