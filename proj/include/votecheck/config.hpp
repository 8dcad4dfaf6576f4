#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace votecheck {

// Thrown for malformed scenario input (bad names, out-of-range sizes,
// unknown keys, banned facts outside the universe, ...). The CLI maps it
// to exit code 3.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a composed system is wired inconsistently (an agent produced
// an event the wiring relation claims to cover but does not map).
struct wiring_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ThreatModel : uint8_t { Restricted, Full };
enum class WorldSide : uint8_t { Prime, DoublePrime };

struct Limits {
  uint64_t max_states = 20'000'000;
  uint32_t max_depth = 64;
  double time_budget_s = 0.0;  // 0 = unlimited
};

// One scenario: who votes, who is dishonest, which keys leaked, which threat
// wiring to use, and the exploration limits. Everything downstream (universe,
// model, checker) is derived from this value.
struct ScenarioConfig {
  std::vector<std::string> candidates{"Archimedes", "Babbage"};
  std::vector<std::string> voters{"Alice", "Bob", "James"};
  // Not set => the last declared voter is dishonest. An explicitly empty
  // list means everyone is honest.
  std::optional<std::vector<std::string>> dishonest;
  std::vector<std::string> corrupt;  // subset of {podservice, authority, wbb}
  ThreatModel threat = ThreatModel::Restricted;
  WorldSide world = WorldSide::Prime;
  // voter -> (choice in world one, choice in world two); empty = derived:
  // first two honest voters swap the first two candidates, any further honest
  // voter keeps a fixed cyclic assignment, dishonest voters pick internally.
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> world_pair;
  std::vector<std::string> banned;  // fact expressions in the surface grammar
  int serials = -1;  // -1 = |voters|
  int nonces = -1;   // -1 = |voters|
  bool booth_events = false;
  bool extend_receipts = false;  // also hand receipt traffic to the intruder
  int workers = 1;
  Limits limits;

  std::vector<std::string> dishonest_voters() const {
    if (dishonest) return *dishonest;
    if (voters.empty()) return {};
    return {voters.back()};
  }
};

}  // namespace votecheck
