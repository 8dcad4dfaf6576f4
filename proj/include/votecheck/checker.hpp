#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "votecheck/config.hpp"
#include "votecheck/events.hpp"
#include "votecheck/facts.hpp"
#include "votecheck/process.hpp"

namespace votecheck {

// Raised when an exploration or determinization outgrows the configured
// limits. The verdict-producing checks catch it and report a resource-limit
// result; what() names the bound that tripped.
struct resource_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckStats {
  uint64_t states_explored = 0;
  uint64_t transitions = 0;
  uint32_t max_depth_reached = 0;
};

// Finite labelled transition system reachable from one root. States are
// resolved kernel nodes; edges keep silent steps and record termination as a
// final tick edge. Edge order is deterministic: states appear in
// breadth-first discovery order and each state's edges in kernel order.
struct Lts {
  struct Edge {
    EventId ev;
    uint32_t to;
  };
  std::vector<NodeId> states;
  std::vector<uint64_t> row_off;  // states.size() + 1 offsets into edges
  std::vector<Edge> edges;
  uint32_t initial = 0;
  CheckStats stats;

  std::span<const Edge> out(uint32_t s) const {
    return {edges.data() + row_off[s], edges.data() + row_off[s + 1]};
  }
};

// Deterministic automaton accepting exactly the visible trace language of
// the LTS it was built from (tick rides along as an ordinary final label).
// Per-state edge slices are sorted by event id.
struct TraceDfa {
  struct Edge {
    EventId ev;
    uint32_t to;
  };
  uint32_t states = 0;
  std::vector<uint64_t> row_off;
  std::vector<Edge> edges;
  uint32_t initial = 0;

  std::span<const Edge> out(uint32_t s) const {
    return {edges.data() + row_off[s], edges.data() + row_off[s + 1]};
  }
};

// Breadth-first exploration with canonical-state deduplication. The frontier
// of every level is cut into `workers` contiguous stripes whose successor
// batches are merged back in stripe order, so state numbering — and
// everything downstream — is identical for every worker count. Throws
// resource_limit_error when limits.max_states, limits.max_depth or the time
// budget is exceeded.
Lts explore(Kernel& k, NodeId root, const Limits& limits, int workers = 1);

// Silent-step closure plus subset construction; preserves the trace
// language exactly. Subset count is bounded by limits.max_states.
TraceDfa normalize(Kernel& k, const Lts& l, const Limits& limits);

// Rewrites every network payload (overheard, intercepted or spoofed traffic)
// to its masked form: encrypted submessages whose decryption key lies
// outside `ik` (indexed by FactId) become the opaque ciphertext token.
// Private ballot handovers pass through untouched; comparisons hide them
// afterwards. Returns p unchanged when nothing needs masking.
NodeId mask_process(Kernel& k, FactStore& fs, NodeId p,
                    const std::vector<bool>& ik);

enum class CheckResult : uint8_t { Holds, Fails, ResourceLimit };
enum class FailDirection : uint8_t { LeftNotInRight, RightNotInLeft };

// Refinement outcome in event form, for callers that hold the stores.
struct Refinement {
  CheckResult result = CheckResult::Holds;
  std::vector<EventId> counterexample;  // shortest impl-only trace when Fails
  CheckStats stats;
  std::string limit;  // which bound tripped when ResourceLimit
};

// Does every trace of `impl` belong to `spec`'s language? On failure the
// counterexample is a shortest impl trace rejected by spec, re-simulated on
// both sides before being returned.
Refinement trace_refines(Kernel& k, NodeId spec, NodeId impl,
                         const Limits& limits, int workers = 1);

// Outcome of one scenario-level check, rendered for reporting. The
// counterexample lines parse back to the originating events.
struct Verdict {
  CheckResult result = CheckResult::Holds;
  std::vector<std::string> counterexample;  // nonempty iff result == Fails
  std::optional<FailDirection> direction;
  CheckStats stats;
  std::string limit;
};

// Can the attacker tell the two candidate-assignment worlds apart? Builds
// both worlds over one universe, wires each to the attacker, masks every
// network payload he cannot read, hides the ballot handovers, and decides
// mutual trace refinement. Fails with the first failing direction's
// shortest distinguishing trace: RightNotInLeft carries a second-world
// trace the first world cannot produce, LeftNotInRight the converse.
Verdict anonymity_check(const ScenarioConfig& cfg);

// Can the attacker ever come to hold a banned fact? Builds the configured
// world with holding flags armed, hides everything except those flags, and
// checks refinement against the silent process. Fails with the shortest
// flag trace; requires a nonempty banned set.
Verdict secrecy_check(const ScenarioConfig& cfg);

}  // namespace votecheck
