#pragma once

#include "homeauth/sim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace homeauth::sim {

struct PredicateResult {
    Predicate predicate;
    bool pass = true;
    /// Trace event index (or exchange index for liveness) of the first violation.
    std::optional<std::size_t> counterexample;
    std::string detail;
};

struct ScenarioVerdict {
    std::vector<PredicateResult> results;

    bool pass() const;
    const PredicateResult* find(Predicate p) const;
};

/// No replayed frame is accepted, unless its original was never delivered.
PredicateResult check_replay(const Trace& trace);

/// No injected or tampered frame is accepted.
PredicateResult check_forgery(const Trace& trace);

struct InsiderView {
    std::string name;
    Knowledge knowledge;
};

/// Accepted MIDs are pairwise distinct, and no insider can regenerate the MID
/// of a frame it is not party to from any counter it ever held (+/- window).
PredicateResult check_unlinkability(const Trace& trace, const std::vector<InsiderView>& insiders,
                                    std::uint32_t window);

/// Scans every honest frame's clear-text fields for real identities.
/// Header fields and whole-field (zero-padded) matches fail outright; 16-bit
/// windows inside digests are counted and must stay within chance level.
PredicateResult check_anonymity(const Trace& trace, const std::vector<DeviceId>& real_ids);

/// Discards cost no decryption; injected frames cost at most one hash.
PredicateResult check_dos(const Trace& trace);

PredicateResult check_liveness(const std::vector<ExchangeStatus>& exchanges, bool quiesced);

/// Controller and device counters agree; peers sharing a session agree on the D2D counter.
PredicateResult check_counter_sync(const Controller& controller, const std::map<std::string, Device>& devices,
                                   const std::set<std::string>& removed);

/// Late joiners cannot decrypt or address any frame sent before they joined.
PredicateResult check_backward_secrecy(const Trace& trace, const std::map<std::string, Knowledge>& knowledge);

ScenarioVerdict evaluate(const Scenario& scenario, const RunResult& result);

/// Chance-level bound on incidental 16-bit matches: E + 6*sqrt(E) + 3.
double incidental_match_bound(double expected);

} // namespace homeauth::sim
