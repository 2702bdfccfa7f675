#pragma once

#include "homeauth/controller.hpp"
#include "homeauth/device.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace homeauth::sim {

inline constexpr const char* kAdversaryName = "adv";

enum class Disposition { Delivered, Blocked, Injected, Replayed, Tampered };

std::string_view disposition_name(Disposition d);
std::optional<Disposition> disposition_from_name(std::string_view name);

struct TraceEvent {
    std::size_t index = 0;
    Tick tick = 0;
    std::string from;
    std::string to;
    BitString frame;
    Disposition disposition = Disposition::Delivered;
    std::optional<Verdict> verdict; // absent for blocked frames
    DiscardReason reason = DiscardReason::None;
    /// Ops spent by the receiver on this frame.
    OpCounters receiver_ops;
    std::optional<std::size_t> source_event;
    bool honest = true;
    /// Ground-truth plaintext of the cipher field. Kept in memory only.
    std::optional<BitString> clear;

    bool accepted() const { return verdict == Verdict::Accepted; }
    /// Kind from the 4-bit tag, if the frame is long enough and the tag is valid.
    std::optional<wire::MessageKind> kind() const;
};

struct Trace {
    std::string scenario;
    std::uint64_t seed = 0;
    std::map<std::string, DeviceId> nodes;
    std::vector<TraceEvent> events;
};

/// Selects honest frames. Unset fields match anything; occurrence counts
/// matching frames from 1 and restricts the rule to that one frame.
struct FrameMatch {
    std::optional<wire::MessageKind> kind;
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::optional<std::size_t> occurrence;
};

enum class Expectation { Complete, Refused, Dropped };
std::string_view expectation_name(Expectation e);

/// An application-level conversation: `messages` DATA frames alternating
/// between the two ends, message 0 sent by `from`.
struct ExchangeSpec {
    std::string from;
    std::string to;
    std::size_t messages = 1;
    std::size_t payload_bits = 128;
    Tick start = 0;
    Expectation expect = Expectation::Complete;
};

struct DeviceSpec {
    std::string name;
    DeviceId id;
    bool auto_auth = true;
    Tick auth_at = 0;
    /// Registered at start; otherwise it joins through an `add` admin action.
    bool initial = true;
};

struct AdminAction {
    enum class Kind { Add, Remove };
    Kind kind = Kind::Add;
    Tick at = 0;
    std::string device;
};

namespace adv {
struct Block {
    FrameMatch match;
};
struct Tamper {
    FrameMatch match;
    std::optional<std::size_t> bit;
};
struct Replay {
    FrameMatch match;
    Tick delay = 1;
};
struct ReplayAll {
    Tick delay = 1;
};
struct Inject {
    Tick at = 0;
    std::string to;
    BitString frame;
};
struct Flood {
    Tick at = 0;
    std::string to;
    std::size_t count = 0;
    std::size_t per_tick = 100;
};
/// The adversary holds this device's full state (bad agent).
struct Insider {
    std::string device;
};
/// Re-sends the latest captured A1 (or C1 when d2d) of `device` to open a parallel run.
struct ParallelSession {
    Tick at = 0;
    std::string device;
    bool d2d = false;
};
} // namespace adv

using AdversaryAction =
    std::variant<adv::Block, adv::Tamper, adv::Replay, adv::ReplayAll, adv::Inject, adv::Flood, adv::Insider,
                 adv::ParallelSession>;

enum class Predicate { Replay, Forgery, Unlinkability, Anonymity, Dos, Liveness, CounterSync, BackwardSecrecy };
std::string_view predicate_name(Predicate p);
std::optional<Predicate> predicate_from_name(std::string_view name);
const std::vector<Predicate>& all_predicates();

struct TamperProbe {
    std::size_t per_field = 1;
};

struct Scenario {
    std::string name = "scenario";
    ProtocolConfig protocol;
    std::string controller_name = "C";
    DeviceId controller_id{0xC000};
    std::vector<DeviceSpec> devices;
    bool allow_all = true;
    std::vector<std::pair<std::string, std::string>> acl_pairs;
    std::vector<ExchangeSpec> exchanges;
    std::vector<AdminAction> admin;
    std::vector<AdversaryAction> adversary;
    std::vector<Predicate> predicates = all_predicates();
    std::optional<TamperProbe> probe;
    std::size_t auth_retries = 5;
    std::size_t request_retries = 8;
    std::size_t refusal_retries = 2;
    Tick refusal_backoff = 5;
    std::optional<Tick> run_until;
    Tick max_ticks = 200000;
};

enum class ExchangeOutcome { Pending, Complete, Refused, Dropped, Corrupt };
std::string_view outcome_name(ExchangeOutcome o);

struct ExchangeStatus {
    ExchangeSpec spec;
    ExchangeOutcome outcome = ExchangeOutcome::Pending;
    std::size_t delivered = 0;
    std::size_t establishments = 0;
    std::size_t retries = 0;
    std::optional<Tick> finished_at;
};

/// Every counter range and key a device has held, as seen by someone holding its state.
struct Knowledge {
    DeviceId id;
    /// channel start -> furthest `next` seen
    std::map<Counter256, Counter256> ranges;
    std::set<SymKey> keys;
    std::set<DeviceId> identities;
    std::optional<Tick> registered_at;
};

struct ProbeStats {
    std::size_t mutations = 0;
    std::size_t rejected = 0;
    std::map<std::string, std::size_t> by_field;
    std::map<std::string, std::size_t> by_outcome;
    /// (event index, field, bit) of any mutation that was accepted.
    std::vector<std::tuple<std::size_t, std::string, std::size_t>> accepted;
};

struct RunResult {
    Trace trace;
    std::vector<ExchangeStatus> exchanges;
    Controller controller;
    std::map<std::string, Device> devices;
    std::map<std::string, Knowledge> knowledge;
    std::set<std::string> removed;
    std::set<std::string> insiders;
    ProbeStats probe;
    Tick end_tick = 0;
    bool quiesced = false;
};

/// Runs a scenario to quiescence (or max_ticks). Deterministic in (scenario, seed).
RunResult run(const Scenario& scenario, std::uint64_t seed);

/// splitmix64 step; used to derive per-node seeds.
std::uint64_t splitmix64(std::uint64_t& state);

} // namespace homeauth::sim
