// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance <scenario-dir> [work-dir]

#include "homeauth/cost.hpp"
#include "homeauth/predicates.hpp"
#include "homeauth/scenario_config.hpp"
#include "homeauth/trace_io.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace homeauth;
using namespace homeauth::sim;
using wire::MessageKind;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kBaselineBRatio = 3212.0;
constexpr double kBaselineBRatioTolerance = 1.0;
constexpr double kCommRelativeTolerance = 0.10;
constexpr auto kTimingBudget = std::chrono::milliseconds(1);
constexpr auto kHappyPathBudget = std::chrono::seconds(1);
constexpr std::size_t kHappyPathMessages = 100;
constexpr std::size_t kReplaySeeds = 10;
constexpr std::size_t kMinMutations = 1000;
constexpr std::size_t kFloodFrames = 10000;
constexpr std::size_t kMinUnlinkFrames = 1000;

fs::path g_scenarios;
fs::path g_work;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& why)
    {
        if (!ok) {
            if (pass) {
                detail.str("");
            }
            pass = false;
            detail << why << "; ";
        }
    }
};

Scenario load(const std::string& file)
{
    return load_scenario_file((g_scenarios / file).string());
}

double seconds(Clock::duration d)
{
    return std::chrono::duration<double>(d).count();
}

Outcome timing()
{
    using namespace cost;
    Outcome o;
    const auto t0 = Clock::now();
    const auto proposed = compute_time(*profile(Scheme::Proposed).ops);
    const auto baseline_a = compute_time(*profile(Scheme::BaselineA).ops);
    const auto elapsed = Clock::now() - t0;
    const double ratio_b = time_ratio(*profile(Scheme::BaselineB).published.time, proposed);

    o.require(proposed == Nanos{24280}, "proposed is " + std::to_string(proposed.count()) + " ns");
    o.require(format_micros(proposed, 2) == "24.28", "proposed does not print as 24.28");
    o.require(format_micros(baseline_a, 1) == "138.7", "baseline-A does not print as 138.7");
    o.require(std::abs(ratio_b - kBaselineBRatio) <= kBaselineBRatioTolerance,
              "baseline-B ratio " + std::to_string(ratio_b));
    o.require(elapsed < kTimingBudget, "evaluation took " + std::to_string(seconds(elapsed)) + " s");
    if (o.pass) {
        o.detail << "proposed " << format_micros(proposed, 2) << " us, baseline-A " << format_micros(baseline_a, 1)
                 << " us (exact " << baseline_a.count() << " ns), baseline-B 78 ms / T = " << ratio_b;
    }
    return o;
}

Outcome storage()
{
    using namespace cost;
    Outcome o;
    const std::pair<Scheme, StorageTriple> expected[] = {
        {Scheme::Proposed, {576, 528, 576}},
        {Scheme::BaselineA, {816, 528, 800}},
        {Scheme::BaselineB, {1792, 1280, 1536}},
    };
    for (const auto& [s, want] : expected) {
        const StorageTriple got{compute_storage_bits(StorageRole::DeviceToController, s),
                                compute_storage_bits(StorageRole::DevicePerPeer, s),
                                compute_storage_bits(StorageRole::ControllerPerDevice, s)};
        o.require(got == want, std::string(scheme_name(s)) + " storage mismatch");
        if (o.pass) {
            o.detail << scheme_name(s) << ' ' << got.device_controller << '/' << got.device_peer << '/'
                     << got.controller_device << "  ";
        }
    }
    return o;
}

Outcome communication()
{
    Outcome o;
    const auto r = cost::compute_comm_bits(128);
    o.require(r.steps.size() == 7, "expected seven steps");
    o.require(std::abs(r.relative_delta) <= kCommRelativeTolerance, "delta beyond 10%");
    std::cout << "  per-step bits:";
    for (const auto& s : r.steps) {
        std::cout << ' ' << s.step << '=' << s.bits;
    }
    std::cout << '\n';
    if (o.pass) {
        o.detail << "computed " << r.computed_bits << " bits vs published " << r.published_bits << ", delta "
                 << r.delta_bits << " bits (" << std::fixed << std::setprecision(2) << 100.0 * r.relative_delta
                 << "%)";
    }
    return o;
}

Outcome liveness()
{
    Outcome o;
    const auto sc = load("happy_path.yaml");
    const auto t0 = Clock::now();
    const auto r = run(sc, 1);
    const auto elapsed = Clock::now() - t0;
    const auto v = evaluate(sc, r);

    o.require(sc.exchanges.size() == 1 && sc.exchanges[0].messages == kHappyPathMessages,
              "scenario is not a 100-message exchange");
    const auto& ex = r.exchanges.at(0);
    o.require(ex.outcome == ExchangeOutcome::Complete, "exchange ended " + std::string(outcome_name(ex.outcome)));
    o.require(ex.delivered == kHappyPathMessages, "delivered " + std::to_string(ex.delivered));
    std::set<MessageKind> seen;
    std::set<std::string> data_senders;
    for (const auto& e : r.trace.events) {
        if (e.accepted() && e.kind()) {
            seen.insert(*e.kind());
            if (*e.kind() == MessageKind::Data) {
                data_senders.insert(e.from);
            }
        }
    }
    for (auto k : {MessageKind::A1, MessageKind::A2, MessageKind::C1, MessageKind::C2, MessageKind::C3,
                   MessageKind::C4, MessageKind::Data}) {
        o.require(seen.count(k) == 1, "no accepted " + std::string(wire::kind_name(k)));
    }
    o.require(data_senders.size() == 2, "data was not bidirectional");
    const auto& n1 = r.devices.at("N1");
    const auto& n2 = r.devices.at("N2");
    const auto* s12 = n1.peer(n2.id());
    const auto* s21 = n2.peer(n1.id());
    o.require(s12 && s21 && s12->channel.next() == s21->channel.next(), "D2D counters differ");
    const auto sync = v.find(Predicate::CounterSync);
    o.require(sync && sync->pass, "controller counters out of step");
    o.require(elapsed < kHappyPathBudget, "took " + std::to_string(seconds(elapsed)) + " s");
    if (o.pass) {
        o.detail << ex.delivered << " payloads intact, counters equal, " << std::fixed << std::setprecision(1)
                 << seconds(elapsed) * 1000 << " ms";
    }
    return o;
}

/// Re-feeds every recorded frame to the receiver's final state.
std::size_t refeed_accepts(const Scenario& sc, const RunResult& r)
{
    auto ctl = r.controller;
    auto devices = r.devices;
    std::size_t accepted = 0;
    const Tick now = r.end_tick + 1;
    for (const auto& e : r.trace.events) {
        ReceiveResult res;
        if (e.to == sc.controller_name) {
            res = ctl.receive(e.frame, now);
        } else if (auto it = devices.find(e.to); it != devices.end()) {
            res = it->second.receive(e.frame, now);
        } else {
            continue;
        }
        accepted += res.verdict == Verdict::Accepted;
    }
    return accepted;
}

Outcome replay()
{
    Outcome o;
    const auto sc = load("replay_attack.yaml");
    auto plain = sc;
    plain.adversary.clear();
    std::size_t replays = 0;
    std::size_t refed = 0;
    for (std::uint64_t seed = 1; seed <= kReplaySeeds; ++seed) {
        const auto r = run(sc, seed);
        for (const auto& e : r.trace.events) {
            if (e.disposition == Disposition::Replayed) {
                ++replays;
                o.require(!e.accepted(), "seed " + std::to_string(seed) + " accepted replay #" +
                                             std::to_string(e.index));
            }
        }
        const auto v = evaluate(sc, r);
        o.require(v.find(Predicate::Replay)->pass, "replay predicate failed for seed " + std::to_string(seed));

        const auto clean = run(plain, seed);
        const auto n = refeed_accepts(plain, clean);
        refed += clean.trace.events.size();
        o.require(n == 0, "offline re-feed accepted " + std::to_string(n) + " frames, seed " + std::to_string(seed));
    }
    o.require(replays > 0, "no replays were attempted");
    if (o.pass) {
        o.detail << kReplaySeeds << " seeds: " << replays << " in-run replays and " << refed
                 << " offline re-feeds, 0 accepted";
    }
    return o;
}

Outcome tamper()
{
    Outcome o;
    const auto sc = load("tamper_probe.yaml");
    const auto r = run(sc, 1);
    const auto& p = r.probe;
    const std::set<std::string> allowed{"unknown-mid", "parse-error", "mac-mismatch"};
    o.require(p.mutations >= kMinMutations, "only " + std::to_string(p.mutations) + " mutations");
    o.require(p.rejected == p.mutations, std::to_string(p.mutations - p.rejected) + " mutations accepted");
    for (const auto& [outcome, n] : p.by_outcome) {
        o.require(allowed.count(outcome) == 1, std::to_string(n) + " mutations ended '" + outcome + "'");
    }
    o.require(p.by_field.size() == 6, "not every field was mutated");
    if (o.pass) {
        o.detail << p.rejected << '/' << p.mutations << " rejected;";
        for (const auto& [outcome, n] : p.by_outcome) {
            o.detail << ' ' << outcome << ' ' << n;
        }
    }
    return o;
}

Outcome flood()
{
    Outcome o;
    const auto sc = load("flood.yaml");
    const auto r = run(sc, 1);
    std::size_t frames = 0;
    std::size_t discarded = 0;
    std::uint64_t decryptions = 0;
    std::uint64_t max_hashes = 0;
    for (const auto& e : r.trace.events) {
        if (e.disposition != Disposition::Injected || e.to != sc.controller_name) {
            continue;
        }
        ++frames;
        if (e.verdict != Verdict::Accepted) {
            ++discarded;
            decryptions += e.receiver_ops.decryptions;
        }
        max_hashes = std::max(max_hashes, e.receiver_ops.hashes);
    }
    o.require(frames == kFloodFrames, "flood delivered " + std::to_string(frames) + " frames");
    o.require(discarded == frames, std::to_string(frames - discarded) + " flood frames accepted");
    o.require(decryptions == 0, std::to_string(decryptions) + " decryptions on discarded frames");
    o.require(evaluate(sc, r).pass(), "flood scenario predicates failed");
    if (o.pass) {
        o.detail << frames << " garbage frames discarded with 0 decryptions, at most " << max_hashes
                 << " hash each; honest exchange completed";
    }
    return o;
}

Outcome unlinkability()
{
    Outcome o;
    const auto sc = load("unlinkability.yaml");
    const auto r = run(sc, 1);
    std::size_t accepted = 0;
    for (const auto& e : r.trace.events) {
        accepted += e.accepted();
    }
    o.require(accepted >= kMinUnlinkFrames, "only " + std::to_string(accepted) + " accepted frames");
    o.require(r.insiders.count("N3") == 1, "N3 is not an insider");
    const auto& k = r.knowledge.at("N3");
    const auto res = check_unlinkability(r.trace, {{"N3", k}}, sc.protocol.resync_window);
    o.require(res.pass, res.detail);
    o.require(r.exchanges.size() == 3 && r.exchanges[0].outcome == ExchangeOutcome::Complete &&
                  r.exchanges[1].outcome == ExchangeOutcome::Complete &&
                  r.exchanges[2].outcome == ExchangeOutcome::Complete,
              "pairwise traffic incomplete");
    if (o.pass) {
        o.detail << accepted << " accepted frames; " << res.detail;
    }
    return o;
}

Outcome anonymity()
{
    Outcome o;
    std::size_t frames = 0;
    for (const char* file : {"happy_path.yaml", "unlinkability.yaml", "lifecycle.yaml", "block_c3.yaml"}) {
        const auto sc = load(file);
        const auto r = run(sc, 1);
        std::vector<DeviceId> ids;
        for (const auto& [name, id] : r.trace.nodes) {
            ids.push_back(id);
        }
        const auto res = check_anonymity(r.trace, ids);
        o.require(res.pass, std::string(file) + ": " + res.detail);
        frames += r.trace.events.size();
    }
    if (o.pass) {
        o.detail << frames << " frames over 4 scenarios: identities only inside cipher fields";
    }
    return o;
}

Outcome lifecycle()
{
    Outcome o;
    const auto sc = load("lifecycle.yaml");
    const auto r = run(sc, 1);
    Tick removed_at = 0;
    Tick added_at = 0;
    for (const auto& a : sc.admin) {
        (a.kind == AdminAction::Kind::Remove ? removed_at : added_at) = a.at;
    }
    const DeviceId n3 = r.trace.nodes.at("N3");

    // After removal, a C1 from N3 is discarded and a C1 naming N3 draws a refusal.
    std::size_t from_removed = 0;
    std::size_t naming_removed = 0;
    std::size_t c2_to_removed = 0;
    for (const auto& e : r.trace.events) {
        if (e.tick <= removed_at) {
            continue;
        }
        if (e.kind() == MessageKind::C1 && e.from == "N3") {
            ++from_removed;
            o.require(!e.accepted(), "C1 from removed device accepted at #" + std::to_string(e.index));
        }
        if (e.kind() == MessageKind::C2 && e.to == "N3") {
            ++c2_to_removed;
        }
        if (e.kind() == MessageKind::Update && e.accepted() && e.clear &&
            e.clear->read_uint(0, 8) == static_cast<std::uint64_t>(UpdateOp::Refused) &&
            e.clear->read_uint(8, kIdentityBits) == n3.value) {
            ++naming_removed;
        }
    }
    o.require(c2_to_removed == 0, "controller forwarded a request to the removed device");
    for (const auto& x : r.exchanges) {
        if (x.spec.start >= removed_at && (x.spec.from == "N3" || x.spec.to == "N3")) {
            o.require(x.outcome != ExchangeOutcome::Complete && x.delivered == 0,
                      "exchange " + x.spec.from + "->" + x.spec.to + " got through after removal");
        }
        if (x.spec.start >= removed_at && x.spec.to == "N3") {
            o.require(x.outcome == ExchangeOutcome::Refused, "request naming N3 was not refused");
        }
    }
    o.require(from_removed > 0 && naming_removed > 0, "scenario did not exercise both C1 directions");

    // Exhaustive decryption of every pre-registration cipher field with every key N4 ever held.
    const auto& k4 = r.knowledge.at("N4");
    std::size_t attempts = 0;
    CryptoSuite crypto;
    for (const auto& e : r.trace.events) {
        if (e.tick >= added_at || !e.clear) {
            continue;
        }
        const auto d = wire::decode(e.frame);
        for (const auto& key : k4.keys) {
            ++attempts;
            o.require(crypto.decrypt(key, d.message->cipher, d.message->clear_len) != *e.clear,
                      "N4 decrypts pre-registration frame #" + std::to_string(e.index));
        }
    }
    o.require(attempts > 0 && !k4.keys.empty(), "no decryption attempts were made");
    const auto v = evaluate(sc, r);
    o.require(v.pass(), "lifecycle predicates failed");
    o.require(r.exchanges.back().outcome == ExchangeOutcome::Complete, "new device could not communicate");
    if (o.pass) {
        o.detail << from_removed << " C1 from N3 discarded, " << naming_removed << " naming N3 refused; "
                 << attempts << " decryption attempts by N4 with " << k4.keys.size() << " keys, none succeeded";
    }
    return o;
}

struct BlockPosition {
    const char* label;
    FrameMatch match;
};

Outcome desync()
{
    Outcome o;
    const std::string n1 = "N1";
    const std::string n2 = "N2";
    const std::string c = "C";
    const BlockPosition positions[] = {
        {"A1", {MessageKind::A1, n1, c, 1}},   {"A2", {MessageKind::A2, c, n1, 1}},
        {"C1", {MessageKind::C1, n1, c, 1}},   {"C2", {MessageKind::C2, c, n2, 1}},
        {"C3", {MessageKind::C3, n2, c, 1}},   {"C4", {MessageKind::C4, c, n1, 1}},
        {"C5", {MessageKind::Data, n1, n2, 1}},
    };
    for (const auto& pos : positions) {
        Scenario sc;
        sc.name = std::string("block-") + pos.label;
        sc.devices = {{"N1", DeviceId{0x0101}}, {"N2", DeviceId{0x0202}}};
        sc.exchanges = {{"N1", "N2", 6}};
        sc.adversary = {adv::Block{pos.match}};
        const auto r = run(sc, 1);
        std::optional<std::size_t> blocked;
        std::optional<std::size_t> c1_after;
        std::optional<std::size_t> c4_after;
        std::optional<std::size_t> data_after;
        for (const auto& e : r.trace.events) {
            if (e.disposition == Disposition::Blocked) {
                blocked = blocked.value_or(e.index);
                continue;
            }
            if (!blocked || !e.accepted()) {
                continue;
            }
            if (e.kind() == MessageKind::C1 && !c1_after) {
                c1_after = e.index;
            } else if (e.kind() == MessageKind::C4 && c1_after && !c4_after) {
                c4_after = e.index;
            } else if (e.kind() == MessageKind::Data && c4_after && !data_after) {
                data_after = e.index;
            }
        }
        const std::string p = pos.label;
        o.require(blocked.has_value(), p + ": nothing was blocked");
        o.require(c1_after && c4_after, p + ": no fresh C1..C4 after the block");
        o.require(data_after.has_value(), p + ": messaging did not resume");
        o.require(r.exchanges[0].outcome == ExchangeOutcome::Complete, p + ": exchange incomplete");
        o.require(evaluate(sc, r).pass(), p + ": predicates failed");
        if (o.pass) {
            o.detail << p << " ok ";
        }
    }
    return o;
}

Outcome determinism()
{
    Outcome o;
    fs::create_directories(g_work);
    const auto sc = load("lifecycle.yaml");
    std::string bytes[2];
    for (int i = 0; i < 2; ++i) {
        const auto path = g_work / ("determinism_" + std::to_string(i) + ".jsonl");
        {
            std::ofstream f(path, std::ios::binary);
            write_trace(f, run(sc, 42).trace);
        }
        std::ifstream f(path, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        bytes[i] = ss.str();
    }
    o.require(!bytes[0].empty(), "empty trace");
    o.require(bytes[0] == bytes[1], "trace files differ");
    if (o.pass) {
        o.detail << "two runs wrote identical " << bytes[0].size() << "-byte traces";
    }
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    g_scenarios = argc > 1 ? argv[1] : "scenarios";
    g_work = argc > 2 ? argv[2] : fs::temp_directory_path() / "homeauth_acceptance";

    const std::pair<const char*, Outcome (*)()> criteria[] = {
        {"timing reproduction", timing},
        {"storage reproduction", storage},
        {"communication accounting", communication},
        {"protocol liveness", liveness},
        {"replay suite", replay},
        {"tamper suite", tamper},
        {"dos ordering", flood},
        {"unlinkability", unlinkability},
        {"anonymity", anonymity},
        {"lifecycle", lifecycle},
        {"desync recovery", desync},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < std::size(criteria); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail.str(std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
                  << ": " << o.detail.str() << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
