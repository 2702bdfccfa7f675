#include "homeauth/predicates.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace homeauth::sim {

bool ScenarioVerdict::pass() const
{
    for (const auto& r : results) {
        if (!r.pass) {
            return false;
        }
    }
    return true;
}

const PredicateResult* ScenarioVerdict::find(Predicate p) const
{
    for (const auto& r : results) {
        if (r.predicate == p) {
            return &r;
        }
    }
    return nullptr;
}

double incidental_match_bound(double expected)
{
    return expected + 6.0 * std::sqrt(expected) + 3.0;
}

namespace {

PredicateResult fail(Predicate p, std::optional<std::size_t> at, std::string detail)
{
    return {p, false, at, std::move(detail)};
}

} // namespace

PredicateResult check_replay(const Trace& trace)
{
    std::size_t replayed = 0;
    for (const auto& e : trace.events) {
        if (e.disposition != Disposition::Replayed) {
            continue;
        }
        ++replayed;
        if (!e.accepted()) {
            continue;
        }
        const bool undelivered_original =
            e.source_event && *e.source_event < trace.events.size() &&
            trace.events[*e.source_event].disposition == Disposition::Blocked;
        if (!undelivered_original) {
            return fail(Predicate::Replay, e.index, "replayed frame accepted");
        }
    }
    return {Predicate::Replay, true, std::nullopt, std::to_string(replayed) + " replayed frames, none accepted"};
}

PredicateResult check_forgery(const Trace& trace)
{
    std::size_t forged = 0;
    for (const auto& e : trace.events) {
        if (e.disposition != Disposition::Injected && e.disposition != Disposition::Tampered) {
            continue;
        }
        ++forged;
        if (e.accepted()) {
            return fail(Predicate::Forgery, e.index, std::string(disposition_name(e.disposition)) + " frame accepted");
        }
    }
    return {Predicate::Forgery, true, std::nullopt, std::to_string(forged) + " forged frames, none accepted"};
}

PredicateResult check_unlinkability(const Trace& trace, const std::vector<InsiderView>& insiders, std::uint32_t window)
{
    std::unordered_map<Digest256, std::size_t> seen;
    std::size_t accepted = 0;
    for (const auto& e : trace.events) {
        if (!e.accepted()) {
            continue;
        }
        const auto d = wire::decode(e.frame);
        if (!d) {
            continue;
        }
        ++accepted;
        const auto [it, fresh] = seen.emplace(d.message->receiver_mid, e.index);
        if (!fresh) {
            return fail(Predicate::Unlinkability, e.index,
                        "receiver MID repeats event " + std::to_string(it->second));
        }
    }

    CryptoSuite crypto;
    std::size_t recomputed = 0;
    for (const auto& ins : insiders) {
        std::unordered_set<Digest256> reachable;
        for (const auto& [start, next] : ins.knowledge.ranges) {
            const std::uint64_t span = next.distance_from(start).value_or(0);
            const Counter256 lo = start - window;
            for (std::uint64_t i = 0; i <= span + 2 * static_cast<std::uint64_t>(window); ++i) {
                for (const auto id : ins.knowledge.identities) {
                    reachable.insert(crypto.masked_identity(lo + i, id));
                }
            }
        }
        recomputed += reachable.size();
        for (const auto& e : trace.events) {
            if (e.from == ins.name || e.to == ins.name) {
                continue;
            }
            const auto d = wire::decode(e.frame);
            if (d && reachable.count(d.message->receiver_mid)) {
                return fail(Predicate::Unlinkability, e.index, "insider " + ins.name + " regenerates MID");
            }
        }
    }
    std::ostringstream os;
    os << accepted << " accepted MIDs distinct";
    if (!insiders.empty()) {
        os << "; " << recomputed << " insider recomputations, no match";
    }
    return {Predicate::Unlinkability, true, std::nullopt, os.str()};
}

PredicateResult check_anonymity(const Trace& trace, const std::vector<DeviceId>& real_ids)
{
    std::unordered_set<std::uint16_t> ids;
    for (const auto id : real_ids) {
        ids.insert(id.value);
    }
    auto padded = [](std::uint16_t v) {
        BitString b(kDigestBits - kIdentityBits);
        b.append_uint(v, kIdentityBits);
        return Digest256::from_bits(b);
    };
    std::vector<Digest256> padded_ids;
    for (const auto id : ids) {
        padded_ids.push_back(padded(id));
    }

    std::size_t frames = 0;
    std::size_t incidental = 0;
    double expected = 0.0;
    std::size_t id_bearing = 0;
    for (const auto& e : trace.events) {
        if (!e.honest) {
            continue;
        }
        const auto d = wire::decode(e.frame);
        if (!d) {
            continue;
        }
        ++frames;
        const auto& m = *d.message;
        if (ids.count(m.clear_len)) {
            return fail(Predicate::Anonymity, e.index, "clear_len header equals a real identity");
        }
        for (std::size_t off = 0; off + kIdentityBits <= wire::kHeaderBits; ++off) {
            if (ids.count(static_cast<std::uint16_t>(e.frame.read_uint(off, kIdentityBits)))) {
                return fail(Predicate::Anonymity, e.index, "real identity pattern in frame header");
            }
        }
        std::vector<const Digest256*> digests{&m.receiver_mid, &m.mac};
        if (m.proof) {
            digests.push_back(&*m.proof);
        }
        for (const auto* dg : digests) {
            for (const auto& p : padded_ids) {
                if (*dg == p) {
                    return fail(Predicate::Anonymity, e.index, "clear-text field is a zero-padded identity");
                }
            }
            const BitString bits = dg->bits();
            for (std::size_t off = 0; off + kIdentityBits <= kDigestBits; ++off) {
                if (ids.count(static_cast<std::uint16_t>(bits.read_uint(off, kIdentityBits)))) {
                    ++incidental;
                }
            }
            expected += static_cast<double>(kDigestBits - kIdentityBits + 1) * ids.size() / 65536.0;
        }
        // Where the ground truth puts an identity in the payload, it must not
        // surface verbatim at the same position of the cipher field.
        if (e.clear && !m.cipher.empty()) {
            const auto kind = m.kind;
            std::optional<std::size_t> at;
            if (kind == wire::MessageKind::C2) {
                at = 0;
            } else if (kind == wire::MessageKind::Update) {
                at = 8;
            }
            if (at) {
                ++id_bearing;
                if (m.cipher.read_uint(*at, kIdentityBits) == e.clear->read_uint(*at, kIdentityBits)) {
                    return fail(Predicate::Anonymity, e.index, "identity visible through the cipher field");
                }
            }
        }
    }
    const double bound = incidental_match_bound(expected);
    std::ostringstream os;
    os << frames << " frames scanned; " << id_bearing << " identity-bearing payloads all enciphered; "
       << incidental << " incidental 16-bit digest matches (chance bound " << static_cast<long long>(bound) << ")";
    if (static_cast<double>(incidental) > bound) {
        return fail(Predicate::Anonymity, std::nullopt, os.str());
    }
    return {Predicate::Anonymity, true, std::nullopt, os.str()};
}

PredicateResult check_dos(const Trace& trace)
{
    std::size_t discarded = 0;
    std::size_t injected = 0;
    for (const auto& e : trace.events) {
        if (!e.verdict) {
            continue;
        }
        if (*e.verdict != Verdict::Accepted) {
            ++discarded;
            if (e.receiver_ops.decryptions != 0) {
                return fail(Predicate::Dos, e.index, "discarded frame was decrypted");
            }
        }
        if (e.disposition == Disposition::Injected) {
            ++injected;
            if (e.receiver_ops.hashes > 1) {
                return fail(Predicate::Dos, e.index, "injected frame cost more than one hash");
            }
        }
    }
    return {Predicate::Dos, true, std::nullopt,
            std::to_string(discarded) + " discards with 0 decryptions; " + std::to_string(injected) +
                " injected frames within one hash each"};
}

PredicateResult check_liveness(const std::vector<ExchangeStatus>& exchanges, bool quiesced)
{
    for (std::size_t i = 0; i < exchanges.size(); ++i) {
        const auto& ex = exchanges[i];
        const bool ok = (ex.spec.expect == Expectation::Complete && ex.outcome == ExchangeOutcome::Complete) ||
                        (ex.spec.expect == Expectation::Refused && ex.outcome == ExchangeOutcome::Refused) ||
                        (ex.spec.expect == Expectation::Dropped && ex.outcome == ExchangeOutcome::Dropped);
        if (!ok) {
            return fail(Predicate::Liveness, i,
                        "exchange " + ex.spec.from + "->" + ex.spec.to + " ended " +
                            std::string(outcome_name(ex.outcome)) + ", expected " +
                            std::string(expectation_name(ex.spec.expect)));
        }
    }
    if (!quiesced) {
        return fail(Predicate::Liveness, std::nullopt, "run did not reach quiescence");
    }
    return {Predicate::Liveness, true, std::nullopt, std::to_string(exchanges.size()) + " exchanges as expected"};
}

PredicateResult check_counter_sync(const Controller& controller, const std::map<std::string, Device>& devices,
                                   const std::set<std::string>& removed)
{
    std::size_t channels = 0;
    std::size_t sessions = 0;
    for (const auto& [name, dev] : devices) {
        if (removed.count(name)) {
            continue;
        }
        const DeviceRecord* rec = controller.record(dev.id());
        if (!rec) {
            return fail(Predicate::CounterSync, std::nullopt, name + " has no controller record");
        }
        if (dev.pending_auth()) {
            return fail(Predicate::CounterSync, std::nullopt, name + " still awaits A2");
        }
        if (dev.controller_channel().next() != rec->channel.next() || dev.session_key() != rec->key) {
            return fail(Predicate::CounterSync, std::nullopt, name + " and controller disagree on CC");
        }
        ++channels;
        for (const auto& [peer_id, s] : dev.peers()) {
            for (const auto& [other_name, other] : devices) {
                if (other.id() != peer_id) {
                    continue;
                }
                const PeerSession* back = other.peer(dev.id());
                if (back && back->d2d_key == s.d2d_key && dev.id() < peer_id) {
                    ++sessions;
                    if (back->channel.next() != s.channel.next()) {
                        return fail(Predicate::CounterSync, std::nullopt,
                                    name + " and " + other_name + " disagree on DDC");
                    }
                }
            }
        }
    }
    return {Predicate::CounterSync, true, std::nullopt,
            std::to_string(channels) + " controller channels and " + std::to_string(sessions) +
                " D2D sessions in step"};
}

PredicateResult check_backward_secrecy(const Trace& trace, const std::map<std::string, Knowledge>& knowledge)
{
    CryptoSuite crypto;
    std::size_t attempts = 0;
    std::size_t joiners = 0;
    for (const auto& [name, k] : knowledge) {
        if (!k.registered_at || *k.registered_at == 0) {
            continue;
        }
        ++joiners;
        std::unordered_set<Digest256> reachable;
        for (const auto& [start, next] : k.ranges) {
            const std::uint64_t span = next.distance_from(start).value_or(0);
            for (std::uint64_t i = 0; i <= span; ++i) {
                for (const auto id : k.identities) {
                    reachable.insert(crypto.masked_identity(start + i, id));
                }
            }
        }
        for (const auto& e : trace.events) {
            if (e.tick >= *k.registered_at || !e.honest) {
                continue;
            }
            const auto d = wire::decode(e.frame);
            if (!d) {
                continue;
            }
            if (reachable.count(d.message->receiver_mid)) {
                return fail(Predicate::BackwardSecrecy, e.index, name + " can address a pre-join frame");
            }
            if (!e.clear || d.message->cipher.empty()) {
                continue;
            }
            for (const auto& key : k.keys) {
                ++attempts;
                if (crypto.decrypt(key, d.message->cipher, d.message->clear_len) == *e.clear) {
                    return fail(Predicate::BackwardSecrecy, e.index, name + " decrypts a pre-join frame");
                }
            }
        }
    }
    if (joiners == 0) {
        return {Predicate::BackwardSecrecy, true, std::nullopt, "no late joiners"};
    }
    return {Predicate::BackwardSecrecy, true, std::nullopt,
            std::to_string(attempts) + " decryption attempts by " + std::to_string(joiners) +
                " late joiner(s), none succeeded"};
}

ScenarioVerdict evaluate(const Scenario& scenario, const RunResult& result)
{
    ScenarioVerdict v;
    for (const auto p : scenario.predicates) {
        switch (p) {
        case Predicate::Replay: v.results.push_back(check_replay(result.trace)); break;
        case Predicate::Forgery: v.results.push_back(check_forgery(result.trace)); break;
        case Predicate::Unlinkability: {
            std::vector<InsiderView> views;
            for (const auto& name : result.insiders) {
                const auto it = result.knowledge.find(name);
                if (it != result.knowledge.end()) {
                    views.push_back({name, it->second});
                }
            }
            v.results.push_back(check_unlinkability(result.trace, views, scenario.protocol.resync_window));
            break;
        }
        case Predicate::Anonymity: {
            std::vector<DeviceId> ids;
            for (const auto& [name, id] : result.trace.nodes) {
                ids.push_back(id);
            }
            v.results.push_back(check_anonymity(result.trace, ids));
            break;
        }
        case Predicate::Dos: v.results.push_back(check_dos(result.trace)); break;
        case Predicate::Liveness: v.results.push_back(check_liveness(result.exchanges, result.quiesced)); break;
        case Predicate::CounterSync:
            v.results.push_back(check_counter_sync(result.controller, result.devices, result.removed));
            break;
        case Predicate::BackwardSecrecy:
            v.results.push_back(check_backward_secrecy(result.trace, result.knowledge));
            break;
        }
    }
    return v;
}

} // namespace homeauth::sim
