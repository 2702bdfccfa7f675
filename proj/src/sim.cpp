#include "homeauth/sim.hpp"

#include <algorithm>
#include <deque>
#include <random>

namespace homeauth::sim {

using wire::MessageKind;

std::string_view disposition_name(Disposition d)
{
    switch (d) {
    case Disposition::Delivered: return "delivered";
    case Disposition::Blocked: return "blocked";
    case Disposition::Injected: return "injected";
    case Disposition::Replayed: return "replayed";
    case Disposition::Tampered: return "tampered";
    }
    return "?";
}

std::optional<Disposition> disposition_from_name(std::string_view name)
{
    for (auto d : {Disposition::Delivered, Disposition::Blocked, Disposition::Injected, Disposition::Replayed,
                   Disposition::Tampered}) {
        if (disposition_name(d) == name) {
            return d;
        }
    }
    return std::nullopt;
}

std::optional<MessageKind> TraceEvent::kind() const
{
    if (frame.size() < wire::kKindBits) {
        return std::nullopt;
    }
    return wire::kind_from_tag(frame.read_uint(0, wire::kKindBits));
}

std::string_view expectation_name(Expectation e)
{
    switch (e) {
    case Expectation::Complete: return "complete";
    case Expectation::Refused: return "refused";
    case Expectation::Dropped: return "dropped";
    }
    return "?";
}

std::string_view outcome_name(ExchangeOutcome o)
{
    switch (o) {
    case ExchangeOutcome::Pending: return "pending";
    case ExchangeOutcome::Complete: return "complete";
    case ExchangeOutcome::Refused: return "refused";
    case ExchangeOutcome::Dropped: return "dropped";
    case ExchangeOutcome::Corrupt: return "corrupt";
    }
    return "?";
}

std::string_view predicate_name(Predicate p)
{
    switch (p) {
    case Predicate::Replay: return "replay";
    case Predicate::Forgery: return "forgery";
    case Predicate::Unlinkability: return "unlinkability";
    case Predicate::Anonymity: return "anonymity";
    case Predicate::Dos: return "dos";
    case Predicate::Liveness: return "liveness";
    case Predicate::CounterSync: return "counter_sync";
    case Predicate::BackwardSecrecy: return "backward_secrecy";
    }
    return "?";
}

const std::vector<Predicate>& all_predicates()
{
    static const std::vector<Predicate> all{Predicate::Replay,    Predicate::Forgery,  Predicate::Unlinkability,
                                            Predicate::Anonymity, Predicate::Dos,      Predicate::Liveness,
                                            Predicate::CounterSync, Predicate::BackwardSecrecy};
    return all;
}

std::optional<Predicate> predicate_from_name(std::string_view name)
{
    for (auto p : all_predicates()) {
        if (predicate_name(p) == name) {
            return p;
        }
    }
    return std::nullopt;
}

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

struct QueuedFrame {
    BitString bits;
    std::optional<BitString> clear;
    Tick ready_at = 0;
    Disposition origin = Disposition::Delivered;
    std::optional<std::size_t> source;
};

struct AgentState {
    bool ever_authenticated = false;
    std::size_t auth_failures = 0;
    bool gave_up = false;
};

struct ExchangeState {
    ExchangeStatus status;
    std::vector<BitString> payloads;
    bool in_flight = false;
    bool requesting = false;
    std::size_t refusals = 0;
    Tick next_attempt = 0;

    bool finished() const { return status.outcome != ExchangeOutcome::Pending; }
    const std::string& owner() const { return status.delivered % 2 == 0 ? status.spec.from : status.spec.to; }
    const std::string& other() const { return status.delivered % 2 == 0 ? status.spec.to : status.spec.from; }
    bool involves(const std::string& a, const std::string& b) const
    {
        return (status.spec.from == a && status.spec.to == b) || (status.spec.from == b && status.spec.to == a);
    }
};

BitString random_bitstring(std::mt19937_64& rng, std::size_t n)
{
    BitString b;
    while (b.size() < n) {
        const std::size_t w = std::min<std::size_t>(64, n - b.size());
        const std::uint64_t v = rng();
        b.append_uint(w == 64 ? v : (v & ((std::uint64_t{1} << w) - 1)), w);
    }
    return b;
}

class Engine {
public:
    Engine(const Scenario& sc, std::uint64_t seed);
    RunResult run();

private:
    bool is_controller(const std::string& name) const { return name == sc_.controller_name; }
    const std::string& name_of(DeviceId id) const;
    std::optional<DeviceId> id_of(const std::string& name) const;

    void enqueue(const std::string& from, const Outgoing& out, Tick t);
    void enqueue_all(const std::string& from, const std::vector<Outgoing>& outs, Tick t);

    bool matches(const FrameMatch& m, const std::string& from, const std::string& to, const BitString& bits,
                 std::size_t rule);
    void deliver_honest(const std::string& from, const std::string& to, QueuedFrame f, Tick t);
    std::size_t deliver(const std::string& from, const std::string& to, const BitString& bits,
                        const std::optional<BitString>& clear, Disposition d, std::optional<std::size_t> source,
                        bool honest, Tick t);
    void probe(const std::string& to, const BitString& bits, std::size_t event_index, Tick t);
    void handle_events(const std::string& node, const std::vector<NodeEvent>& events, Tick t);

    void admin_step(Tick t);
    void adversary_step(Tick t);
    void deliveries(Tick t);
    void tick_nodes(Tick t);
    void drive(Tick t);
    bool quiescent(Tick t) const;

    void observe(const std::string& name);
    ExchangeState* current_exchange(const std::string& a, const std::string& b, Tick t);

    Scenario sc_;
    std::uint64_t seed_;
    Controller ctl_;
    std::map<std::string, Device> devices_;
    std::map<std::string, const DeviceSpec*> specs_;
    std::map<std::string, std::uint64_t> node_seeds_;
    std::map<std::string, AgentState> agents_;
    std::vector<ExchangeState> exchanges_;
    std::map<std::pair<std::string, std::string>, std::deque<QueuedFrame>> links_;
    std::map<std::string, std::deque<QueuedFrame>> adv_links_;
    std::map<std::size_t, std::size_t> rule_hits_;
    std::mt19937_64 adv_rng_;
    std::mt19937_64 probe_rng_;
    Trace trace_;
    std::map<std::string, Knowledge> knowledge_;
    std::set<std::string> removed_;
    std::set<std::string> insiders_;
    ProbeStats probe_stats_;
};

Engine::Engine(const Scenario& sc, std::uint64_t seed)
    : sc_(sc), seed_(seed), ctl_([&] {
          std::uint64_t s = seed;
          return Controller(sc.controller_id, sc.protocol, splitmix64(s));
      }())
{
    std::uint64_t state = seed;
    splitmix64(state); // controller
    adv_rng_.seed(splitmix64(state));
    probe_rng_.seed(splitmix64(state));
    std::mt19937_64 payload_rng(splitmix64(state));
    for (const auto& d : sc_.devices) {
        node_seeds_[d.name] = splitmix64(state);
        specs_[d.name] = &d;
    }

    trace_.scenario = sc_.name;
    trace_.seed = seed;
    trace_.nodes[sc_.controller_name] = sc_.controller_id;
    for (const auto& d : sc_.devices) {
        trace_.nodes[d.name] = d.id;
    }

    ctl_.acl().set_allow_all(sc_.allow_all);
    for (const auto& [a, b] : sc_.acl_pairs) {
        ctl_.acl().allow(*id_of(a), *id_of(b));
    }

    std::set<DeviceId> roster;
    for (const auto& d : sc_.devices) {
        if (d.initial) {
            roster.insert(d.id);
        }
    }
    for (const auto& d : sc_.devices) {
        if (!d.initial) {
            continue;
        }
        const Provisioning prov = ctl_.provision(d.id);
        ctl_.register_device(prov);
        auto [it, ok] = devices_.emplace(d.name, Device(sc_.controller_id, prov, sc_.protocol, node_seeds_[d.name]));
        std::set<DeviceId> others = roster;
        others.erase(d.id);
        it->second.set_roster(others);
        knowledge_[d.name].id = d.id;
        knowledge_[d.name].registered_at = 0;
        agents_[d.name];
        observe(d.name);
    }

    for (const auto& ex : sc_.exchanges) {
        ExchangeState st;
        st.status.spec = ex;
        for (std::size_t i = 0; i < ex.messages; ++i) {
            st.payloads.push_back(random_bitstring(payload_rng, ex.payload_bits));
        }
        st.next_attempt = ex.start;
        exchanges_.push_back(std::move(st));
    }

    for (const auto& a : sc_.adversary) {
        if (const auto* ins = std::get_if<adv::Insider>(&a)) {
            insiders_.insert(ins->device);
        }
    }
}

const std::string& Engine::name_of(DeviceId id) const
{
    if (id == sc_.controller_id) {
        return sc_.controller_name;
    }
    for (const auto& d : sc_.devices) {
        if (d.id == id) {
            return d.name;
        }
    }
    throw ProtocolError("frame addressed to an unknown node");
}

std::optional<DeviceId> Engine::id_of(const std::string& name) const
{
    const auto it = trace_.nodes.find(name);
    if (it == trace_.nodes.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Engine::enqueue(const std::string& from, const Outgoing& out, Tick t)
{
    links_[{from, name_of(out.to)}].push_back(QueuedFrame{out.frame, out.clear, t + 1, Disposition::Delivered, {}});
}

void Engine::enqueue_all(const std::string& from, const std::vector<Outgoing>& outs, Tick t)
{
    for (const auto& o : outs) {
        enqueue(from, o, t);
    }
}

void Engine::observe(const std::string& name)
{
    const auto it = devices_.find(name);
    if (it == devices_.end()) {
        return;
    }
    const Device& d = it->second;
    Knowledge& k = knowledge_[name];
    k.id = d.id();
    k.identities.insert(d.id());
    k.identities.insert(d.controller_id());
    k.identities.insert(d.roster().begin(), d.roster().end());
    auto note = [&](const CounterChannel& ch) {
        auto [r, fresh] = k.ranges.emplace(ch.start(), ch.next());
        if (!fresh && ch.next().distance_from(r->second).value_or(~0ULL) < (1ULL << 63)) {
            r->second = ch.next();
        }
    };
    note(d.controller_channel());
    k.keys.insert(d.session_key());
    if (d.pending_auth()) {
        note(d.pending_auth()->channel);
        k.keys.insert(d.pending_auth()->key);
    }
    for (const auto& [pid, s] : d.peers()) {
        note(s.channel);
        k.keys.insert(s.d2d_key);
        k.identities.insert(pid);
    }
}

bool Engine::matches(const FrameMatch& m, const std::string& from, const std::string& to, const BitString& bits,
                     std::size_t rule)
{
    if (m.from && *m.from != from) {
        return false;
    }
    if (m.to && *m.to != to) {
        return false;
    }
    if (m.kind) {
        if (bits.size() < wire::kKindBits || wire::kind_from_tag(bits.read_uint(0, wire::kKindBits)) != m.kind) {
            return false;
        }
    }
    const std::size_t n = ++rule_hits_[rule];
    return !m.occurrence || *m.occurrence == n;
}

std::size_t Engine::deliver(const std::string& from, const std::string& to, const BitString& bits,
                            const std::optional<BitString>& clear, Disposition d, std::optional<std::size_t> source,
                            bool honest, Tick t)
{
    TraceEvent ev;
    ev.index = trace_.events.size();
    ev.tick = t;
    ev.from = from;
    ev.to = to;
    ev.frame = bits;
    ev.disposition = d;
    ev.source_event = source;
    ev.honest = honest;
    ev.clear = clear;

    if (d == Disposition::Blocked) {
        trace_.events.push_back(std::move(ev));
        return trace_.events.size() - 1;
    }

    ReceiveResult res;
    if (is_controller(to)) {
        const OpCounters before = ctl_.crypto().ops();
        res = ctl_.receive(bits, t);
        ev.receiver_ops = ctl_.crypto().ops() - before;
    } else {
        const auto it = devices_.find(to);
        if (it == devices_.end()) {
            // Node not (yet) present: nothing hears the frame.
            ev.verdict = Verdict::Discarded;
            ev.reason = DiscardReason::UnknownMid;
            trace_.events.push_back(std::move(ev));
            return trace_.events.size() - 1;
        }
        const OpCounters before = it->second.crypto().ops();
        res = it->second.receive(bits, t);
        ev.receiver_ops = it->second.crypto().ops() - before;
    }
    ev.verdict = res.verdict;
    ev.reason = res.reason;
    trace_.events.push_back(std::move(ev));
    const std::size_t index = trace_.events.size() - 1;

    enqueue_all(to, res.out, t);
    observe(to);
    handle_events(to, res.events, t);
    return index;
}

void Engine::probe(const std::string& to, const BitString& bits, std::size_t event_index, Tick t)
{
    const auto decoded = wire::decode(bits);
    if (!decoded) {
        return;
    }
    const auto layout = wire::field_layout(decoded.message->kind, decoded.message->clear_len);
    for (const auto& span : layout) {
        for (std::size_t i = 0; i < sc_.probe->per_field; ++i) {
            const std::size_t bit = span.offset + probe_rng_() % span.length;
            BitString mutated = bits;
            mutated.flip(bit);
            ReceiveResult r;
            if (is_controller(to)) {
                Controller copy = ctl_;
                r = copy.receive(mutated, t);
            } else {
                Device copy = devices_.at(to);
                r = copy.receive(mutated, t);
            }
            const std::string field{wire::field_name(span.field)};
            ++probe_stats_.mutations;
            ++probe_stats_.by_field[field];
            if (r.verdict == Verdict::Accepted) {
                probe_stats_.accepted.emplace_back(event_index, field, bit);
                ++probe_stats_.by_outcome["accepted"];
            } else {
                ++probe_stats_.rejected;
                ++probe_stats_.by_outcome[std::string(r.verdict == Verdict::ParseError ? "parse-error"
                                                                                        : reason_name(r.reason))];
            }
        }
    }
}

void Engine::deliver_honest(const std::string& from, const std::string& to, QueuedFrame f, Tick t)
{
    bool blocked = false;
    std::optional<std::size_t> tamper_bit;
    std::vector<Tick> replays;
    for (std::size_t i = 0; i < sc_.adversary.size(); ++i) {
        const auto& a = sc_.adversary[i];
        if (const auto* b = std::get_if<adv::Block>(&a)) {
            if (matches(b->match, from, to, f.bits, i)) {
                blocked = true;
            }
        } else if (const auto* tm = std::get_if<adv::Tamper>(&a)) {
            if (matches(tm->match, from, to, f.bits, i) && !tamper_bit) {
                tamper_bit = tm->bit ? *tm->bit % f.bits.size() : adv_rng_() % f.bits.size();
            }
        } else if (const auto* r = std::get_if<adv::Replay>(&a)) {
            if (matches(r->match, from, to, f.bits, i)) {
                replays.push_back(r->delay);
            }
        } else if (const auto* ra = std::get_if<adv::ReplayAll>(&a)) {
            replays.push_back(ra->delay);
        }
    }

    std::size_t index = 0;
    if (blocked) {
        index = deliver(from, to, f.bits, f.clear, Disposition::Blocked, std::nullopt, true, t);
    } else if (tamper_bit) {
        BitString mutated = f.bits;
        mutated.flip(*tamper_bit);
        index = deliver(from, to, mutated, std::nullopt, Disposition::Tampered, std::nullopt, false, t);
    } else {
        if (sc_.probe) {
            probe(to, f.bits, trace_.events.size(), t);
        }
        index = deliver(from, to, f.bits, f.clear, Disposition::Delivered, std::nullopt, true, t);
    }
    for (const Tick delay : replays) {
        adv_links_[to].push_back(QueuedFrame{f.bits, std::nullopt, t + std::max<Tick>(delay, 1), Disposition::Replayed,
                                             index});
    }
}

void Engine::deliveries(Tick t)
{
    // Snapshot the keys: deliveries enqueue onto links, possibly creating new ones.
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& [k, q] : links_) {
        if (!q.empty()) {
            keys.push_back(k);
        }
    }
    for (const auto& k : keys) {
        auto& q = links_[k];
        if (q.empty() || q.front().ready_at > t) {
            continue;
        }
        QueuedFrame f = std::move(q.front());
        q.pop_front();
        deliver_honest(k.first, k.second, std::move(f), t);
    }

    std::vector<std::string> targets;
    for (const auto& [to, q] : adv_links_) {
        targets.push_back(to);
    }
    for (const auto& to : targets) {
        auto& q = adv_links_[to];
        // Adversary links are not rate-limited; ready_at spreads floods over ticks.
        while (!q.empty() && q.front().ready_at <= t) {
            QueuedFrame f = std::move(q.front());
            q.pop_front();
            deliver(kAdversaryName, to, f.bits, std::nullopt, f.origin, f.source, false, t);
        }
    }
}

void Engine::admin_step(Tick t)
{
    for (const auto& a : sc_.admin) {
        if (a.at != t) {
            continue;
        }
        const DeviceId id = *id_of(a.device);
        if (a.kind == AdminAction::Kind::Remove) {
            enqueue_all(sc_.controller_name, ctl_.remove_device(id), t);
            removed_.insert(a.device);
        } else {
            const Provisioning prov = ctl_.provision(id);
            std::set<DeviceId> roster;
            for (const auto other : ctl_.active_devices()) {
                roster.insert(other);
            }
            enqueue_all(sc_.controller_name, ctl_.add_device(prov), t);
            auto [it, ok] =
                devices_.emplace(a.device, Device(sc_.controller_id, prov, sc_.protocol, node_seeds_[a.device]));
            it->second.set_roster(roster);
            knowledge_[a.device].registered_at = t;
            agents_[a.device];
            observe(a.device);
        }
    }
}

void Engine::adversary_step(Tick t)
{
    for (const auto& a : sc_.adversary) {
        if (const auto* inj = std::get_if<adv::Inject>(&a)) {
            if (inj->at == t) {
                adv_links_[inj->to].push_back(QueuedFrame{inj->frame, std::nullopt, t, Disposition::Injected, {}});
            }
        } else if (const auto* fl = std::get_if<adv::Flood>(&a)) {
            if (fl->at != t) {
                continue;
            }
            const std::size_t per_tick = std::max<std::size_t>(fl->per_tick, 1);
            for (std::size_t j = 0; j < fl->count; ++j) {
                BitString bits;
                if (j % 2 == 0) {
                    bits = random_bitstring(adv_rng_, 1 + adv_rng_() % 2048);
                } else {
                    // Well-formed frame with random contents: reaches the MID lookup.
                    static const MessageKind kinds[] = {MessageKind::A1, MessageKind::A2, MessageKind::C1,
                                                        MessageKind::C2, MessageKind::C3, MessageKind::C4,
                                                        MessageKind::Data, MessageKind::Update};
                    wire::ProtocolMessage m;
                    m.kind = kinds[adv_rng_() % 8];
                    m.receiver_mid = Digest256::from_bits(random_bitstring(adv_rng_, kDigestBits));
                    if (wire::carries_proof(m.kind)) {
                        m.proof = Digest256::from_bits(random_bitstring(adv_rng_, kDigestBits));
                    }
                    if (wire::carries_cipher(m.kind)) {
                        m.clear_len = static_cast<std::uint16_t>(1 + adv_rng_() % 600);
                        m.cipher = random_bitstring(adv_rng_, cipher_bits_for(m.clear_len));
                    }
                    m.mac = Digest256::from_bits(random_bitstring(adv_rng_, kDigestBits));
                    bits = wire::encode(m);
                }
                adv_links_[fl->to].push_back(QueuedFrame{bits, std::nullopt, t + j / per_tick, Disposition::Injected, {}});
            }
        } else if (const auto* ps = std::get_if<adv::ParallelSession>(&a)) {
            if (ps->at != t) {
                continue;
            }
            const MessageKind want = ps->d2d ? MessageKind::C1 : MessageKind::A1;
            for (auto it = trace_.events.rbegin(); it != trace_.events.rend(); ++it) {
                if (it->honest && it->from == ps->device && it->kind() == want) {
                    adv_links_[sc_.controller_name].push_back(
                        QueuedFrame{it->frame, std::nullopt, t, Disposition::Replayed, it->index});
                    break;
                }
            }
        }
    }
}

ExchangeState* Engine::current_exchange(const std::string& a, const std::string& b, Tick t)
{
    for (auto& ex : exchanges_) {
        if (!ex.finished() && ex.involves(a, b) && t >= ex.status.spec.start) {
            return &ex;
        }
    }
    return nullptr;
}

void Engine::handle_events(const std::string& node, const std::vector<NodeEvent>& events, Tick t)
{
    if (is_controller(node)) {
        return;
    }
    AgentState& agent = agents_[node];
    for (const auto& e : events) {
        if (std::holds_alternative<event::AuthCompleted>(e)) {
            agent.ever_authenticated = true;
            agent.auth_failures = 0;
        } else if (std::holds_alternative<event::AuthAborted>(e)) {
            if (++agent.auth_failures > sc_.auth_retries) {
                agent.gave_up = true;
            }
        } else if (const auto* pe = std::get_if<event::PeerEstablished>(&e)) {
            if (auto* ex = current_exchange(node, name_of(pe->peer), t)) {
                ex->in_flight = false;
                if (pe->initiator) {
                    ex->requesting = false;
                    ++ex->status.establishments;
                }
            }
        } else if (const auto* ra = std::get_if<event::RequestAborted>(&e)) {
            if (auto* ex = current_exchange(node, name_of(ra->target), t); ex && ex->owner() == node) {
                ex->requesting = false;
                if (++ex->status.retries > sc_.request_retries) {
                    ex->status.outcome = ExchangeOutcome::Dropped;
                    ex->status.finished_at = t;
                }
            }
        } else if (const auto* rr = std::get_if<event::RequestRefused>(&e)) {
            if (auto* ex = current_exchange(node, name_of(rr->target), t); ex && ex->owner() == node) {
                ex->requesting = false;
                if (ex->status.spec.expect == Expectation::Refused || ++ex->refusals > sc_.refusal_retries) {
                    ex->status.outcome = ExchangeOutcome::Refused;
                    ex->status.finished_at = t;
                } else {
                    ex->next_attempt = t + sc_.refusal_backoff;
                }
            }
        } else if (const auto* sa = std::get_if<event::SessionAborted>(&e)) {
            if (auto* ex = current_exchange(node, name_of(sa->peer), t)) {
                ex->in_flight = false;
                if (ex->owner() == node && ++ex->status.retries > sc_.request_retries) {
                    ex->status.outcome = ExchangeOutcome::Dropped;
                    ex->status.finished_at = t;
                }
            }
        } else if (const auto* dr = std::get_if<event::DataReceived>(&e)) {
            auto* ex = current_exchange(node, name_of(dr->peer), t);
            if (!ex || ex->other() != node) {
                continue;
            }
            if (dr->payload != ex->payloads[ex->status.delivered]) {
                ex->status.outcome = ExchangeOutcome::Corrupt;
                ex->status.finished_at = t;
                continue;
            }
            ex->in_flight = false;
            if (++ex->status.delivered == ex->status.spec.messages) {
                ex->status.outcome = ExchangeOutcome::Complete;
                ex->status.finished_at = t;
            }
        }
    }
}

void Engine::tick_nodes(Tick t)
{
    ctl_.tick(t);
    for (auto& [name, d] : devices_) {
        const auto events = d.tick(t);
        observe(name);
        handle_events(name, events, t);
    }
}

void Engine::drive(Tick t)
{
    std::set<std::string> needs_auth;
    std::set<std::pair<std::string, std::string>> busy_pairs;

    for (auto& ex : exchanges_) {
        if (ex.finished() || t < ex.status.spec.start) {
            continue;
        }
        const auto pair = std::minmax(ex.status.spec.from, ex.status.spec.to);
        if (!busy_pairs.insert(pair).second) {
            continue; // an earlier exchange on this pair is still running
        }
        const std::string owner = ex.owner();
        const std::string other = ex.other();
        const auto oit = devices_.find(owner);
        if (oit == devices_.end()) {
            continue;
        }
        Device& dev = oit->second;
        if (agents_[owner].gave_up) {
            ex.status.outcome = ExchangeOutcome::Dropped;
            ex.status.finished_at = t;
            continue;
        }
        if (const auto peer_it = devices_.find(other);
            peer_it != devices_.end() && !peer_it->second.authenticated() && !removed_.count(other) &&
            !agents_[other].gave_up) {
            needs_auth.insert(other);
        }
        if (ex.in_flight) {
            continue;
        }
        const DeviceId other_id = *id_of(other);
        if (dev.peer(other_id)) {
            const std::size_t k = ex.status.delivered;
            const bool expect_response = k + 1 < ex.status.spec.messages;
            enqueue(owner, dev.d2d_send(other_id, ex.payloads[k], expect_response, t), t);
            observe(owner);
            ex.in_flight = true;
            continue;
        }
        if (ex.requesting && !dev.outstanding_request()) {
            ex.requesting = false; // request dropped by a re-authentication
        }
        if (ex.requesting || t < ex.next_attempt) {
            continue;
        }
        if (!dev.authenticated()) {
            needs_auth.insert(owner);
            continue;
        }
        if (dev.outstanding_request()) {
            continue;
        }
        enqueue(owner, dev.request_d2d(other_id, t), t);
        observe(owner);
        ex.requesting = true;
    }

    for (auto& [name, dev] : devices_) {
        AgentState& agent = agents_[name];
        if (agent.gave_up || dev.pending_auth() || dev.authenticated()) {
            continue;
        }
        const DeviceSpec& spec = *specs_.at(name);
        const bool initial_auth = spec.auto_auth && !agent.ever_authenticated && t >= spec.auth_at;
        if (initial_auth || needs_auth.count(name)) {
            enqueue(name, dev.begin_auth(t), t);
            observe(name);
        }
    }
}

bool Engine::quiescent(Tick t) const
{
    if (sc_.run_until && t < *sc_.run_until) {
        return false;
    }
    for (const auto& ex : exchanges_) {
        if (!ex.finished()) {
            return false;
        }
    }
    for (const auto& [k, q] : links_) {
        if (!q.empty()) {
            return false;
        }
    }
    for (const auto& [k, q] : adv_links_) {
        if (!q.empty()) {
            return false;
        }
    }
    for (const auto& a : sc_.admin) {
        if (a.at > t) {
            return false;
        }
    }
    for (const auto& a : sc_.adversary) {
        const Tick* at = nullptr;
        if (const auto* i = std::get_if<adv::Inject>(&a)) {
            at = &i->at;
        } else if (const auto* f = std::get_if<adv::Flood>(&a)) {
            at = &f->at;
        } else if (const auto* p = std::get_if<adv::ParallelSession>(&a)) {
            at = &p->at;
        }
        if (at && *at > t) {
            return false;
        }
    }
    for (const auto& [name, d] : devices_) {
        if (d.pending_auth() || d.outstanding_request()) {
            return false;
        }
        const AgentState& agent = agents_.at(name);
        const DeviceSpec& spec = *specs_.at(name);
        if (spec.auto_auth && !agent.ever_authenticated && !agent.gave_up) {
            return false;
        }
    }
    return true;
}

RunResult Engine::run()
{
    Tick t = 0;
    bool quiesced = false;
    for (; t <= sc_.max_ticks; ++t) {
        admin_step(t);
        adversary_step(t);
        deliveries(t);
        tick_nodes(t);
        drive(t);
        if (quiescent(t)) {
            quiesced = true;
            break;
        }
    }

    RunResult res{std::move(trace_), {}, ctl_, devices_, knowledge_, removed_, insiders_, probe_stats_,
                  std::min(t, sc_.max_ticks), quiesced};
    for (const auto& ex : exchanges_) {
        res.exchanges.push_back(ex.status);
    }
    return res;
}

} // namespace

RunResult run(const Scenario& scenario, std::uint64_t seed)
{
    Engine engine(scenario, seed);
    return engine.run();
}

} // namespace homeauth::sim
