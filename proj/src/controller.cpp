#include "homeauth/controller.hpp"

#include <algorithm>

namespace homeauth {

using wire::MessageKind;

void AccessControlList::add(DeviceId id)
{
    members_[id] = true;
}

void AccessControlList::set_active(DeviceId id, bool active)
{
    const auto it = members_.find(id);
    if (it == members_.end()) {
        throw ProtocolError("unknown device in ACL");
    }
    it->second = active;
}

bool AccessControlList::active(DeviceId id) const
{
    const auto it = members_.find(id);
    return it != members_.end() && it->second;
}

void AccessControlList::allow(DeviceId a, DeviceId b)
{
    pairs_.insert(key(a, b));
}

void AccessControlList::deny(DeviceId a, DeviceId b)
{
    pairs_.erase(key(a, b));
}

bool AccessControlList::allowed(DeviceId a, DeviceId b) const
{
    if (a == b || !active(a) || !active(b)) {
        return false;
    }
    return allow_all_ || pairs_.count(key(a, b)) != 0;
}

Controller::Controller(DeviceId id, const ProtocolConfig& config, std::uint64_t seed)
    : id_(id), config_(config), crypto_(seed)
{
    if (config.response_timeout == 0 || config.dormancy_threshold == 0) {
        throw ProtocolError("timeouts must be positive");
    }
}

Provisioning Controller::provision(DeviceId id)
{
    return Provisioning{id, SecretSeed{crypto_.random_u16()}, crypto_.random_counter(), crypto_.random_key()};
}

void Controller::register_device(const Provisioning& prov)
{
    if (prov.id == id_) {
        throw ProtocolError("device id equals controller id");
    }
    if (records_.count(prov.id) != 0) {
        throw ProtocolError("device already registered");
    }
    records_.emplace(prov.id, DeviceRecord{prov.id, prov.seed, prov.initial_key,
                                           CounterChannel(prov.initial_counter, id_, config_.resync_window, crypto_),
                                           std::nullopt, std::nullopt, std::nullopt, true});
    acl_.add(prov.id);
    reindex(prov.id);
}

std::vector<Outgoing> Controller::add_device(const Provisioning& prov)
{
    register_device(prov);
    std::vector<Outgoing> out;
    for (auto& [id, rec] : records_) {
        if (id != prov.id && rec.active) {
            out.push_back(send_update(rec, UpdateOp::Join, prov.id));
        }
    }
    return out;
}

std::vector<Outgoing> Controller::remove_device(DeviceId id)
{
    const auto it = records_.find(id);
    if (it == records_.end() || !it->second.active) {
        throw ProtocolError("unknown or already removed device");
    }
    it->second.active = false;
    it->second.otp.reset();
    it->second.fallback.reset();
    acl_.set_active(id, false);
    unindex(id);
    std::erase_if(pending_, [&](const PendingEstablishment& p) { return p.requester == id || p.target == id; });

    std::vector<Outgoing> out;
    for (auto& [other, rec] : records_) {
        if (rec.active) {
            out.push_back(send_update(rec, UpdateOp::Leave, id));
        }
    }
    return out;
}

const DeviceRecord* Controller::record(DeviceId id) const
{
    const auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
}

std::vector<DeviceId> Controller::active_devices() const
{
    std::vector<DeviceId> ids;
    for (const auto& [id, rec] : records_) {
        if (rec.active) {
            ids.push_back(id);
        }
    }
    return ids;
}

void Controller::unindex(DeviceId id)
{
    for (const auto& mid : indexed_[id]) {
        index_.erase(mid);
    }
    indexed_.erase(id);
}

void Controller::reindex(DeviceId id)
{
    unindex(id);
    const DeviceRecord& rec = records_.at(id);
    if (!rec.active) {
        return;
    }
    auto& list = indexed_[id];
    for (const auto& e : rec.channel.window()) {
        index_[e.mid] = IndexEntry{id, false};
        list.push_back(e.mid);
    }
    if (rec.fallback) {
        for (const auto& e : rec.fallback->channel.window()) {
            index_.emplace(e.mid, IndexEntry{id, true});
            list.push_back(e.mid);
        }
    }
}

Nonce16 Controller::draw_otp()
{
    for (;;) {
        const Nonce16 otp{crypto_.random_u16()};
        if (otp.value != id_.value && records_.count(DeviceId{otp.value}) == 0) {
            return otp;
        }
    }
}

Outgoing Controller::send_update(DeviceRecord& rec, UpdateOp op, DeviceId subject)
{
    const Counter256 c = rec.channel.take_send(crypto_);
    auto out = detail::seal(crypto_, rec.id, MessageKind::Update, device_mid(c, rec.id), std::nullopt, &rec.key,
                            detail::update_clear(op, subject), c);
    reindex(rec.id);
    return out;
}

ReceiveResult Controller::receive(const BitString& frame, Tick now)
{
    const auto decoded = wire::decode(frame);
    if (!decoded) {
        return ReceiveResult::parse_error();
    }
    const wire::ProtocolMessage& m = *decoded.message;

    const auto hit = index_.find(m.receiver_mid);
    if (hit == index_.end()) {
        return ReceiveResult::discard(DiscardReason::UnknownMid);
    }
    const IndexEntry entry = hit->second;
    DeviceRecord& rec = records_.at(entry.device);
    const CounterChannel& ch = entry.fallback ? rec.fallback->channel : rec.channel;
    const auto c = ch.match(m.receiver_mid);
    if (!c) {
        return ReceiveResult::discard(DiscardReason::UnknownMid);
    }

    // Authenticate before looking at anything else in the frame.
    if (!detail::verify_mac(crypto_, m, *c)) {
        return ReceiveResult::discard(DiscardReason::MacMismatch);
    }

    switch (m.kind) {
    case MessageKind::A1:
        if (m.clear_len != kA1ClearBits) {
            return ReceiveResult::discard(DiscardReason::BadPayload);
        }
        break;
    case MessageKind::C1:
        if (entry.fallback) {
            return ReceiveResult::discard(DiscardReason::UnexpectedKind);
        }
        if (m.clear_len != kC1ClearBits) {
            return ReceiveResult::discard(DiscardReason::BadPayload);
        }
        break;
    case MessageKind::C3:
        if (entry.fallback) {
            return ReceiveResult::discard(DiscardReason::UnexpectedKind);
        }
        break;
    default:
        return ReceiveResult::discard(DiscardReason::UnexpectedKind);
    }

    switch (m.kind) {
    case MessageKind::A1: return on_a1(rec, entry.fallback, m, *c, now);
    case MessageKind::C1: return on_c1(rec, m, *c, now);
    default: return on_c3(rec, m, *c, now);
    }
}

ReceiveResult Controller::on_a1(DeviceRecord& rec, bool via_fallback, const wire::ProtocolMessage& m,
                                const Counter256& c, Tick)
{
    const SymKey& key = via_fallback ? rec.fallback->key : rec.key;
    const BitString clear = crypto_.decrypt(key, m.cipher, m.clear_len);
    if (clear.read_uint(0, kAuthReqBits) != kAuthReq) {
        return ReceiveResult::discard(DiscardReason::BadPayload);
    }
    const Nonce16 r{static_cast<std::uint16_t>(clear.read_uint(kAuthReqBits, kNonceBits))};

    if (via_fallback) {
        rec.fallback->channel.accept(c, crypto_);
    } else {
        rec.channel.accept(c, crypto_);
        rec.fallback = DeviceRecord::Fallback{rec.key, rec.channel};
    }

    const SessionMaterial fresh = crypto_.derive_session(rec.seed, r);
    rec.key = fresh.key;
    rec.channel = CounterChannel(fresh.counter, id_, config_.resync_window, crypto_);
    rec.last_nonce = r;
    rec.otp = draw_otp();
    // Requests issued under the superseded session are dead.
    std::erase_if(pending_, [&](const PendingEstablishment& p) { return p.requester == rec.id; });

    const Counter256 c2 = rec.channel.take_send(crypto_);
    ReceiveResult res{Verdict::Accepted, DiscardReason::None, {}, {}};
    res.out.push_back(detail::seal(crypto_, rec.id, MessageKind::A2, device_mid(c2, rec.id), std::nullopt, &rec.key,
                                   BitString::from_uint(rec.otp->value, kNonceBits), c2));
    reindex(rec.id);
    return res;
}

ReceiveResult Controller::on_c1(DeviceRecord& rec, const wire::ProtocolMessage& m, const Counter256& c, Tick now)
{
    if (!rec.otp) {
        return ReceiveResult::discard(DiscardReason::NotAuthenticated);
    }
    if (detail::proof_of_belonging(crypto_, c, *rec.otp) != *m.proof) {
        return ReceiveResult::discard(DiscardReason::ProofMismatch);
    }
    const BitString masked = crypto_.decrypt(rec.key, m.cipher, m.clear_len);
    const DeviceId target{
        static_cast<std::uint16_t>((masked ^ detail::identity_mask(crypto_, c)).read_uint(0, kIdentityBits))};
    rec.channel.accept(c, crypto_);
    rec.fallback.reset();

    ReceiveResult res{Verdict::Accepted, DiscardReason::None, {}, {}};

    // One outstanding request per requester: a new C1 supersedes whatever it had pending.
    std::erase_if(pending_, [&](const PendingEstablishment& p) { return p.requester == rec.id; });

    const auto t = records_.find(target);
    const bool available = t != records_.end() && t->second.active && t->second.otp.has_value() &&
                           acl_.allowed(rec.id, target);
    if (!available) {
        res.out.push_back(send_update(rec, UpdateOp::Refused, target));
        reindex(rec.id);
        return res;
    }

    DeviceRecord& tr = t->second;
    const SymKey d2d_key = crypto_.random_key();
    const Counter256 d2d_counter = crypto_.random_counter();

    const Counter256 c2 = tr.channel.take_send(crypto_);
    const Digest256 poc = detail::proof_of_controller(crypto_, c2, tr.key, tr.seed);
    BitString clear = BitString::from_uint(rec.id.value, kIdentityBits);
    clear.append(d2d_key.bits());
    clear.append(d2d_counter.bits());
    res.out.push_back(detail::seal(crypto_, tr.id, MessageKind::C2, device_mid(c2, tr.id), poc, &tr.key, clear, c2));
    pending_.push_back(PendingEstablishment{rec.id, target, d2d_key, d2d_counter, now});

    reindex(rec.id);
    reindex(target);
    return res;
}

ReceiveResult Controller::on_c3(DeviceRecord& rec, const wire::ProtocolMessage& m, const Counter256& c, Tick)
{
    if (!rec.otp) {
        return ReceiveResult::discard(DiscardReason::NotAuthenticated);
    }
    if (detail::proof_of_belonging(crypto_, c, *rec.otp) != *m.proof) {
        return ReceiveResult::discard(DiscardReason::ProofMismatch);
    }
    const auto p = std::find_if(pending_.begin(), pending_.end(),
                                [&](const PendingEstablishment& e) { return e.target == rec.id; });
    if (p == pending_.end()) {
        return ReceiveResult::discard(DiscardReason::NoPending);
    }
    const PendingEstablishment est = *p;
    pending_.erase(p);
    rec.channel.accept(c, crypto_);
    rec.fallback.reset();
    reindex(rec.id);

    ReceiveResult res{Verdict::Accepted, DiscardReason::None, {}, {}};
    DeviceRecord& req = records_.at(est.requester);
    if (!req.active) {
        return res;
    }
    const Counter256 c4 = req.channel.take_send(crypto_);
    BitString clear = est.d2d_key.bits();
    clear.append(est.d2d_counter.bits());
    res.out.push_back(
        detail::seal(crypto_, req.id, MessageKind::C4, device_mid(c4, req.id), std::nullopt, &req.key, clear, c4));
    reindex(req.id);
    return res;
}

std::vector<NodeEvent> Controller::tick(Tick now)
{
    std::vector<NodeEvent> events;
    while (!pending_.empty()) {
        // Entries are appended in creation order, so the front is always the oldest.
        const auto& front = pending_.front();
        if (now - front.created_at < config_.response_timeout) {
            break;
        }
        events.emplace_back(event::PendingExpired{front.requester, front.target});
        pending_.pop_front();
    }
    return events;
}

Controller::State Controller::export_state() const
{
    State s;
    s.id = id_;
    for (const auto& [id, rec] : records_) {
        State::Record r{id, rec.seed, rec.key, channel_state(rec.channel), std::nullopt, std::nullopt,
                        rec.last_nonce, rec.otp, rec.active};
        if (rec.fallback) {
            r.fallback_key = rec.fallback->key;
            r.fallback_channel = channel_state(rec.fallback->channel);
        }
        s.records.push_back(r);
    }
    s.pending.assign(pending_.begin(), pending_.end());
    s.allow_all = acl_.allow_all();
    s.allowed_pairs.assign(acl_.pairs().begin(), acl_.pairs().end());
    s.rng_state = crypto_.rng_state();
    s.ops = crypto_.ops();
    return s;
}

Controller Controller::import_state(const State& s, const ProtocolConfig& config)
{
    Controller ctl(s.id, config, 0);
    for (const auto& r : s.records) {
        DeviceRecord rec{r.id, r.seed, r.key, restore_channel(r.channel, s.id, config.resync_window, ctl.crypto_),
                         std::nullopt, r.last_nonce, r.otp, r.active};
        if (r.fallback_key && r.fallback_channel) {
            rec.fallback = DeviceRecord::Fallback{
                *r.fallback_key, restore_channel(*r.fallback_channel, s.id, config.resync_window, ctl.crypto_)};
        }
        ctl.records_.emplace(r.id, std::move(rec));
        ctl.acl_.add(r.id);
        ctl.acl_.set_active(r.id, r.active);
        ctl.reindex(r.id);
    }
    ctl.pending_.assign(s.pending.begin(), s.pending.end());
    ctl.acl_.set_allow_all(s.allow_all);
    for (const auto& [a, b] : s.allowed_pairs) {
        ctl.acl_.allow(a, b);
    }
    ctl.crypto_.set_rng_state(s.rng_state);
    ctl.crypto_.set_ops(s.ops);
    return ctl;
}

} // namespace homeauth
