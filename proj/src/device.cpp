#include "homeauth/device.hpp"

namespace homeauth {

using wire::MessageKind;

ChannelState channel_state(const CounterChannel& ch)
{
    return {ch.start(), ch.next(), ch.floor()};
}

CounterChannel restore_channel(const ChannelState& s, DeviceId inbound, std::uint32_t window, CryptoSuite& crypto)
{
    return CounterChannel(s.start, s.next, s.floor, inbound, window, crypto);
}

Device::Device(DeviceId controller_id, const Provisioning& prov, const ProtocolConfig& config, std::uint64_t seed)
    : id_(prov.id),
      controller_id_(controller_id),
      config_(config),
      crypto_(seed),
      seed_(prov.seed),
      key_(prov.initial_key),
      channel_(prov.initial_counter, prov.id, config.resync_window, crypto_)
{
    if (prov.id == controller_id) {
        throw ProtocolError("device id equals controller id");
    }
}

Device::AuthState Device::auth_state() const
{
    if (pending_) {
        return AuthState::AwaitingA2;
    }
    return otp_ ? AuthState::Authenticated : AuthState::Unauthenticated;
}

const PeerSession* Device::peer(DeviceId id) const
{
    const auto it = peers_.find(id);
    return it == peers_.end() ? nullptr : &it->second;
}

std::size_t Device::storage_bits() const
{
    return kDeviceControllerStorageBits + peers_.size() * kDevicePeerStorageBits;
}

Nonce16 Device::fresh_nonce()
{
    Nonce16 r{crypto_.random_u16()};
    while (last_nonce_ && r == *last_nonce_) {
        r = Nonce16{crypto_.random_u16()};
    }
    return r;
}

Outgoing Device::begin_auth(Tick now)
{
    if (pending_) {
        throw ProtocolError("A2 already awaited");
    }
    const Nonce16 r = fresh_nonce();
    const Counter256 c = channel_.take_send(crypto_);

    BitString clear;
    clear.append_uint(kAuthReq, kAuthReqBits);
    clear.append_uint(r.value, kNonceBits);
    auto out = detail::seal(crypto_, controller_id_, MessageKind::A1, controller_mid(c), std::nullopt, &key_, clear, c);

    const SessionMaterial fresh = crypto_.derive_session(seed_, r);
    pending_ = PendingAuth{r, fresh.key, CounterChannel(fresh.counter, id_, config_.resync_window, crypto_), now};
    last_activity_ = now;
    return out;
}

Outgoing Device::request_d2d(DeviceId target, Tick now)
{
    if (!otp_) {
        throw ProtocolError("not authenticated");
    }
    if (outstanding_) {
        throw ProtocolError("a D2D request is already outstanding");
    }
    if (target == id_ || target == controller_id_) {
        throw ProtocolError("invalid D2D target");
    }
    const Counter256 c = channel_.take_send(crypto_);
    const Digest256 pob = detail::proof_of_belonging(crypto_, c, *otp_);
    const BitString clear = BitString::from_uint(target.value, kIdentityBits) ^ detail::identity_mask(crypto_, c);
    auto out = detail::seal(crypto_, controller_id_, MessageKind::C1, controller_mid(c), pob, &key_, clear, c);
    outstanding_ = OutstandingRequest{target, now};
    last_activity_ = now;
    return out;
}

Outgoing Device::d2d_send(DeviceId peer, const BitString& payload, bool expect_response, Tick now)
{
    const auto it = peers_.find(peer);
    if (it == peers_.end()) {
        throw ProtocolError("no session with peer");
    }
    if (payload.empty() || payload.size() > wire::kMaxClearBits) {
        throw ProtocolError("payload size out of range");
    }
    PeerSession& s = it->second;
    const Counter256 c = s.channel.take_send(crypto_);
    auto out = detail::seal(crypto_, peer, MessageKind::Data, crypto_.masked_identity(c, peer), std::nullopt, &s.d2d_key,
                            payload, c);
    if (expect_response && !s.awaiting_response_since) {
        s.awaiting_response_since = now;
    }
    last_activity_ = now;
    return out;
}

ReceiveResult Device::receive(const BitString& frame, Tick now)
{
    const auto decoded = wire::decode(frame);
    if (!decoded) {
        return ReceiveResult::parse_error();
    }
    const wire::ProtocolMessage& m = *decoded.message;

    if (pending_) {
        if (const auto c = pending_->channel.match(m.receiver_mid)) {
            return on_a2(m, *c, now);
        }
    }
    if (const auto c = channel_.match(m.receiver_mid)) {
        return on_controller_frame(m, *c, now);
    }
    for (auto& [peer_id, s] : peers_) {
        if (const auto c = s.channel.match(m.receiver_mid)) {
            return on_peer_frame(s, m, *c, now);
        }
    }
    return ReceiveResult::discard(DiscardReason::UnknownMid);
}

ReceiveResult Device::on_a2(const wire::ProtocolMessage& m, const Counter256& c, Tick now)
{
    if (!detail::verify_mac(crypto_, m, c)) {
        return ReceiveResult::discard(DiscardReason::MacMismatch);
    }
    if (m.kind != MessageKind::A2 || m.clear_len != kA2ClearBits) {
        return ReceiveResult::discard(DiscardReason::UnexpectedKind);
    }
    const BitString clear = crypto_.decrypt(pending_->key, m.cipher, m.clear_len);

    PendingAuth done = std::move(*pending_);
    pending_.reset();
    done.channel.accept(c, crypto_);
    channel_ = std::move(done.channel);
    key_ = done.key;
    last_nonce_ = done.nonce;
    otp_ = Nonce16{static_cast<std::uint16_t>(clear.read_uint(0, kNonceBits))};
    // A request made under the previous session can no longer be answered.
    outstanding_.reset();
    last_activity_ = now;

    ReceiveResult res{Verdict::Accepted, DiscardReason::None, {}, {}};
    res.events.emplace_back(event::AuthCompleted{});
    return res;
}

ReceiveResult Device::on_controller_frame(const wire::ProtocolMessage& m, const Counter256& c, Tick now)
{
    if (!detail::verify_mac(crypto_, m, c)) {
        return ReceiveResult::discard(DiscardReason::MacMismatch);
    }
    switch (m.kind) {
    case MessageKind::C2:
        if (m.clear_len != kC2ClearBits) {
            return ReceiveResult::discard(DiscardReason::BadPayload);
        }
        break;
    case MessageKind::C4:
        if (m.clear_len != kC4ClearBits) {
            return ReceiveResult::discard(DiscardReason::BadPayload);
        }
        break;
    case MessageKind::Update:
        if (m.clear_len != kUpdateClearBits) {
            return ReceiveResult::discard(DiscardReason::BadPayload);
        }
        break;
    default:
        return ReceiveResult::discard(DiscardReason::UnexpectedKind);
    }

    ReceiveResult res{Verdict::Accepted, DiscardReason::None, {}, {}};

    if (m.kind == MessageKind::C2) {
        if (!otp_) {
            return ReceiveResult::discard(DiscardReason::NotAuthenticated);
        }
        if (detail::proof_of_controller(crypto_, c, key_, seed_) != *m.proof) {
            return ReceiveResult::discard(DiscardReason::ProofMismatch);
        }
        const BitString clear = crypto_.decrypt(key_, m.cipher, m.clear_len);
        const DeviceId requester{static_cast<std::uint16_t>(clear.read_uint(0, kIdentityBits))};
        const SymKey d2d_key = SymKey::from_bits(clear.slice(kIdentityBits, kKeyBits));
        const Counter256 d2d_counter = Counter256::from_bits(clear.slice(kIdentityBits + kKeyBits, kCounterBits));
        channel_.accept(c, crypto_);

        peers_.erase(requester);
        peers_.emplace(requester, PeerSession{requester, d2d_key, CounterChannel(d2d_counter, id_, config_.resync_window, crypto_),
                                              std::nullopt});

        const Counter256 c3 = channel_.take_send(crypto_);
        const Digest256 pob = detail::proof_of_belonging(crypto_, c3, *otp_);
        res.out.push_back(detail::seal(crypto_, controller_id_, MessageKind::C3, controller_mid(c3), pob, nullptr,
                                       std::nullopt, c3));
        res.events.emplace_back(event::PeerEstablished{requester, false});
    } else if (m.kind == MessageKind::C4) {
        if (!outstanding_) {
            return ReceiveResult::discard(DiscardReason::NoPending);
        }
        const BitString clear = crypto_.decrypt(key_, m.cipher, m.clear_len);
        const SymKey d2d_key = SymKey::from_bits(clear.slice(0, kKeyBits));
        const Counter256 d2d_counter = Counter256::from_bits(clear.slice(kKeyBits, kCounterBits));
        channel_.accept(c, crypto_);

        const DeviceId target = outstanding_->target;
        outstanding_.reset();
        peers_.erase(target);
        peers_.emplace(target,
                       PeerSession{target, d2d_key, CounterChannel(d2d_counter, id_, config_.resync_window, crypto_), std::nullopt});
        res.events.emplace_back(event::PeerEstablished{target, true});
    } else {
        const BitString clear = crypto_.decrypt(key_, m.cipher, m.clear_len);
        const auto op = clear.read_uint(0, 8);
        const DeviceId subject{static_cast<std::uint16_t>(clear.read_uint(8, kIdentityBits))};
        channel_.accept(c, crypto_);
        switch (static_cast<UpdateOp>(op)) {
        case UpdateOp::Join:
            roster_.insert(subject);
            res.events.emplace_back(event::MemberJoined{subject});
            break;
        case UpdateOp::Leave:
            roster_.erase(subject);
            peers_.erase(subject);
            if (outstanding_ && outstanding_->target == subject) {
                outstanding_.reset();
                res.events.emplace_back(event::RequestRefused{subject});
            }
            res.events.emplace_back(event::MemberLeft{subject});
            break;
        case UpdateOp::Refused:
            if (outstanding_ && outstanding_->target == subject) {
                outstanding_.reset();
                res.events.emplace_back(event::RequestRefused{subject});
            }
            break;
        default:
            // Authentic but unknown opcode: the counter is consumed, nothing else changes.
            break;
        }
    }
    last_activity_ = now;
    return res;
}

ReceiveResult Device::on_peer_frame(PeerSession& s, const wire::ProtocolMessage& m, const Counter256& c, Tick now)
{
    if (!detail::verify_mac(crypto_, m, c)) {
        return ReceiveResult::discard(DiscardReason::MacMismatch);
    }
    if (m.kind != MessageKind::Data) {
        return ReceiveResult::discard(DiscardReason::UnexpectedKind);
    }
    BitString payload = crypto_.decrypt(s.d2d_key, m.cipher, m.clear_len);
    s.channel.accept(c, crypto_);
    s.awaiting_response_since.reset();
    last_activity_ = now;

    ReceiveResult res{Verdict::Accepted, DiscardReason::None, {}, {}};
    res.events.emplace_back(event::DataReceived{s.peer, std::move(payload)});
    return res;
}

std::vector<NodeEvent> Device::tick(Tick now)
{
    std::vector<NodeEvent> events;
    if (pending_ && now - pending_->sent_at >= config_.response_timeout) {
        pending_.reset();
        events.emplace_back(event::AuthAborted{});
    }
    if (outstanding_ && now - outstanding_->sent_at >= config_.response_timeout) {
        events.emplace_back(event::RequestAborted{outstanding_->target});
        outstanding_.reset();
    }
    for (auto it = peers_.begin(); it != peers_.end();) {
        const auto& since = it->second.awaiting_response_since;
        if (since && now - *since >= config_.response_timeout) {
            events.emplace_back(event::SessionAborted{it->first});
            it = peers_.erase(it);
        } else {
            ++it;
        }
    }
    if (otp_ && !pending_ && now - last_activity_ >= config_.dormancy_threshold) {
        otp_.reset();
        outstanding_.reset();
        peers_.clear();
        events.emplace_back(event::Expired{});
    }
    return events;
}

Device::State Device::export_state() const
{
    State s;
    s.id = id_;
    s.controller_id = controller_id_;
    s.seed = seed_;
    s.key = key_;
    s.channel = channel_state(channel_);
    s.last_nonce = last_nonce_;
    s.otp = otp_;
    if (pending_) {
        s.pending = State::Pending{pending_->nonce, pending_->key, channel_state(pending_->channel), pending_->sent_at};
    }
    s.outstanding = outstanding_;
    for (const auto& [id, p] : peers_) {
        s.peers.push_back({id, p.d2d_key, channel_state(p.channel), p.awaiting_response_since});
    }
    s.roster = roster_;
    s.last_activity = last_activity_;
    s.rng_state = crypto_.rng_state();
    s.ops = crypto_.ops();
    return s;
}

Device Device::import_state(const State& s, const ProtocolConfig& config)
{
    return Device(s, config);
}

Device::Device(const State& s, const ProtocolConfig& config)
    : id_(s.id),
      controller_id_(s.controller_id),
      config_(config),
      crypto_(0),
      seed_(s.seed),
      key_(s.key),
      channel_(restore_channel(s.channel, s.id, config.resync_window, crypto_)),
      last_nonce_(s.last_nonce),
      otp_(s.otp),
      outstanding_(s.outstanding),
      roster_(s.roster),
      last_activity_(s.last_activity)
{
    if (s.pending) {
        pending_ = PendingAuth{s.pending->nonce, s.pending->key,
                               restore_channel(s.pending->channel, id_, config.resync_window, crypto_),
                               s.pending->sent_at};
    }
    for (const auto& p : s.peers) {
        peers_.emplace(p.peer, PeerSession{p.peer, p.d2d_key, restore_channel(p.channel, id_, config.resync_window, crypto_),
                                           p.awaiting_response_since});
    }
    // Window precomputation above is not protocol work; restore the recorded counters.
    crypto_.set_rng_state(s.rng_state);
    crypto_.set_ops(s.ops);
}

} // namespace homeauth
