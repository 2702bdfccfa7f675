#pragma once

#include "homeauth/channel.hpp"
#include "homeauth/protocol.hpp"

#include <map>
#include <optional>
#include <set>

namespace homeauth {

/// Plain counter position of a channel, for snapshots and assertions.
struct ChannelState {
    Counter256 start;
    Counter256 next;
    Counter256 floor;
};

ChannelState channel_state(const CounterChannel& ch);
CounterChannel restore_channel(const ChannelState& s, DeviceId inbound, std::uint32_t window, CryptoSuite& crypto);

/// Per-peer D2D state: peer id, shared counter, shared key.
struct PeerSession {
    DeviceId peer;
    SymKey d2d_key;
    CounterChannel channel;
    std::optional<Tick> awaiting_response_since;
};

/// End device.
class Device {
public:
    enum class AuthState { Unauthenticated, AwaitingA2, Authenticated };

    struct PendingAuth {
        Nonce16 nonce;
        SymKey key;
        CounterChannel channel;
        Tick sent_at;
    };

    struct OutstandingRequest {
        DeviceId target;
        Tick sent_at;
    };

    Device(DeviceId controller_id, const Provisioning& prov, const ProtocolConfig& config, std::uint64_t seed);

    DeviceId id() const { return id_; }
    DeviceId controller_id() const { return controller_id_; }
    AuthState auth_state() const;
    bool authenticated() const { return otp_.has_value(); }

    /// Step A1. Throws ProtocolError if an A2 is already awaited.
    Outgoing begin_auth(Tick now);

    /// Step C1. Requires an authenticated session and no outstanding request.
    Outgoing request_d2d(DeviceId target, Tick now);

    /// DATA (C5 and later) on an established peer session.
    Outgoing d2d_send(DeviceId peer, const BitString& payload, bool expect_response, Tick now);

    ReceiveResult receive(const BitString& frame, Tick now);

    /// Timeouts and dormancy expiry.
    std::vector<NodeEvent> tick(Tick now);

    const CounterChannel& controller_channel() const { return channel_; }
    const SymKey& session_key() const { return key_; }
    SecretSeed seed() const { return seed_; }
    std::optional<Nonce16> last_nonce() const { return last_nonce_; }
    std::optional<Nonce16> otp() const { return otp_; }
    const std::optional<PendingAuth>& pending_auth() const { return pending_; }
    const std::optional<OutstandingRequest>& outstanding_request() const { return outstanding_; }
    const std::map<DeviceId, PeerSession>& peers() const { return peers_; }
    const PeerSession* peer(DeviceId id) const;
    const std::set<DeviceId>& roster() const { return roster_; }
    Tick last_activity() const { return last_activity_; }

    void set_roster(std::set<DeviceId> ids) { roster_ = std::move(ids); }

    /// Device-side storage in bits: controller record plus one entry per peer.
    std::size_t storage_bits() const;

    CryptoSuite& crypto() { return crypto_; }
    const CryptoSuite& crypto() const { return crypto_; }
    const ProtocolConfig& config() const { return config_; }

    /// Full state, for snapshots.
    struct State {
        DeviceId id;
        DeviceId controller_id;
        SecretSeed seed;
        SymKey key;
        ChannelState channel;
        std::optional<Nonce16> last_nonce;
        std::optional<Nonce16> otp;
        struct Pending {
            Nonce16 nonce;
            SymKey key;
            ChannelState channel;
            Tick sent_at;
        };
        std::optional<Pending> pending;
        std::optional<OutstandingRequest> outstanding;
        struct Peer {
            DeviceId peer;
            SymKey d2d_key;
            ChannelState channel;
            std::optional<Tick> awaiting_response_since;
        };
        std::vector<Peer> peers;
        std::set<DeviceId> roster;
        Tick last_activity = 0;
        std::string rng_state;
        OpCounters ops;
    };

    State export_state() const;
    static Device import_state(const State& s, const ProtocolConfig& config);

private:
    Device(const State& s, const ProtocolConfig& config);

    ReceiveResult on_a2(const wire::ProtocolMessage& m, const Counter256& c, Tick now);
    ReceiveResult on_controller_frame(const wire::ProtocolMessage& m, const Counter256& c, Tick now);
    ReceiveResult on_peer_frame(PeerSession& s, const wire::ProtocolMessage& m, const Counter256& c, Tick now);

    Digest256 controller_mid(const Counter256& c) { return crypto_.masked_identity(c, controller_id_); }
    Nonce16 fresh_nonce();

    DeviceId id_;
    DeviceId controller_id_;
    ProtocolConfig config_;
    CryptoSuite crypto_;
    SecretSeed seed_;
    SymKey key_;
    CounterChannel channel_;
    std::optional<Nonce16> last_nonce_;
    std::optional<Nonce16> otp_;
    std::optional<PendingAuth> pending_;
    std::optional<OutstandingRequest> outstanding_;
    std::map<DeviceId, PeerSession> peers_;
    std::set<DeviceId> roster_;
    Tick last_activity_ = 0;
};

} // namespace homeauth
