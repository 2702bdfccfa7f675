#pragma once

#include "homeauth/channel.hpp"
#include "homeauth/device.hpp"
#include "homeauth/protocol.hpp"

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>

namespace homeauth {

/// Which devices may talk to which. With allow_all set, every pair of
/// registered, active devices is permitted; otherwise only listed pairs.
class AccessControlList {
public:
    void add(DeviceId id);
    void set_active(DeviceId id, bool active);
    bool registered(DeviceId id) const { return members_.count(id) != 0; }
    bool active(DeviceId id) const;

    void allow(DeviceId a, DeviceId b);
    void deny(DeviceId a, DeviceId b);
    void set_allow_all(bool v) { allow_all_ = v; }
    bool allow_all() const { return allow_all_; }

    bool allowed(DeviceId a, DeviceId b) const;

    const std::map<DeviceId, bool>& members() const { return members_; }
    const std::set<std::pair<DeviceId, DeviceId>>& pairs() const { return pairs_; }

private:
    static std::pair<DeviceId, DeviceId> key(DeviceId a, DeviceId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

    std::map<DeviceId, bool> members_;
    std::set<std::pair<DeviceId, DeviceId>> pairs_;
    bool allow_all_ = true;
};

/// Controller-side record for one device.
struct DeviceRecord {
    DeviceId id;
    SecretSeed seed;
    SymKey key;
    CounterChannel channel;
    /// Previous session, kept until the device proves it switched (its A2 may have been lost).
    struct Fallback {
        SymKey key;
        CounterChannel channel;
    };
    std::optional<Fallback> fallback;
    std::optional<Nonce16> last_nonce;
    std::optional<Nonce16> otp;
    bool active = true;
};

/// In-flight C1..C4 establishment.
struct PendingEstablishment {
    DeviceId requester;
    DeviceId target;
    SymKey d2d_key;
    Counter256 d2d_counter;
    Tick created_at;
};

class Controller {
public:
    Controller(DeviceId id, const ProtocolConfig& config, std::uint64_t seed);

    DeviceId id() const { return id_; }

    /// Draws fresh provisioning material for a new device (an administrator step).
    Provisioning provision(DeviceId id);

    /// Installs a device record. Throws ProtocolError on duplicates.
    void register_device(const Provisioning& prov);

    /// register_device plus a Join notice to every other active device.
    std::vector<Outgoing> add_device(const Provisioning& prov);

    /// Deactivates the device and notifies every remaining active device.
    std::vector<Outgoing> remove_device(DeviceId id);

    ReceiveResult receive(const BitString& frame, Tick now);

    /// Expires pending establishments.
    std::vector<NodeEvent> tick(Tick now);

    AccessControlList& acl() { return acl_; }
    const AccessControlList& acl() const { return acl_; }
    const DeviceRecord* record(DeviceId id) const;
    const std::map<DeviceId, DeviceRecord>& records() const { return records_; }
    const std::deque<PendingEstablishment>& pending() const { return pending_; }
    std::vector<DeviceId> active_devices() const;

    std::size_t storage_bits_per_device() const { return kControllerPerDeviceStorageBits; }

    CryptoSuite& crypto() { return crypto_; }
    const CryptoSuite& crypto() const { return crypto_; }
    const ProtocolConfig& config() const { return config_; }

    struct State {
        DeviceId id;
        struct Record {
            DeviceId id;
            SecretSeed seed;
            SymKey key;
            ChannelState channel;
            std::optional<SymKey> fallback_key;
            std::optional<ChannelState> fallback_channel;
            std::optional<Nonce16> last_nonce;
            std::optional<Nonce16> otp;
            bool active = true;
        };
        std::vector<Record> records;
        std::vector<PendingEstablishment> pending;
        bool allow_all = true;
        std::vector<std::pair<DeviceId, DeviceId>> allowed_pairs;
        std::string rng_state;
        OpCounters ops;
    };

    State export_state() const;
    static Controller import_state(const State& s, const ProtocolConfig& config);

private:
    struct IndexEntry {
        DeviceId device;
        bool fallback;
    };

    void reindex(DeviceId id);
    void unindex(DeviceId id);
    Digest256 device_mid(const Counter256& c, DeviceId id) { return crypto_.masked_identity(c, id); }
    Outgoing send_update(DeviceRecord& rec, UpdateOp op, DeviceId subject);
    Nonce16 draw_otp();

    ReceiveResult on_a1(DeviceRecord& rec, bool via_fallback, const wire::ProtocolMessage& m, const Counter256& c,
                        Tick now);
    ReceiveResult on_c1(DeviceRecord& rec, const wire::ProtocolMessage& m, const Counter256& c, Tick now);
    ReceiveResult on_c3(DeviceRecord& rec, const wire::ProtocolMessage& m, const Counter256& c, Tick now);

    DeviceId id_;
    ProtocolConfig config_;
    CryptoSuite crypto_;
    std::map<DeviceId, DeviceRecord> records_;
    AccessControlList acl_;
    std::deque<PendingEstablishment> pending_;
    std::unordered_map<Digest256, IndexEntry> index_;
    std::map<DeviceId, std::vector<Digest256>> indexed_;
};

} // namespace homeauth
