#pragma once

#include "homeauth/bits.hpp"
#include "homeauth/crypto.hpp"
#include "homeauth/types.hpp"
#include "homeauth/wire.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

namespace homeauth {

struct ProtocolConfig {
    Tick dormancy_threshold = 300;
    Tick response_timeout = 10;
    /// Look-ahead/behind on every counter channel; 0 means exact-match only.
    std::uint32_t resync_window = 4;
};

/// 2-bit authentication request marker carried in A1.
inline constexpr std::uint64_t kAuthReq = 0b10;
inline constexpr std::size_t kAuthReqBits = 2;

/// Clear lengths fixed by the message formats.
inline constexpr std::size_t kA1ClearBits = kAuthReqBits + kNonceBits;                       // 18
inline constexpr std::size_t kA2ClearBits = kNonceBits;                                      // 16
inline constexpr std::size_t kC1ClearBits = kIdentityBits;                                   // 16
inline constexpr std::size_t kC2ClearBits = kIdentityBits + kKeyBits + kCounterBits;         // 528
inline constexpr std::size_t kC4ClearBits = kKeyBits + kCounterBits;                         // 512
inline constexpr std::size_t kUpdateClearBits = 8 + kIdentityBits;                           // 24

/// Device-side stored state: controller id, counter, key, seed, nonce, OTP.
inline constexpr std::size_t kDeviceControllerStorageBits =
    kIdentityBits + kCounterBits + kKeyBits + kSeedBits + kNonceBits + kNonceBits;
/// Per active peer: peer id, D2D counter, D2D key.
inline constexpr std::size_t kDevicePeerStorageBits = kIdentityBits + kCounterBits + kKeyBits;
/// Controller per device: device id, counter, key, seed, nonce, OTP.
inline constexpr std::size_t kControllerPerDeviceStorageBits =
    kIdentityBits + kCounterBits + kKeyBits + kSeedBits + kNonceBits + kNonceBits;

enum class UpdateOp : std::uint8_t {
    Join = 1,
    Leave = 2,
    Refused = 3, // requested peer unavailable
};

/// What the system administrator installs on both sides at registration.
struct Provisioning {
    DeviceId id;
    SecretSeed seed;
    Counter256 initial_counter;
    SymKey initial_key;
};

enum class Verdict { Accepted, Discarded, ParseError };

enum class DiscardReason {
    None,
    Parse,
    UnknownMid,
    UnexpectedKind,
    MacMismatch,
    ProofMismatch,
    NotAuthenticated,
    NoPending,
    BadPayload,
};

std::string_view verdict_name(Verdict v);
std::string_view reason_name(DiscardReason r);

/// A frame a node wants transmitted. `clear` is the plaintext that went into
/// the cipher field; it never leaves the simulator.
struct Outgoing {
    DeviceId to;
    wire::MessageKind kind;
    BitString frame;
    std::optional<BitString> clear;
};

namespace event {
struct AuthCompleted {};
struct AuthAborted {};
struct Expired {};
struct PeerEstablished {
    DeviceId peer;
    bool initiator;
};
struct RequestAborted {
    DeviceId target;
};
struct RequestRefused {
    DeviceId target;
};
struct SessionAborted {
    DeviceId peer;
};
struct DataReceived {
    DeviceId peer;
    BitString payload;
};
struct MemberJoined {
    DeviceId id;
};
struct MemberLeft {
    DeviceId id;
};
struct PendingExpired {
    DeviceId requester;
    DeviceId target;
};
} // namespace event

using NodeEvent = std::variant<event::AuthCompleted, event::AuthAborted, event::Expired, event::PeerEstablished,
                               event::RequestAborted, event::RequestRefused, event::SessionAborted,
                               event::DataReceived, event::MemberJoined, event::MemberLeft, event::PendingExpired>;

struct ReceiveResult {
    Verdict verdict = Verdict::Discarded;
    DiscardReason reason = DiscardReason::None;
    std::vector<Outgoing> out;
    std::vector<NodeEvent> events;

    static ReceiveResult discard(DiscardReason r) { return {Verdict::Discarded, r, {}, {}}; }
    static ReceiveResult parse_error() { return {Verdict::ParseError, DiscardReason::Parse, {}, {}}; }
};

/// Local precondition violations (nothing is transmitted).
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {

/// Assembles, MACs and encodes one frame. Encrypts `clear` under `key` when present.
Outgoing seal(CryptoSuite& crypto, DeviceId to, wire::MessageKind kind, const Digest256& receiver_mid,
              const std::optional<Digest256>& proof, const SymKey* key, const std::optional<BitString>& clear,
              const Counter256& mac_key);

bool verify_mac(CryptoSuite& crypto, const wire::ProtocolMessage& m, const Counter256& mac_key);

/// Proof of belonging: hash(counter || OTP).
Digest256 proof_of_belonging(CryptoSuite& crypto, const Counter256& cc, Nonce16 otp);
/// Proof of controller: hash(counter || session key || seed).
Digest256 proof_of_controller(CryptoSuite& crypto, const Counter256& counter, const SymKey& key, SecretSeed seed);

/// Last 16 bits of hash(counter), used to mask the target identity in C1.
BitString identity_mask(CryptoSuite& crypto, const Counter256& cc);

BitString update_clear(UpdateOp op, DeviceId subject);

} // namespace detail

} // namespace homeauth
