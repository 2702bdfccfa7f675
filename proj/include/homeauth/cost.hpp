#pragma once

#include "homeauth/crypto.hpp"
#include "homeauth/sim.hpp"
#include "homeauth/wire.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace homeauth::cost {

using Nanos = std::chrono::nanoseconds;

struct TimingParams {
    Nanos hash_time{460};
    Nanos enc_time{800};
    Nanos dec_time{800};
    Nanos pubdec_time{114000};
};

/// Throws std::invalid_argument unless every duration is strictly positive.
void validate(const TimingParams& p);

struct OpProfile {
    std::uint64_t hashes = 0;
    std::uint64_t enc_dec_pairs = 0;
    std::uint64_t pubdec = 0;
};

/// hashes*hash_time + pairs*(enc_time+dec_time) + pubdec*pubdec_time, in exact integer nanoseconds.
Nanos compute_time(const OpProfile& profile, const TimingParams& params = {});

enum class Scheme { Proposed, BaselineA, BaselineB };
std::string_view scheme_name(Scheme s);
std::string_view scheme_description(Scheme s);

enum class StorageRole { DeviceToController, DevicePerPeer, ControllerPerDevice };
std::string_view role_name(StorageRole r);
std::optional<StorageRole> role_from_name(std::string_view name);

struct StorageTriple {
    std::uint64_t device_controller = 0;
    std::uint64_t device_peer = 0;
    std::uint64_t controller_device = 0;

    std::uint64_t get(StorageRole r) const;
    friend bool operator==(const StorageTriple&, const StorageTriple&) = default;
};

/// Figures as published for each scheme. Absent fields were not published.
struct Published {
    std::optional<Nanos> time;
    /// Rounding step of the published time figure (e.g. 10 ns for "24.28 us").
    Nanos time_resolution{10};
    std::optional<std::uint64_t> comm_bits;
    std::optional<double> comm_kbytes_min;
    StorageTriple storage;
};

struct SchemeProfile {
    Scheme scheme;
    /// Operation counts; absent when the scheme is only known by its total.
    std::optional<OpProfile> ops;
    Published published;
};

const SchemeProfile& profile(Scheme s);

/// Storage bits per role. For the proposed scheme this is the field sum of
/// the stored values; the baselines are stored as published.
std::uint64_t compute_storage_bits(StorageRole role, Scheme scheme);

struct StepBits {
    std::string step;
    wire::MessageKind kind;
    std::size_t clear_bits;
    std::size_t bits;
};

struct CommReport {
    std::vector<StepBits> steps;
    std::uint64_t computed_bits = 0;
    std::uint64_t published_bits = 0;
    std::int64_t delta_bits = 0;
    double relative_delta = 0.0;
};

/// Field sums for the seven steps (A1..C5), via wire::payload_bits.
CommReport compute_comm_bits(std::size_t payload_bits = 128);

/// bits / 8 / 1024.
double kbytes(std::uint64_t bits);

/// Time ratio other/base as an exact fraction converted once to double.
double time_ratio(Nanos other, Nanos base);

/// Decimal microseconds with `decimals` places, rounded half up.
std::string format_micros(Nanos t, int decimals);

struct CrossCheck {
    OpCounters measured_ops;
    std::uint64_t measured_enc_dec_pairs = 0;
    OpProfile analytic;
    std::uint64_t measured_bits = 0;
    std::uint64_t field_sum_bits = 0;
    std::size_t frames = 0;
    std::map<std::string, std::pair<std::size_t, std::uint64_t>> by_kind; // kind -> (frames, bits)
};

/// Measured ops and on-wire bits (honest, delivered frames, header excluded)
/// beside the analytic proposed profile.
CrossCheck crosscheck_with_simulation(const sim::Trace& trace, const OpCounters& total_ops);

void write_text_tables(std::ostream& os, const TimingParams& params = {});
void write_csv(std::ostream& os, const TimingParams& params = {});
void write_crosscheck(std::ostream& os, const CrossCheck& c);

} // namespace homeauth::cost
