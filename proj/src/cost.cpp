#include "homeauth/cost.hpp"

#include "homeauth/protocol.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace homeauth::cost {

using wire::MessageKind;

void validate(const TimingParams& p)
{
    if (p.hash_time.count() <= 0 || p.enc_time.count() <= 0 || p.dec_time.count() <= 0 || p.pubdec_time.count() <= 0) {
        throw std::invalid_argument("timing parameters must be strictly positive");
    }
}

Nanos compute_time(const OpProfile& profile, const TimingParams& params)
{
    validate(params);
    const auto n = [](std::uint64_t v) { return static_cast<Nanos::rep>(v); };
    return params.hash_time * n(profile.hashes) + (params.enc_time + params.dec_time) * n(profile.enc_dec_pairs) +
           params.pubdec_time * n(profile.pubdec);
}

std::string_view scheme_name(Scheme s)
{
    switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::BaselineA: return "baseline-A";
    case Scheme::BaselineB: return "baseline-B";
    }
    return "?";
}

std::string_view scheme_description(Scheme s)
{
    switch (s) {
    case Scheme::Proposed: return "counter-masked symmetric scheme (this library)";
    case Scheme::BaselineA: return "counter/nonce smart-home scheme";
    case Scheme::BaselineB: return "ECC access-control scheme";
    }
    return "?";
}

std::string_view role_name(StorageRole r)
{
    switch (r) {
    case StorageRole::DeviceToController: return "device-to-controller";
    case StorageRole::DevicePerPeer: return "device-per-peer";
    case StorageRole::ControllerPerDevice: return "controller-per-device";
    }
    return "?";
}

std::optional<StorageRole> role_from_name(std::string_view name)
{
    for (auto r : {StorageRole::DeviceToController, StorageRole::DevicePerPeer, StorageRole::ControllerPerDevice}) {
        if (role_name(r) == name) {
            return r;
        }
    }
    return std::nullopt;
}

std::uint64_t StorageTriple::get(StorageRole r) const
{
    switch (r) {
    case StorageRole::DeviceToController: return device_controller;
    case StorageRole::DevicePerPeer: return device_peer;
    case StorageRole::ControllerPerDevice: return controller_device;
    }
    throw std::invalid_argument("unknown storage role");
}

const SchemeProfile& profile(Scheme s)
{
    using namespace std::chrono_literals;
    static const SchemeProfile proposed{
        Scheme::Proposed, OpProfile{18, 10, 0}, Published{Nanos{24280}, 10ns, 6272, std::nullopt, {576, 528, 576}}};
    static const SchemeProfile baseline_a{
        Scheme::BaselineA, OpProfile{12, 12, 1}, Published{Nanos{138700}, 100ns, 8032, std::nullopt, {816, 528, 800}}};
    static const SchemeProfile baseline_b{
        Scheme::BaselineB, std::nullopt, Published{78ms, 1ms, std::nullopt, 1.28, {1792, 1280, 1536}}};
    switch (s) {
    case Scheme::Proposed: return proposed;
    case Scheme::BaselineA: return baseline_a;
    case Scheme::BaselineB: return baseline_b;
    }
    throw std::invalid_argument("unknown scheme");
}

std::uint64_t compute_storage_bits(StorageRole role, Scheme scheme)
{
    if (scheme == Scheme::Proposed) {
        switch (role) {
        case StorageRole::DeviceToController: return kDeviceControllerStorageBits;
        case StorageRole::DevicePerPeer: return kDevicePeerStorageBits;
        case StorageRole::ControllerPerDevice: return kControllerPerDeviceStorageBits;
        }
        throw std::invalid_argument("unknown storage role");
    }
    return profile(scheme).published.storage.get(role);
}

CommReport compute_comm_bits(std::size_t payload_bits)
{
    CommReport r;
    const std::vector<std::tuple<std::string, MessageKind, std::size_t>> steps{
        {"A1", MessageKind::A1, kA1ClearBits}, {"A2", MessageKind::A2, kA2ClearBits},
        {"C1", MessageKind::C1, kC1ClearBits}, {"C2", MessageKind::C2, kC2ClearBits},
        {"C3", MessageKind::C3, 0},            {"C4", MessageKind::C4, kC4ClearBits},
        {"C5", MessageKind::Data, payload_bits},
    };
    for (const auto& [name, kind, clear] : steps) {
        const std::size_t bits = wire::payload_bits(kind, clear);
        r.steps.push_back({name, kind, clear, bits});
        r.computed_bits += bits;
    }
    r.published_bits = *profile(Scheme::Proposed).published.comm_bits;
    r.delta_bits = static_cast<std::int64_t>(r.computed_bits) - static_cast<std::int64_t>(r.published_bits);
    r.relative_delta = static_cast<double>(r.delta_bits) / static_cast<double>(r.published_bits);
    return r;
}

double kbytes(std::uint64_t bits)
{
    return static_cast<double>(bits) / 8192.0;
}

double time_ratio(Nanos other, Nanos base)
{
    return static_cast<double>(other.count()) / static_cast<double>(base.count());
}

std::string format_micros(Nanos t, int decimals)
{
    if (decimals < 0 || decimals > 3) {
        throw std::invalid_argument("decimals must be in [0, 3]");
    }
    std::int64_t scale = 1;
    for (int i = 0; i < 3 - decimals; ++i) {
        scale *= 10;
    }
    const std::int64_t units = (t.count() + scale / 2) / scale; // in 10^-decimals us
    std::int64_t div = 1;
    for (int i = 0; i < decimals; ++i) {
        div *= 10;
    }
    std::ostringstream os;
    os << units / div;
    if (decimals > 0) {
        os << '.' << std::setw(decimals) << std::setfill('0') << units % div;
    }
    return os.str();
}

CrossCheck crosscheck_with_simulation(const sim::Trace& trace, const OpCounters& total_ops)
{
    CrossCheck c;
    c.measured_ops = total_ops;
    c.measured_enc_dec_pairs = std::min(total_ops.encryptions, total_ops.decryptions);
    c.analytic = *profile(Scheme::Proposed).ops;
    for (const auto& e : trace.events) {
        if (!e.honest || e.disposition != sim::Disposition::Delivered) {
            continue;
        }
        const auto d = wire::decode(e.frame);
        if (!d) {
            continue;
        }
        const std::uint64_t bits = e.frame.size() - wire::kHeaderBits;
        ++c.frames;
        c.measured_bits += bits;
        c.field_sum_bits += wire::payload_bits(d.message->kind, d.message->clear_len);
        auto& slot = c.by_kind[std::string(wire::kind_name(d.message->kind))];
        ++slot.first;
        slot.second += bits;
    }
    return c;
}

namespace {

struct Row {
    std::string scheme;
    std::string metric;
    std::string published;
    std::string computed;
    std::string delta;
};

std::string fixed(double v, int places)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(places) << v;
    return os.str();
}

std::vector<Row> rows(const TimingParams& params)
{
    std::vector<Row> out;
    const auto& pp = profile(Scheme::Proposed);
    const auto& pa = profile(Scheme::BaselineA);
    const auto& pb = profile(Scheme::BaselineB);
    const Nanos t = compute_time(*pp.ops, params);
    const Nanos ta = compute_time(*pa.ops, params);

    auto us = [](Nanos v) { return format_micros(v, 3); };
    auto delta_us = [](Nanos a, Nanos b) { return format_micros(a - b, 3); };

    out.push_back({"proposed", "time_us", us(*pp.published.time), us(t), delta_us(t, *pp.published.time)});
    out.push_back({"baseline-A", "time_us", us(*pa.published.time), us(ta), delta_us(ta, *pa.published.time)});
    out.push_back({"baseline-B", "time_us", us(*pb.published.time), "", ""});
    out.push_back({"baseline-A", "time_ratio", "5.71", fixed(time_ratio(ta, t), 3),
                   fixed(time_ratio(ta, t) - 5.71, 3)});
    out.push_back({"baseline-B", "time_ratio", "3212", fixed(time_ratio(*pb.published.time, t), 3),
                   fixed(time_ratio(*pb.published.time, t) - 3212.0, 3)});

    const CommReport comm = compute_comm_bits(128);
    for (const auto& s : comm.steps) {
        out.push_back({"proposed", "comm_bits_" + s.step, "", std::to_string(s.bits), ""});
    }
    out.push_back({"proposed", "comm_bits", std::to_string(comm.published_bits), std::to_string(comm.computed_bits),
                   std::to_string(comm.delta_bits)});
    out.push_back({"proposed", "comm_kbytes", fixed(kbytes(comm.published_bits), 4),
                   fixed(kbytes(comm.computed_bits), 4),
                   fixed(kbytes(comm.computed_bits) - kbytes(comm.published_bits), 4)});
    out.push_back({"baseline-A", "comm_bits", std::to_string(*pa.published.comm_bits), "", ""});
    out.push_back({"baseline-A", "comm_kbytes", fixed(kbytes(*pa.published.comm_bits), 4), "", ""});
    out.push_back({"baseline-B", "comm_kbytes_min", fixed(*pb.published.comm_kbytes_min, 2), "", ""});

    for (auto scheme : {Scheme::Proposed, Scheme::BaselineA, Scheme::BaselineB}) {
        for (auto role : {StorageRole::DeviceToController, StorageRole::DevicePerPeer,
                          StorageRole::ControllerPerDevice}) {
            const std::uint64_t pub = profile(scheme).published.storage.get(role);
            const std::uint64_t got = compute_storage_bits(role, scheme);
            out.push_back({std::string(scheme_name(scheme)), "storage_bits_" + std::string(role_name(role)),
                           std::to_string(pub), std::to_string(got),
                           std::to_string(static_cast<std::int64_t>(got) - static_cast<std::int64_t>(pub))});
        }
    }
    return out;
}

} // namespace

void write_csv(std::ostream& os, const TimingParams& params)
{
    os << "scheme,metric,published,computed,delta\n";
    for (const auto& r : rows(params)) {
        os << r.scheme << ',' << r.metric << ',' << r.published << ',' << r.computed << ',' << r.delta << '\n';
    }
}

void write_text_tables(std::ostream& os, const TimingParams& params)
{
    const auto& pp = profile(Scheme::Proposed);
    const auto& pa = profile(Scheme::BaselineA);
    const auto& pb = profile(Scheme::BaselineB);
    const Nanos t = compute_time(*pp.ops, params);
    const Nanos ta = compute_time(*pa.ops, params);

    os << "Schemes\n";
    for (auto s : {Scheme::Proposed, Scheme::BaselineA, Scheme::BaselineB}) {
        os << "  " << std::left << std::setw(12) << scheme_name(s) << scheme_description(s) << '\n';
    }

    os << "\nComputation time (hash=" << params.hash_time.count() << "ns, enc=" << params.enc_time.count()
       << "ns, dec=" << params.dec_time.count() << "ns, public-key dec=" << params.pubdec_time.count() << "ns)\n";
    os << "  " << std::left << std::setw(12) << "scheme" << std::setw(14) << "profile" << std::right << std::setw(14)
       << "computed us" << std::setw(14) << "published us" << std::setw(12) << "x proposed" << '\n';
    os << "  " << std::left << std::setw(12) << "proposed" << std::setw(14) << "18H+10(E+D)" << std::right
       << std::setw(14) << format_micros(t, 2) << std::setw(14) << format_micros(*pp.published.time, 2)
       << std::setw(10) << "1.00" << '\n';
    os << "  " << std::left << std::setw(12) << "baseline-A" << std::setw(14) << "12H+12(E+D)+P" << std::right
       << std::setw(14) << format_micros(ta, 2) << std::setw(14) << format_micros(*pa.published.time, 1)
       << std::setw(10) << fixed(time_ratio(ta, t), 2) << '\n';
    os << "  " << std::left << std::setw(12) << "baseline-B" << std::setw(14) << "published" << std::right
       << std::setw(14) << "-" << std::setw(14) << format_micros(*pb.published.time, 0) << std::setw(10)
       << fixed(time_ratio(*pb.published.time, t), 0) << '\n';
    os << "  baseline-A rounded to 0.1 us: " << format_micros(ta, 1) << " us\n";

    const CommReport comm = compute_comm_bits(128);
    os << "\nCommunication, 128-bit payload (bits, 20-bit frame header excluded)\n";
    for (const auto& s : comm.steps) {
        os << "  " << std::left << std::setw(6) << s.step << std::setw(8) << wire::kind_name(s.kind) << "clear "
           << std::right << std::setw(4) << s.clear_bits << "  ->" << std::setw(6) << s.bits << '\n';
    }
    os << "  proposed    computed " << comm.computed_bits << " (" << fixed(kbytes(comm.computed_bits), 4)
       << " KiB), published " << comm.published_bits << " (" << fixed(kbytes(comm.published_bits), 4)
       << " KiB), delta " << comm.delta_bits << " (" << fixed(100.0 * comm.relative_delta, 2) << "%)\n";
    os << "  baseline-A  published " << *pa.published.comm_bits << " (" << fixed(kbytes(*pa.published.comm_bits), 2)
       << " KiB) = " << fixed(static_cast<double>(*pa.published.comm_bits) / comm.published_bits, 2) << " x proposed (published)\n";
    os << "  baseline-B  published minimum " << fixed(*pb.published.comm_kbytes_min, 2) << " KiB = "
       << fixed(*pb.published.comm_kbytes_min / kbytes(comm.published_bits), 2) << " x proposed (published)\n";

    os << "\nStorage (bits)\n";
    os << "  " << std::left << std::setw(12) << "scheme" << std::right << std::setw(22) << "device-to-controller"
       << std::setw(18) << "device-per-peer" << std::setw(24) << "controller-per-device" << '\n';
    for (auto s : {Scheme::Proposed, Scheme::BaselineA, Scheme::BaselineB}) {
        os << "  " << std::left << std::setw(12) << scheme_name(s) << std::right << std::setw(22)
           << compute_storage_bits(StorageRole::DeviceToController, s) << std::setw(18)
           << compute_storage_bits(StorageRole::DevicePerPeer, s) << std::setw(24)
           << compute_storage_bits(StorageRole::ControllerPerDevice, s) << '\n';
    }
}

void write_crosscheck(std::ostream& os, const CrossCheck& c)
{
    os << "Measured vs analytic (proposed)\n";
    os << "  hashes        measured " << c.measured_ops.hashes << "  analytic " << c.analytic.hashes << "  delta "
       << static_cast<std::int64_t>(c.measured_ops.hashes) - static_cast<std::int64_t>(c.analytic.hashes) << '\n';
    os << "  enc/dec pairs measured " << c.measured_enc_dec_pairs << " (enc " << c.measured_ops.encryptions
       << ", dec " << c.measured_ops.decryptions << ")  analytic " << c.analytic.enc_dec_pairs << "  delta "
       << static_cast<std::int64_t>(c.measured_enc_dec_pairs) - static_cast<std::int64_t>(c.analytic.enc_dec_pairs)
       << '\n';
    os << "  on-wire bits  measured " << c.measured_bits << " over " << c.frames << " frames, field sum "
       << c.field_sum_bits << '\n';
    for (const auto& [kind, v] : c.by_kind) {
        os << "    " << std::left << std::setw(8) << kind << std::right << std::setw(6) << v.first << " frames"
           << std::setw(10) << v.second << " bits\n";
    }
}

} // namespace homeauth::cost
