#include "homeauth/trace_io.hpp"

#include <json.hpp>

#include <string>

namespace homeauth::sim {

using nlohmann::json;

TraceFormatError::TraceFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line)
{
}

namespace {

std::optional<Verdict> verdict_from_name(std::string_view s)
{
    for (auto v : {Verdict::Accepted, Verdict::Discarded, Verdict::ParseError}) {
        if (verdict_name(v) == s) {
            return v;
        }
    }
    return std::nullopt;
}

std::optional<DiscardReason> reason_from_name(std::string_view s)
{
    for (auto r : {DiscardReason::None, DiscardReason::Parse, DiscardReason::UnknownMid, DiscardReason::UnexpectedKind,
                   DiscardReason::MacMismatch, DiscardReason::ProofMismatch, DiscardReason::NotAuthenticated,
                   DiscardReason::NoPending, DiscardReason::BadPayload}) {
        if (reason_name(r) == s) {
            return r;
        }
    }
    return std::nullopt;
}

} // namespace

void write_trace(std::ostream& os, const Trace& trace)
{
    json header{{"type", "header"}, {"format", "homeauth-trace"}, {"version", 1}, {"scenario", trace.scenario},
                {"seed", trace.seed}};
    json nodes = json::object();
    for (const auto& [name, id] : trace.nodes) {
        nodes[name] = id.value;
    }
    header["nodes"] = nodes;
    os << header.dump() << '\n';

    for (const auto& e : trace.events) {
        json j{{"type", "event"},
               {"index", e.index},
               {"tick", e.tick},
               {"from", e.from},
               {"to", e.to},
               {"bits", e.frame.size()},
               {"frame", e.frame.to_hex()},
               {"disposition", disposition_name(e.disposition)},
               {"reason", reason_name(e.reason)},
               {"ops", {{"hash", e.receiver_ops.hashes}, {"enc", e.receiver_ops.encryptions},
                        {"dec", e.receiver_ops.decryptions}}},
               {"honest", e.honest}};
        const auto kind = e.kind();
        j["kind"] = kind ? json(wire::kind_name(*kind)) : json(nullptr);
        j["verdict"] = e.verdict ? json(verdict_name(*e.verdict)) : json(nullptr);
        j["source"] = e.source_event ? json(*e.source_event) : json(nullptr);
        os << j.dump() << '\n';
    }
}

Trace read_trace(std::istream& is)
{
    Trace trace;
    std::string line;
    std::size_t n = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        try {
            const json j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (!have_header) {
                if (type != "header" || j.at("format").get<std::string>() != "homeauth-trace") {
                    throw TraceFormatError(n, "missing trace header");
                }
                trace.scenario = j.at("scenario").get<std::string>();
                trace.seed = j.at("seed").get<std::uint64_t>();
                for (const auto& [name, id] : j.at("nodes").items()) {
                    trace.nodes[name] = DeviceId{id.get<std::uint16_t>()};
                }
                have_header = true;
                continue;
            }
            if (type != "event") {
                throw TraceFormatError(n, "unexpected record type '" + type + "'");
            }
            TraceEvent e;
            e.index = j.at("index").get<std::size_t>();
            e.tick = j.at("tick").get<Tick>();
            e.from = j.at("from").get<std::string>();
            e.to = j.at("to").get<std::string>();
            e.frame = BitString::from_hex(j.at("frame").get<std::string>(), j.at("bits").get<std::size_t>());
            const auto d = disposition_from_name(j.at("disposition").get<std::string>());
            if (!d) {
                throw TraceFormatError(n, "bad disposition");
            }
            e.disposition = *d;
            if (!j.at("verdict").is_null()) {
                const auto v = verdict_from_name(j.at("verdict").get<std::string>());
                if (!v) {
                    throw TraceFormatError(n, "bad verdict");
                }
                e.verdict = v;
            }
            const auto r = reason_from_name(j.at("reason").get<std::string>());
            if (!r) {
                throw TraceFormatError(n, "bad reason");
            }
            e.reason = *r;
            const auto& ops = j.at("ops");
            e.receiver_ops = {ops.at("hash").get<std::uint64_t>(), ops.at("enc").get<std::uint64_t>(),
                              ops.at("dec").get<std::uint64_t>()};
            if (!j.at("source").is_null()) {
                e.source_event = j.at("source").get<std::size_t>();
            }
            e.honest = j.at("honest").get<bool>();
            trace.events.push_back(std::move(e));
        } catch (const TraceFormatError&) {
            throw;
        } catch (const std::exception& ex) {
            throw TraceFormatError(n, ex.what());
        }
    }
    if (!have_header) {
        throw TraceFormatError(n, "empty trace file");
    }
    return trace;
}

} // namespace homeauth::sim
