#include "homeauth/predicates.hpp"
#include "homeauth/snapshot.hpp"
#include "homeauth/trace_io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace homeauth;
using namespace homeauth::sim;

namespace {

Scenario pair_scenario()
{
    Scenario sc;
    sc.name = "io";
    sc.devices = {{"N1", DeviceId{0x0101}}, {"N2", DeviceId{0x0202}}};
    sc.exchanges = {{"N1", "N2", 6}};
    sc.adversary = {adv::Block{{wire::MessageKind::Data, std::nullopt, std::nullopt, 2}}};
    return sc;
}

} // namespace

TEST_CASE("trace write and read round trip")
{
    const auto r = run(pair_scenario(), 3);
    std::ostringstream out;
    write_trace(out, r.trace);
    std::istringstream in(out.str());
    const auto back = read_trace(in);
    CHECK(back.scenario == "io");
    CHECK(back.seed == 3);
    CHECK(back.nodes == r.trace.nodes);
    REQUIRE(back.events.size() == r.trace.events.size());
    for (std::size_t i = 0; i < back.events.size(); ++i) {
        const auto& a = r.trace.events[i];
        const auto& b = back.events[i];
        CHECK(a.frame == b.frame);
        CHECK(a.disposition == b.disposition);
        CHECK(a.verdict == b.verdict);
        CHECK(a.reason == b.reason);
        CHECK(a.receiver_ops == b.receiver_ops);
        CHECK(a.source_event == b.source_event);
    }
    std::ostringstream again;
    write_trace(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("malformed trace lines report their line number")
{
    std::istringstream bad("{\"type\":\"header\",\"format\":\"homeauth-trace\",\"version\":1,\"scenario\":\"x\","
                           "\"seed\":1,\"nodes\":{}}\nnot json\n");
    try {
        read_trace(bad);
        FAIL("expected an error");
    } catch (const TraceFormatError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream empty("");
    CHECK_THROWS_AS(read_trace(empty), TraceFormatError);
}

TEST_CASE("snapshot restores nodes that behave identically")
{
    const auto r = run(pair_scenario(), 4);
    const auto snap = take_snapshot(r.controller, r.devices);
    const auto text = snapshot_to_json(snap).dump();
    auto nodes = restore(snapshot_from_json(nlohmann::json::parse(text)));
    CHECK(snapshot_to_json(take_snapshot(nodes.controller, nodes.devices)).dump() == text);

    auto original = r.devices;
    auto& a = original.at("N1");
    auto& b = nodes.devices.at("N1");
    const auto fa = a.request_d2d(DeviceId{0x0202}, r.end_tick);
    const auto fb = b.request_d2d(DeviceId{0x0202}, r.end_tick);
    CHECK(fa.frame == fb.frame);
    auto ctl = r.controller;
    const auto ra = ctl.receive(fa.frame, r.end_tick);
    const auto rb = nodes.controller.receive(fb.frame, r.end_tick);
    CHECK(ra.verdict == Verdict::Accepted);
    REQUIRE(ra.out.size() == rb.out.size());
    CHECK(ra.out[0].frame == rb.out[0].frame);
}
