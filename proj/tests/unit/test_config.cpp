#include "homeauth/scenario_config.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace homeauth;
using namespace homeauth::sim;

namespace {

const char* kBase = R"(name: t
devices:
  - {name: N1, id: 0x0101}
  - {name: N2, id: 0x0202}
)";

ConfigError error_of(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a config error");
    return ConfigError(0, "", "");
}

} // namespace

TEST_CASE("minimal scenario parses with defaults")
{
    const auto sc = parse_scenario(kBase);
    CHECK(sc.name == "t");
    REQUIRE(sc.devices.size() == 2);
    CHECK(sc.devices[1].id == DeviceId{0x0202});
    CHECK(sc.predicates == all_predicates());
    CHECK(sc.protocol.resync_window == 4);
}

TEST_CASE("full scenario parses")
{
    const auto sc = parse_scenario(std::string(kBase) + R"(
  - {name: N3, id: 0x0303}
protocol: {dormancy: 100, response_timeout: 7, resync_window: 2}
acl:
  allow_all: false
  pairs: [[N1, N2]]
exchanges:
  - {from: N1, to: N2, messages: 5, payload_bits: 64, start: 3, expect: refused}
admin:
  - {remove: N2, at: 40}
  - {add: N3, at: 50}
adversary:
  - block: {kind: C3, from: N2, occurrence: 1}
  - tamper: {kind: DATA, bit: 30}
  - replay_all: {delay: 2}
  - flood: {to: C, count: 10, per_tick: 5}
  - inject: {at: 4, to: N1, hex: "ff00", bits: 12}
  - insider: N3
predicates: [replay, dos]
tamper_probe: {per_field: 2}
limits: {max_ticks: 999}
)");
    CHECK(sc.protocol.response_timeout == 7);
    CHECK_FALSE(sc.allow_all);
    CHECK(sc.acl_pairs.size() == 1);
    CHECK(sc.exchanges[0].expect == Expectation::Refused);
    CHECK(sc.devices[2].initial == false);
    CHECK(sc.adversary.size() == 6);
    CHECK(std::get<adv::Block>(sc.adversary[0]).match.kind == wire::MessageKind::C3);
    CHECK(std::get<adv::Inject>(sc.adversary[4]).frame.size() == 12);
    CHECK(sc.predicates.size() == 2);
    CHECK(sc.probe->per_field == 2);
    CHECK(sc.max_ticks == 999);
}

TEST_CASE("unregistered device reference is rejected with its line")
{
    const auto e = error_of(std::string(kBase) + "exchanges:\n  - {from: N1, to: N9}\n");
    CHECK(e.line() == 6);
    CHECK(e.field() == "exchanges[0].to");
}

TEST_CASE("duplicate ids and names are rejected")
{
    CHECK(error_of("devices:\n  - {name: N1, id: 1}\n  - {name: N2, id: 1}\n").field() == "devices[1].id");
    CHECK(error_of("devices:\n  - {name: N1, id: 1}\n  - {name: N1, id: 2}\n").field() == "devices[1].name");
    CHECK(error_of("devices:\n  - {name: C, id: 1}\n").field() == "devices[0].name");
    CHECK(error_of("devices:\n  - {name: N1, id: 0xC000}\n").field() == "devices[0].id");
}

TEST_CASE("malformed values are rejected")
{
    CHECK(error_of(std::string(kBase) + "bogus: 1\n").field() == "root.bogus");
    CHECK(error_of("devices:\n  - {name: N1, id: 0x10000}\n").field() == "devices[0].id");
    CHECK(error_of(std::string(kBase) + "adversary:\n  - block: {kind: C9}\n").field() == "adversary[0].block.kind");
    CHECK(error_of(std::string(kBase) + "adversary:\n  - smash: {}\n").field() == "adversary[0].smash");
    CHECK(error_of(std::string(kBase) + "predicates: [replay, magic]\n").field() == "predicates[1]");
    CHECK(error_of(std::string(kBase) + "exchanges:\n  - {from: N1, to: N2, expect: maybe}\n").field() ==
          "exchanges[0].expect");
    CHECK(error_of(std::string(kBase) + "exchanges:\n  - {from: N1, to: N2, messages: -3}\n").field() ==
          "exchanges[0].messages");
    CHECK(error_of(std::string(kBase) + "adversary:\n  - inject: {to: N1, hex: \"zz\"}\n").field() ==
          "adversary[0].inject.hex");
    CHECK(error_of("devices: [").field() == "yaml");
    CHECK(error_of("name: x\n").field() == "devices");
}
