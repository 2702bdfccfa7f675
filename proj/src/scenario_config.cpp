#include "homeauth/scenario_config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace homeauth::sim {

ConfigError::ConfigError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message),
      line_(line),
      field_(std::move(field))
{
}

namespace {

std::size_t line_of(const YAML::Node& n)
{
    const auto m = n.Mark();
    return m.line < 0 ? 0 : static_cast<std::size_t>(m.line) + 1;
}

class Reader {
public:
    [[noreturn]] void error(const YAML::Node& n, const std::string& field, const std::string& msg) const
    {
        throw ConfigError(line_of(n), field, msg);
    }

    void allow_keys(const YAML::Node& map, const std::string& field, std::initializer_list<const char*> keys) const
    {
        if (!map.IsMap()) {
            error(map, field, "expected a mapping");
        }
        for (const auto& kv : map) {
            const auto k = kv.first.as<std::string>();
            bool ok = false;
            for (const char* allowed : keys) {
                ok = ok || k == allowed;
            }
            if (!ok) {
                error(kv.first, field + "." + k, "unknown key");
            }
        }
    }

    template <typename T>
    T get(const YAML::Node& n, const std::string& field) const
    {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            error(n, field, "wrong type");
        }
    }

    std::uint64_t uint(const YAML::Node& n, const std::string& field) const
    {
        const std::string s = get<std::string>(n, field);
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used, 0);
            if (used != s.size() || s.front() == '-') {
                error(n, field, "expected a non-negative integer");
            }
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            error(n, field, "expected a non-negative integer");
        }
    }

    std::uint64_t uint_in(const YAML::Node& n, const std::string& field, std::uint64_t lo, std::uint64_t hi) const
    {
        const auto v = uint(n, field);
        if (v < lo || v > hi) {
            error(n, field, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return v;
    }
};

} // namespace

Scenario parse_scenario(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.mark.line < 0 ? 0 : static_cast<std::size_t>(e.mark.line) + 1, "yaml", e.msg);
    }
    if (!root || !root.IsMap()) {
        throw ConfigError(0, "root", "scenario must be a mapping");
    }

    Reader rd;
    rd.allow_keys(root, "root",
                  {"name", "protocol", "controller", "devices", "acl", "exchanges", "admin", "adversary", "predicates",
                   "tamper_probe", "limits"});
    Scenario sc;
    sc.predicates.clear();

    if (root["name"]) {
        sc.name = rd.get<std::string>(root["name"], "name");
    }

    if (const auto p = root["protocol"]) {
        rd.allow_keys(p, "protocol", {"dormancy", "response_timeout", "resync_window"});
        if (p["dormancy"]) {
            sc.protocol.dormancy_threshold = rd.uint_in(p["dormancy"], "protocol.dormancy", 1, 1u << 30);
        }
        if (p["response_timeout"]) {
            sc.protocol.response_timeout = rd.uint_in(p["response_timeout"], "protocol.response_timeout", 1, 1u << 30);
        }
        if (p["resync_window"]) {
            sc.protocol.resync_window =
                static_cast<std::uint32_t>(rd.uint_in(p["resync_window"], "protocol.resync_window", 0, 64));
        }
    }

    if (const auto c = root["controller"]) {
        rd.allow_keys(c, "controller", {"name", "id"});
        if (c["name"]) {
            sc.controller_name = rd.get<std::string>(c["name"], "controller.name");
        }
        if (c["id"]) {
            sc.controller_id = DeviceId{static_cast<std::uint16_t>(rd.uint_in(c["id"], "controller.id", 0, 0xFFFF))};
        }
    }
    if (sc.controller_name == kAdversaryName) {
        rd.error(root["controller"], "controller.name", "reserved name");
    }

    const auto devs = root["devices"];
    if (!devs || !devs.IsSequence() || devs.size() == 0) {
        rd.error(devs ? devs : root, "devices", "at least one device is required");
    }
    std::set<std::string> names{sc.controller_name};
    std::set<std::uint16_t> ids{sc.controller_id.value};
    for (std::size_t i = 0; i < devs.size(); ++i) {
        const auto d = devs[i];
        const std::string f = "devices[" + std::to_string(i) + "]";
        rd.allow_keys(d, f, {"name", "id", "auto_auth", "auth_at"});
        if (!d["name"] || !d["id"]) {
            rd.error(d, f, "name and id are required");
        }
        DeviceSpec spec;
        spec.name = rd.get<std::string>(d["name"], f + ".name");
        spec.id = DeviceId{static_cast<std::uint16_t>(rd.uint_in(d["id"], f + ".id", 0, 0xFFFF))};
        if (d["auto_auth"]) {
            spec.auto_auth = rd.get<bool>(d["auto_auth"], f + ".auto_auth");
        }
        if (d["auth_at"]) {
            spec.auth_at = rd.uint(d["auth_at"], f + ".auth_at");
        }
        if (spec.name == kAdversaryName || !names.insert(spec.name).second) {
            rd.error(d["name"], f + ".name", "duplicate or reserved name '" + spec.name + "'");
        }
        if (!ids.insert(spec.id.value).second) {
            rd.error(d["id"], f + ".id", "duplicate id");
        }
        sc.devices.push_back(spec);
    }

    auto device_ref = [&](const YAML::Node& n, const std::string& f) {
        const auto name = rd.get<std::string>(n, f);
        for (const auto& d : sc.devices) {
            if (d.name == name) {
                return name;
            }
        }
        rd.error(n, f, "unknown device '" + name + "'");
    };
    auto node_ref = [&](const YAML::Node& n, const std::string& f) {
        const auto name = rd.get<std::string>(n, f);
        if (name == sc.controller_name) {
            return name;
        }
        return device_ref(n, f);
    };
    auto kind_ref = [&](const YAML::Node& n, const std::string& f) {
        const auto name = rd.get<std::string>(n, f);
        const auto k = wire::kind_from_name(name);
        if (!k) {
            rd.error(n, f, "unknown message kind '" + name + "'");
        }
        return *k;
    };

    if (const auto acl = root["acl"]) {
        rd.allow_keys(acl, "acl", {"allow_all", "pairs"});
        if (acl["allow_all"]) {
            sc.allow_all = rd.get<bool>(acl["allow_all"], "acl.allow_all");
        }
        if (const auto pairs = acl["pairs"]) {
            if (!pairs.IsSequence()) {
                rd.error(pairs, "acl.pairs", "expected a sequence");
            }
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const std::string f = "acl.pairs[" + std::to_string(i) + "]";
                if (!pairs[i].IsSequence() || pairs[i].size() != 2) {
                    rd.error(pairs[i], f, "expected [device, device]");
                }
                sc.acl_pairs.emplace_back(device_ref(pairs[i][0], f), device_ref(pairs[i][1], f));
            }
        }
    }

    if (const auto exs = root["exchanges"]) {
        if (!exs.IsSequence()) {
            rd.error(exs, "exchanges", "expected a sequence");
        }
        for (std::size_t i = 0; i < exs.size(); ++i) {
            const auto e = exs[i];
            const std::string f = "exchanges[" + std::to_string(i) + "]";
            rd.allow_keys(e, f, {"from", "to", "messages", "payload_bits", "start", "expect"});
            if (!e["from"] || !e["to"]) {
                rd.error(e, f, "from and to are required");
            }
            ExchangeSpec x;
            x.from = device_ref(e["from"], f + ".from");
            x.to = device_ref(e["to"], f + ".to");
            if (x.from == x.to) {
                rd.error(e, f, "from and to must differ");
            }
            if (e["messages"]) {
                x.messages = rd.uint_in(e["messages"], f + ".messages", 1, 1000000);
            }
            if (e["payload_bits"]) {
                x.payload_bits = rd.uint_in(e["payload_bits"], f + ".payload_bits", 1, wire::kMaxClearBits);
            }
            if (e["start"]) {
                x.start = rd.uint(e["start"], f + ".start");
            }
            if (e["expect"]) {
                const auto s = rd.get<std::string>(e["expect"], f + ".expect");
                if (s == "complete") {
                    x.expect = Expectation::Complete;
                } else if (s == "refused") {
                    x.expect = Expectation::Refused;
                } else if (s == "dropped") {
                    x.expect = Expectation::Dropped;
                } else {
                    rd.error(e["expect"], f + ".expect", "expected complete, refused or dropped");
                }
            }
            sc.exchanges.push_back(x);
        }
    }

    if (const auto admin = root["admin"]) {
        if (!admin.IsSequence()) {
            rd.error(admin, "admin", "expected a sequence");
        }
        std::set<std::string> added;
        std::set<std::string> removed;
        for (std::size_t i = 0; i < admin.size(); ++i) {
            const auto a = admin[i];
            const std::string f = "admin[" + std::to_string(i) + "]";
            rd.allow_keys(a, f, {"add", "remove", "at"});
            AdminAction act;
            if (a["add"] && !a["remove"]) {
                act.kind = AdminAction::Kind::Add;
                act.device = device_ref(a["add"], f + ".add");
                if (!added.insert(act.device).second) {
                    rd.error(a["add"], f + ".add", "device added twice");
                }
            } else if (a["remove"] && !a["add"]) {
                act.kind = AdminAction::Kind::Remove;
                act.device = device_ref(a["remove"], f + ".remove");
                if (!removed.insert(act.device).second) {
                    rd.error(a["remove"], f + ".remove", "device removed twice");
                }
            } else {
                rd.error(a, f, "exactly one of add/remove is required");
            }
            if (!a["at"]) {
                rd.error(a, f + ".at", "required");
            }
            act.at = rd.uint(a["at"], f + ".at");
            sc.admin.push_back(act);
        }
        for (auto& d : sc.devices) {
            if (added.count(d.name)) {
                d.initial = false;
            }
        }
        for (const auto& a : sc.admin) {
            if (a.kind != AdminAction::Kind::Remove) {
                continue;
            }
            for (const auto& b : sc.admin) {
                if (b.kind == AdminAction::Kind::Add && b.device == a.device && b.at >= a.at) {
                    throw ConfigError(0, "admin", "device '" + a.device + "' removed before it is added");
                }
            }
        }
    }

    if (const auto advs = root["adversary"]) {
        if (!advs.IsSequence()) {
            rd.error(advs, "adversary", "expected a sequence");
        }
        auto read_match = [&](const YAML::Node& n, const std::string& f) {
            FrameMatch m;
            if (n["kind"]) {
                m.kind = kind_ref(n["kind"], f + ".kind");
            }
            if (n["from"]) {
                m.from = node_ref(n["from"], f + ".from");
            }
            if (n["to"]) {
                m.to = node_ref(n["to"], f + ".to");
            }
            if (n["occurrence"]) {
                m.occurrence = rd.uint_in(n["occurrence"], f + ".occurrence", 1, 1u << 30);
            }
            return m;
        };
        for (std::size_t i = 0; i < advs.size(); ++i) {
            const auto a = advs[i];
            const std::string f = "adversary[" + std::to_string(i) + "]";
            if (!a.IsMap() || a.size() != 1) {
                rd.error(a, f, "each action is a single-key mapping");
            }
            const auto key = a.begin()->first.as<std::string>();
            const auto body = a.begin()->second;
            const std::string g = f + "." + key;
            if (key == "block") {
                rd.allow_keys(body, g, {"kind", "from", "to", "occurrence"});
                sc.adversary.push_back(adv::Block{read_match(body, g)});
            } else if (key == "tamper") {
                rd.allow_keys(body, g, {"kind", "from", "to", "occurrence", "bit"});
                adv::Tamper t{read_match(body, g), std::nullopt};
                if (body["bit"]) {
                    t.bit = rd.uint(body["bit"], g + ".bit");
                }
                sc.adversary.push_back(t);
            } else if (key == "replay") {
                rd.allow_keys(body, g, {"kind", "from", "to", "occurrence", "delay"});
                adv::Replay r{read_match(body, g), 1};
                if (body["delay"]) {
                    r.delay = rd.uint_in(body["delay"], g + ".delay", 1, 1u << 30);
                }
                sc.adversary.push_back(r);
            } else if (key == "replay_all") {
                rd.allow_keys(body, g, {"delay"});
                adv::ReplayAll r;
                if (body["delay"]) {
                    r.delay = rd.uint_in(body["delay"], g + ".delay", 1, 1u << 30);
                }
                sc.adversary.push_back(r);
            } else if (key == "inject") {
                rd.allow_keys(body, g, {"at", "to", "hex", "bits"});
                if (!body["to"] || !body["hex"]) {
                    rd.error(body, g, "to and hex are required");
                }
                adv::Inject inj;
                inj.at = body["at"] ? rd.uint(body["at"], g + ".at") : 0;
                inj.to = node_ref(body["to"], g + ".to");
                const auto hex = rd.get<std::string>(body["hex"], g + ".hex");
                const std::size_t bits = body["bits"] ? rd.uint(body["bits"], g + ".bits") : hex.size() * 4;
                try {
                    inj.frame = BitString::from_hex(hex, bits);
                } catch (const std::exception& e) {
                    rd.error(body["hex"], g + ".hex", e.what());
                }
                sc.adversary.push_back(inj);
            } else if (key == "flood") {
                rd.allow_keys(body, g, {"at", "to", "count", "per_tick"});
                if (!body["to"] || !body["count"]) {
                    rd.error(body, g, "to and count are required");
                }
                adv::Flood fl;
                fl.at = body["at"] ? rd.uint(body["at"], g + ".at") : 0;
                fl.to = node_ref(body["to"], g + ".to");
                fl.count = rd.uint_in(body["count"], g + ".count", 1, 10000000);
                if (body["per_tick"]) {
                    fl.per_tick = rd.uint_in(body["per_tick"], g + ".per_tick", 1, 10000000);
                }
                sc.adversary.push_back(fl);
            } else if (key == "insider") {
                sc.adversary.push_back(adv::Insider{device_ref(body, g)});
            } else if (key == "parallel_session") {
                rd.allow_keys(body, g, {"at", "device", "d2d"});
                if (!body["device"]) {
                    rd.error(body, g, "device is required");
                }
                adv::ParallelSession ps;
                ps.at = body["at"] ? rd.uint(body["at"], g + ".at") : 0;
                ps.device = device_ref(body["device"], g + ".device");
                if (body["d2d"]) {
                    ps.d2d = rd.get<bool>(body["d2d"], g + ".d2d");
                }
                sc.adversary.push_back(ps);
            } else {
                rd.error(a.begin()->first, g, "unknown adversary action");
            }
        }
    }

    if (const auto preds = root["predicates"]) {
        if (!preds.IsSequence()) {
            rd.error(preds, "predicates", "expected a sequence");
        }
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const std::string f = "predicates[" + std::to_string(i) + "]";
            const auto name = rd.get<std::string>(preds[i], f);
            const auto p = predicate_from_name(name);
            if (!p) {
                rd.error(preds[i], f, "unknown predicate '" + name + "'");
            }
            if (std::find(sc.predicates.begin(), sc.predicates.end(), *p) != sc.predicates.end()) {
                rd.error(preds[i], f, "listed twice");
            }
            sc.predicates.push_back(*p);
        }
    } else {
        sc.predicates = all_predicates();
    }

    if (const auto tp = root["tamper_probe"]) {
        rd.allow_keys(tp, "tamper_probe", {"per_field"});
        TamperProbe probe;
        if (tp["per_field"]) {
            probe.per_field = rd.uint_in(tp["per_field"], "tamper_probe.per_field", 1, 1000);
        }
        sc.probe = probe;
    }

    if (const auto lim = root["limits"]) {
        rd.allow_keys(lim, "limits",
                      {"auth_retries", "request_retries", "refusal_retries", "refusal_backoff", "run_until",
                       "max_ticks"});
        if (lim["auth_retries"]) {
            sc.auth_retries = rd.uint_in(lim["auth_retries"], "limits.auth_retries", 0, 1000);
        }
        if (lim["request_retries"]) {
            sc.request_retries = rd.uint_in(lim["request_retries"], "limits.request_retries", 0, 1000);
        }
        if (lim["refusal_retries"]) {
            sc.refusal_retries = rd.uint_in(lim["refusal_retries"], "limits.refusal_retries", 0, 1000);
        }
        if (lim["refusal_backoff"]) {
            sc.refusal_backoff = rd.uint_in(lim["refusal_backoff"], "limits.refusal_backoff", 1, 1u << 30);
        }
        if (lim["run_until"]) {
            sc.run_until = rd.uint(lim["run_until"], "limits.run_until");
        }
        if (lim["max_ticks"]) {
            sc.max_ticks = rd.uint_in(lim["max_ticks"], "limits.max_ticks", 1, 100000000);
        }
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(0, "file", "cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

} // namespace homeauth::sim
