#include "homeauth/snapshot.hpp"

namespace homeauth {

using nlohmann::json;

namespace {

json channel_json(const ChannelState& c)
{
    return {{"start", c.start.hex()}, {"next", c.next.hex()}, {"floor", c.floor.hex()}};
}

ChannelState channel_from(const json& j)
{
    return {Counter256::from_hex(j.at("start").get<std::string>()), Counter256::from_hex(j.at("next").get<std::string>()),
            Counter256::from_hex(j.at("floor").get<std::string>())};
}

json ops_json(const OpCounters& o)
{
    return {{"hash", o.hashes}, {"enc", o.encryptions}, {"dec", o.decryptions}};
}

OpCounters ops_from(const json& j)
{
    return {j.at("hash").get<std::uint64_t>(), j.at("enc").get<std::uint64_t>(), j.at("dec").get<std::uint64_t>()};
}

template <typename T>
json opt_u16(const std::optional<T>& v)
{
    return v ? json(v->value) : json(nullptr);
}

template <typename T>
std::optional<T> u16_from(const json& j)
{
    if (j.is_null()) {
        return std::nullopt;
    }
    return T{j.get<std::uint16_t>()};
}

json device_json(const Device::State& s)
{
    json j{{"id", s.id.value},
           {"controller_id", s.controller_id.value},
           {"seed", s.seed.value},
           {"key", s.key.hex()},
           {"channel", channel_json(s.channel)},
           {"last_nonce", opt_u16(s.last_nonce)},
           {"otp", opt_u16(s.otp)},
           {"last_activity", s.last_activity},
           {"rng", s.rng_state},
           {"ops", ops_json(s.ops)}};
    j["pending"] = s.pending ? json{{"nonce", s.pending->nonce.value},
                                    {"key", s.pending->key.hex()},
                                    {"channel", channel_json(s.pending->channel)},
                                    {"sent_at", s.pending->sent_at}}
                             : json(nullptr);
    j["outstanding"] = s.outstanding ? json{{"target", s.outstanding->target.value}, {"sent_at", s.outstanding->sent_at}}
                                     : json(nullptr);
    json peers = json::array();
    for (const auto& p : s.peers) {
        peers.push_back({{"peer", p.peer.value},
                         {"d2d_key", p.d2d_key.hex()},
                         {"channel", channel_json(p.channel)},
                         {"awaiting_since", p.awaiting_response_since ? json(*p.awaiting_response_since) : json(nullptr)}});
    }
    j["peers"] = peers;
    json roster = json::array();
    for (const auto id : s.roster) {
        roster.push_back(id.value);
    }
    j["roster"] = roster;
    return j;
}

Device::State device_from(const json& j)
{
    Device::State s;
    s.id = DeviceId{j.at("id").get<std::uint16_t>()};
    s.controller_id = DeviceId{j.at("controller_id").get<std::uint16_t>()};
    s.seed = SecretSeed{j.at("seed").get<std::uint16_t>()};
    s.key = SymKey::from_hex(j.at("key").get<std::string>());
    s.channel = channel_from(j.at("channel"));
    s.last_nonce = u16_from<Nonce16>(j.at("last_nonce"));
    s.otp = u16_from<Nonce16>(j.at("otp"));
    s.last_activity = j.at("last_activity").get<Tick>();
    s.rng_state = j.at("rng").get<std::string>();
    s.ops = ops_from(j.at("ops"));
    if (const auto& p = j.at("pending"); !p.is_null()) {
        s.pending = Device::State::Pending{Nonce16{p.at("nonce").get<std::uint16_t>()},
                                           SymKey::from_hex(p.at("key").get<std::string>()),
                                           channel_from(p.at("channel")), p.at("sent_at").get<Tick>()};
    }
    if (const auto& o = j.at("outstanding"); !o.is_null()) {
        s.outstanding = Device::OutstandingRequest{DeviceId{o.at("target").get<std::uint16_t>()},
                                                   o.at("sent_at").get<Tick>()};
    }
    for (const auto& p : j.at("peers")) {
        Device::State::Peer peer{DeviceId{p.at("peer").get<std::uint16_t>()}, SymKey::from_hex(p.at("d2d_key").get<std::string>()),
                                 channel_from(p.at("channel")), std::nullopt};
        if (!p.at("awaiting_since").is_null()) {
            peer.awaiting_response_since = p.at("awaiting_since").get<Tick>();
        }
        s.peers.push_back(peer);
    }
    for (const auto& id : j.at("roster")) {
        s.roster.insert(DeviceId{id.get<std::uint16_t>()});
    }
    return s;
}

json controller_json(const Controller::State& s)
{
    json records = json::array();
    for (const auto& r : s.records) {
        json jr{{"id", r.id.value},         {"seed", r.seed.value},         {"key", r.key.hex()},
                {"channel", channel_json(r.channel)}, {"last_nonce", opt_u16(r.last_nonce)}, {"otp", opt_u16(r.otp)},
                {"active", r.active}};
        if (r.fallback_key && r.fallback_channel) {
            jr["fallback"] = {{"key", r.fallback_key->hex()}, {"channel", channel_json(*r.fallback_channel)}};
        } else {
            jr["fallback"] = nullptr;
        }
        records.push_back(jr);
    }
    json pending = json::array();
    for (const auto& p : s.pending) {
        pending.push_back({{"requester", p.requester.value},
                           {"target", p.target.value},
                           {"d2d_key", p.d2d_key.hex()},
                           {"d2d_counter", p.d2d_counter.hex()},
                           {"created_at", p.created_at}});
    }
    json pairs = json::array();
    for (const auto& [a, b] : s.allowed_pairs) {
        pairs.push_back({a.value, b.value});
    }
    return {{"id", s.id.value},     {"records", records}, {"pending", pending}, {"allow_all", s.allow_all},
            {"pairs", pairs},       {"rng", s.rng_state}, {"ops", ops_json(s.ops)}};
}

Controller::State controller_from(const json& j)
{
    Controller::State s;
    s.id = DeviceId{j.at("id").get<std::uint16_t>()};
    for (const auto& jr : j.at("records")) {
        Controller::State::Record r;
        r.id = DeviceId{jr.at("id").get<std::uint16_t>()};
        r.seed = SecretSeed{jr.at("seed").get<std::uint16_t>()};
        r.key = SymKey::from_hex(jr.at("key").get<std::string>());
        r.channel = channel_from(jr.at("channel"));
        r.last_nonce = u16_from<Nonce16>(jr.at("last_nonce"));
        r.otp = u16_from<Nonce16>(jr.at("otp"));
        r.active = jr.at("active").get<bool>();
        if (const auto& f = jr.at("fallback"); !f.is_null()) {
            r.fallback_key = SymKey::from_hex(f.at("key").get<std::string>());
            r.fallback_channel = channel_from(f.at("channel"));
        }
        s.records.push_back(r);
    }
    for (const auto& p : j.at("pending")) {
        s.pending.push_back({DeviceId{p.at("requester").get<std::uint16_t>()},
                             DeviceId{p.at("target").get<std::uint16_t>()},
                             SymKey::from_hex(p.at("d2d_key").get<std::string>()),
                             Counter256::from_hex(p.at("d2d_counter").get<std::string>()), p.at("created_at").get<Tick>()});
    }
    s.allow_all = j.at("allow_all").get<bool>();
    for (const auto& pr : j.at("pairs")) {
        s.allowed_pairs.emplace_back(DeviceId{pr.at(0).get<std::uint16_t>()}, DeviceId{pr.at(1).get<std::uint16_t>()});
    }
    s.rng_state = j.at("rng").get<std::string>();
    s.ops = ops_from(j.at("ops"));
    return s;
}

} // namespace

Snapshot take_snapshot(const Controller& controller, const std::map<std::string, Device>& devices)
{
    Snapshot s;
    const auto& cfg = controller.config();
    s.resync_window = cfg.resync_window;
    s.dormancy_threshold = cfg.dormancy_threshold;
    s.response_timeout = cfg.response_timeout;
    s.controller = controller.export_state();
    for (const auto& [name, d] : devices) {
        s.devices.emplace(name, d.export_state());
    }
    return s;
}

json snapshot_to_json(const Snapshot& s)
{
    json devices = json::object();
    for (const auto& [name, d] : s.devices) {
        devices[name] = device_json(d);
    }
    return {{"format", "homeauth-snapshot"},
            {"version", 1},
            {"protocol",
             {{"resync_window", s.resync_window},
              {"dormancy", s.dormancy_threshold},
              {"response_timeout", s.response_timeout}}},
            {"controller", controller_json(s.controller)},
            {"devices", devices}};
}

Snapshot snapshot_from_json(const json& j)
{
    if (j.at("format").get<std::string>() != "homeauth-snapshot") {
        throw std::runtime_error("not a homeauth snapshot");
    }
    Snapshot s;
    const auto& p = j.at("protocol");
    s.resync_window = p.at("resync_window").get<std::uint32_t>();
    s.dormancy_threshold = p.at("dormancy").get<Tick>();
    s.response_timeout = p.at("response_timeout").get<Tick>();
    s.controller = controller_from(j.at("controller"));
    for (const auto& [name, d] : j.at("devices").items()) {
        s.devices.emplace(name, device_from(d));
    }
    return s;
}

RestoredNodes restore(const Snapshot& s)
{
    ProtocolConfig cfg;
    cfg.resync_window = s.resync_window;
    cfg.dormancy_threshold = s.dormancy_threshold;
    cfg.response_timeout = s.response_timeout;
    RestoredNodes out{Controller::import_state(s.controller, cfg), {}};
    for (const auto& [name, d] : s.devices) {
        out.devices.emplace(name, Device::import_state(d, cfg));
    }
    return out;
}

} // namespace homeauth
