#include "homeauth/cost.hpp"
#include "homeauth/predicates.hpp"
#include "homeauth/report.hpp"
#include "homeauth/scenario_config.hpp"
#include "homeauth/snapshot.hpp"
#include "homeauth/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace homeauth;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::string default_out_dir()
{
    if (const char* env = std::getenv("HOMEAUTH_OUT_DIR"); env && *env) {
        return env;
    }
    return "out";
}

int cmd_run(const std::string& config, std::uint64_t seed, const std::string& out_dir)
{
    sim::Scenario scenario;
    try {
        scenario = sim::load_scenario_file(config);
    } catch (const sim::ConfigError& e) {
        std::cerr << config << ": " << e.what() << '\n';
        return kExitConfig;
    }

    const auto result = sim::run(scenario, seed);
    const auto verdict = sim::evaluate(scenario, result);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    {
        std::ofstream f(dir / "trace.jsonl", std::ios::binary);
        sim::write_trace(f, result.trace);
    }
    {
        std::ofstream f(dir / "report.txt");
        report::write_text(f, scenario, result, verdict);
    }
    {
        auto j = report::to_json(scenario, result, verdict);
        j["trace_path"] = (dir / "trace.jsonl").string();
        std::ofstream f(dir / "report.json");
        f << j.dump(2) << '\n';
    }
    {
        std::ofstream f(dir / "snapshot.json");
        f << snapshot_to_json(take_snapshot(result.controller, result.devices)).dump(2) << '\n';
    }

    for (const auto& r : verdict.results) {
        std::cout << std::left << std::setw(18) << sim::predicate_name(r.predicate) << std::right
                  << (r.pass ? "PASS" : "FAIL");
        if (!r.pass && r.counterexample) {
            std::cout << "  counterexample #" << *r.counterexample;
        }
        if (!r.pass && !r.detail.empty()) {
            std::cout << "  " << r.detail;
        }
        std::cout << '\n';
    }
    std::cout << "wrote " << (dir / "trace.jsonl").string() << ", report.txt, report.json, snapshot.json\n";
    return verdict.pass() ? kExitPass : kExitFail;
}

int cmd_costs(const std::string& format)
{
    if (format == "csv") {
        cost::write_csv(std::cout);
    } else {
        cost::write_text_tables(std::cout);
    }
    return kExitPass;
}

int cmd_trace(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "cannot read " << path << '\n';
        return kExitConfig;
    }
    sim::Trace trace;
    try {
        trace = sim::read_trace(f);
    } catch (const std::exception& e) {
        std::cerr << path << ": " << e.what() << '\n';
        return kExitConfig;
    }
    std::cout << "# scenario " << trace.scenario << " seed " << trace.seed << " events " << trace.events.size()
              << '\n';
    std::cout << "#   tick  from -> to      disposition kind    mid        verdict\n";
    for (const auto& e : trace.events) {
        const auto kind = e.kind();
        std::string mid = "-";
        if (e.frame.size() >= wire::kHeaderBits + 32) {
            mid = e.frame.slice(wire::kHeaderBits, 32).to_hex();
        }
        std::string verdict = "-";
        if (e.verdict) {
            verdict = std::string(verdict_name(*e.verdict));
            if (e.reason != DiscardReason::None) {
                verdict += " (" + std::string(reason_name(e.reason)) + ")";
            }
        }
        std::cout << std::setw(8) << e.tick << "  " << std::left << std::setw(5) << e.from << "-> " << std::setw(8)
                  << e.to << std::setw(12) << sim::disposition_name(e.disposition) << std::setw(8)
                  << (kind ? std::string(wire::kind_name(*kind)) : std::string("?")) << std::setw(11) << mid
                  << std::right << verdict << '\n';
    }
    return kExitPass;
}

int cmd_snapshot(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        std::cerr << "cannot read " << path << '\n';
        return kExitConfig;
    }
    try {
        const auto snap = snapshot_from_json(nlohmann::json::parse(f));
        const auto nodes = restore(snap);
        std::cout << "controller " << std::hex << nodes.controller.id().value << std::dec << "  devices "
                  << nodes.devices.size() << '\n';
        for (const auto& [name, dev] : nodes.devices) {
            const auto ch = channel_state(dev.controller_channel());
            std::cout << "  " << std::left << std::setw(6) << name << std::right << " next "
                      << ch.next.hex().substr(48) << "  authenticated " << (dev.otp() ? "yes" : "no") << "  peers "
                      << dev.peers().size() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << path << ": " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitPass;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Counter/nonce smart-home authentication simulator"};
    app.require_subcommand(1);

    std::string config;
    std::uint64_t seed = 1;
    std::string out_dir = default_out_dir();
    auto* run = app.add_subcommand("run", "Run a scenario and evaluate its predicates");
    run->add_option("config", config, "Scenario YAML file")->required();
    run->add_option("--seed", seed, "Simulation seed");
    run->add_option("--out", out_dir, "Output directory (default $HOMEAUTH_OUT_DIR or ./out)");

    std::string format = "text";
    auto* costs = app.add_subcommand("costs", "Print the cost comparison tables");
    costs->add_option("--format", format)->check(CLI::IsMember({"text", "csv"}));

    std::string trace_path;
    auto* trace = app.add_subcommand("trace", "List the events of a trace file");
    trace->add_option("file", trace_path)->required();

    std::string snap_path;
    auto* snap = app.add_subcommand("snapshot", "Restore a snapshot file and summarize node state");
    snap->add_option("file", snap_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (*run) {
        return cmd_run(config, seed, out_dir);
    }
    if (*costs) {
        return cmd_costs(format);
    }
    if (*trace) {
        return cmd_trace(trace_path);
    }
    return cmd_snapshot(snap_path);
}
