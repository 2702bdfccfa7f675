#include "homeauth/report.hpp"

#include "homeauth/cost.hpp"

#include <iomanip>

namespace homeauth::report {

OpCounters total_ops(const sim::RunResult& result)
{
    OpCounters sum = result.controller.crypto().ops();
    for (const auto& [name, dev] : result.devices) {
        sum += dev.crypto().ops();
    }
    return sum;
}

namespace {

std::map<std::string, std::size_t> disposition_counts(const sim::Trace& trace)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& e : trace.events) {
        ++counts[std::string(sim::disposition_name(e.disposition))];
    }
    return counts;
}

} // namespace

void write_text(std::ostream& os, const sim::Scenario& scenario, const sim::RunResult& result,
                const sim::ScenarioVerdict& verdict)
{
    os << "scenario " << scenario.name << "  seed " << result.trace.seed << "  ticks " << result.end_tick
       << (result.quiesced ? "  (quiesced)" : "  (tick limit reached)") << '\n';
    os << "frames " << result.trace.events.size();
    for (const auto& [name, n] : disposition_counts(result.trace)) {
        os << "  " << name << ' ' << n;
    }
    os << "\n\nPredicates\n";
    for (const auto& r : verdict.results) {
        os << "  " << std::left << std::setw(18) << sim::predicate_name(r.predicate) << std::right
           << (r.pass ? "PASS" : "FAIL");
        if (r.counterexample) {
            os << "  at #" << *r.counterexample;
        }
        if (!r.detail.empty()) {
            os << "  " << r.detail;
        }
        os << '\n';
    }

    if (!result.exchanges.empty()) {
        os << "\nExchanges\n";
        for (std::size_t i = 0; i < result.exchanges.size(); ++i) {
            const auto& x = result.exchanges[i];
            os << "  #" << i << ' ' << x.spec.from << " -> " << x.spec.to << "  " << x.delivered << '/'
               << x.spec.messages << "  " << sim::outcome_name(x.outcome) << " (expected "
               << sim::expectation_name(x.spec.expect) << ")  establishments " << x.establishments << "  retries "
               << x.retries << '\n';
        }
    }

    if (result.probe.mutations > 0) {
        os << "\nTamper probe\n  mutations " << result.probe.mutations << "  rejected " << result.probe.rejected
           << '\n';
        for (const auto& [field, n] : result.probe.by_field) {
            os << "    field " << std::left << std::setw(8) << field << std::right << n << '\n';
        }
        for (const auto& [outcome, n] : result.probe.by_outcome) {
            os << "    outcome " << std::left << std::setw(16) << outcome << std::right << n << '\n';
        }
    }

    os << "\nCrypto operations\n";
    auto line = [&](const std::string& name, const OpCounters& o) {
        os << "  " << std::left << std::setw(8) << name << std::right << " hash " << std::setw(8) << o.hashes
           << "  enc " << std::setw(6) << o.encryptions << "  dec " << std::setw(6) << o.decryptions << '\n';
    };
    line(scenario.controller_name, result.controller.crypto().ops());
    for (const auto& [name, dev] : result.devices) {
        line(name, dev.crypto().ops());
    }
    os << '\n';
    cost::write_crosscheck(os, cost::crosscheck_with_simulation(result.trace, total_ops(result)));
    os << '\n';
    cost::write_text_tables(os);
}

nlohmann::json to_json(const sim::Scenario& scenario, const sim::RunResult& result,
                       const sim::ScenarioVerdict& verdict)
{
    using nlohmann::json;
    json j;
    j["scenario"] = scenario.name;
    j["seed"] = result.trace.seed;
    j["end_tick"] = result.end_tick;
    j["quiesced"] = result.quiesced;
    j["pass"] = verdict.pass();
    j["frames"] = result.trace.events.size();
    j["dispositions"] = disposition_counts(result.trace);

    json preds = json::array();
    for (const auto& r : verdict.results) {
        json p{{"predicate", sim::predicate_name(r.predicate)}, {"pass", r.pass}, {"detail", r.detail}};
        p["counterexample"] = r.counterexample ? json(*r.counterexample) : json(nullptr);
        preds.push_back(p);
    }
    j["predicates"] = preds;

    json exs = json::array();
    for (const auto& x : result.exchanges) {
        json e{{"from", x.spec.from},
               {"to", x.spec.to},
               {"messages", x.spec.messages},
               {"delivered", x.delivered},
               {"outcome", sim::outcome_name(x.outcome)},
               {"expected", sim::expectation_name(x.spec.expect)},
               {"establishments", x.establishments},
               {"retries", x.retries}};
        e["finished_at"] = x.finished_at ? json(*x.finished_at) : json(nullptr);
        exs.push_back(e);
    }
    j["exchanges"] = exs;

    j["probe"] = {{"mutations", result.probe.mutations},
                  {"rejected", result.probe.rejected},
                  {"by_field", result.probe.by_field},
                  {"by_outcome", result.probe.by_outcome}};

    auto ops_json = [](const OpCounters& o) {
        return json{{"hash", o.hashes}, {"enc", o.encryptions}, {"dec", o.decryptions}};
    };
    json ops;
    ops[scenario.controller_name] = ops_json(result.controller.crypto().ops());
    for (const auto& [name, dev] : result.devices) {
        ops[name] = ops_json(dev.crypto().ops());
    }
    j["ops"] = ops;

    const auto cc = cost::crosscheck_with_simulation(result.trace, total_ops(result));
    j["crosscheck"] = {{"measured_ops", ops_json(cc.measured_ops)},
                       {"measured_enc_dec_pairs", cc.measured_enc_dec_pairs},
                       {"analytic_hashes", cc.analytic.hashes},
                       {"analytic_enc_dec_pairs", cc.analytic.enc_dec_pairs},
                       {"measured_bits", cc.measured_bits},
                       {"field_sum_bits", cc.field_sum_bits},
                       {"frames", cc.frames}};
    return j;
}

} // namespace homeauth::report
