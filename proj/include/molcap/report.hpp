#pragma once

// CSV and JSON artifacts written by the command-line tool.

#include "metrics.hpp"
#include "simulation.hpp"

#include <json.hpp>

#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>

namespace molcap::report {

inline std::string format_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

// step,reactions_left,optimistic_nodes,pessimistic_nodes
inline void write_steps_csv(std::ostream& os, const AggregateMetrics& a)
{
    os << "step,reactions_left,optimistic_nodes,pessimistic_nodes\n";
    for (std::size_t t = 0; t < a.reactions_left.size(); ++t)
    {
        os << t << ',' << format_number(a.reactions_left[t]) << ',' << format_number(a.optimistic_nodes[t]) << ','
           << format_number(a.pessimistic_nodes[t]) << '\n';
    }
}

// cycle,messages_useful,messages_useless
inline void write_cycles_csv(std::ostream& os, const AggregateMetrics& a)
{
    os << "cycle,messages_useful,messages_useless\n";
    for (std::size_t c = 0; c < a.messages_useful.size(); ++c)
    {
        os << c << ',' << format_number(a.messages_useful[c]) << ',' << format_number(a.messages_useless[c]) << '\n';
    }
}

inline void write_optimum_csv(std::ostream& os, std::span<const std::uint64_t> curve)
{
    os << "step,reactions_left\n";
    for (std::size_t t = 0; t < curve.size(); ++t)
    {
        os << t << ',' << curve[t] << '\n';
    }
}

// step,from,to,kind,molecule_id,attempt_id,request_type
inline void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace)
{
    os << "step,from,to,kind,molecule_id,attempt_id,request_type\n";
    for (const auto& r : trace)
    {
        os << r.step << ',' << r.from.value << ',' << r.to.value << ',' << to_string(r.kind) << ',' << r.molecule << ','
           << r.attempt << ',' << to_string(r.request_type) << '\n';
    }
}

inline nlohmann::ordered_json config_to_json(const SimConfig& c)
{
    nlohmann::ordered_json j;
    j["nodes"] = c.nodes;
    j["molecules"] = c.molecules;
    j["scenario"] = std::string(to_string(c.scenario));
    j["mode"] = std::string(to_string(c.mode));
    j["threshold"] = c.adapt.threshold;
    j["w_local"] = c.adapt.w_local;
    j["w_remote"] = c.adapt.w_remote;
    j["local_weight"] = c.adapt.local_weight;
    j["seed"] = c.seed;
    j["runs"] = c.runs;
    j["max_steps"] = c.max_steps;
    j["cycle_len"] = c.cycle_len;
    j["delivery"] = c.delivery == DeliveryOrder::shuffled ? "shuffled" : "by-sender";
    return j;
}

inline nlohmann::ordered_json summary_json(const SimConfig& c, std::span<const RunMetrics> runs,
                                           const AggregateMetrics& a, std::span<const Molecule> final_multiset)
{
    nlohmann::ordered_json j;
    j["config"] = config_to_json(c);
    j["runs"] = a.runs;
    j["inertia_fraction"] = a.inertia_fraction;

    nlohmann::ordered_json steps;
    steps["reached"] = static_cast<std::size_t>(a.inertia_fraction * static_cast<double>(a.runs) + 0.5);
    steps["mean"] = a.mean_steps_to_inertia ? nlohmann::ordered_json(*a.mean_steps_to_inertia) : nullptr;
    steps["min"] = a.min_steps_to_inertia ? nlohmann::ordered_json(*a.min_steps_to_inertia) : nullptr;
    steps["max"] = a.max_steps_to_inertia ? nlohmann::ordered_json(*a.max_steps_to_inertia) : nullptr;
    j["steps_to_inertia"] = steps;

    double useful = 0.0;
    double useless = 0.0;
    for (auto v : a.messages_useful)
    {
        useful += v;
    }
    for (auto v : a.messages_useless)
    {
        useless += v;
    }
    nlohmann::ordered_json msgs;
    msgs["mean_total"] = a.mean_total_messages;
    msgs["mean_useful"] = useful;
    msgs["mean_useless"] = useless;
    j["messages"] = msgs;
    j["mean_reactions"] = a.mean_total_reactions;

    std::size_t all_switched = 0;
    std::optional<Step> worst;
    for (const auto& r : runs)
    {
        if (const auto s = switch_spread(r))
        {
            ++all_switched;
            worst = worst ? std::max(*worst, *s) : *s;
        }
    }
    nlohmann::ordered_json sw;
    sw["runs_fully_switched"] = all_switched;
    sw["max_spread"] = worst ? nlohmann::ordered_json(*worst) : nullptr;
    j["switch"] = sw;

    if (c.scenario == ScenarioKind::count_aggregate)
    {
        auto final_ms = nlohmann::ordered_json::array();
        for (const auto& m : final_multiset)
        {
            if (const auto* i = std::get_if<std::int64_t>(&m.payload))
            {
                final_ms.push_back(*i);
            }
            else
            {
                final_ms.push_back(std::get<std::string>(m.payload));
            }
        }
        j["final_multiset_first_run"] = final_ms;
    }
    return j;
}

} // namespace molcap::report
