#pragma once

// `molcap run`: experiment presets and custom runs, writing CSV/JSON artifacts.

#include "report.hpp"
#include "simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace molcap::cli {

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// One configuration of a sweep and the file prefix for its outputs.
struct SweepEntry
{
    std::string label;
    SimConfig config;
};

inline const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"exp1-modes", "exp2-threshold-sweep", "exp3-switch", "exp4-messages",
                                                "scenario-count-aggregate"};
    return names;
}

// Settings a preset imposes before the config file and flags are applied.
inline void apply_preset_base(const std::string& preset, SimConfig& cfg)
{
    if (preset == "scenario-count-aggregate")
    {
        cfg.scenario = ScenarioKind::count_aggregate;
        cfg.nodes = 10;
    }
}

inline std::string threshold_label(double s)
{
    std::ostringstream os;
    os << std::setprecision(3) << s;
    return os.str();
}

// Expands the preset's sweep grid over an already-merged configuration.
inline std::vector<SweepEntry> expand_preset(const std::string& preset, const SimConfig& base)
{
    std::vector<SweepEntry> out;
    auto with_mode = [&](const std::string& prefix, Mode m) {
        SimConfig c = base;
        c.mode = m;
        out.push_back({prefix + "_" + std::string(to_string(m)), c});
    };
    if (preset.empty())
    {
        out.push_back({"run", base});
    }
    else if (preset == "exp1-modes" || preset == "exp4-messages")
    {
        const std::string prefix = preset == "exp1-modes" ? "exp1" : "exp4";
        with_mode(prefix, Mode::optimistic_only);
        with_mode(prefix, Mode::pessimistic_only);
        with_mode(prefix, Mode::mixed);
    }
    else if (preset == "exp2-threshold-sweep")
    {
        for (double s : {0.1, 0.3, 0.5, 0.7, 0.9})
        {
            SimConfig c = base;
            c.mode = Mode::mixed;
            c.adapt.threshold = s;
            out.push_back({"exp2_s" + threshold_label(s), c});
        }
    }
    else if (preset == "exp3-switch")
    {
        with_mode("exp3", Mode::mixed);
    }
    else if (preset == "scenario-count-aggregate")
    {
        with_mode("count_aggregate", Mode::optimistic_only);
        with_mode("count_aggregate", Mode::pessimistic_only);
        with_mode("count_aggregate", Mode::mixed);
    }
    else
    {
        throw UsageError("unknown preset '" + preset + "'");
    }
    return out;
}

inline void apply_config_json(const nlohmann::json& j, SimConfig& cfg)
{
    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key))
        {
            j.at(key).get_to(field);
        }
    };
    get("nodes", cfg.nodes);
    get("molecules", cfg.molecules);
    get("seed", cfg.seed);
    get("runs", cfg.runs);
    get("max_steps", cfg.max_steps);
    get("cycle_len", cfg.cycle_len);
    get("threshold", cfg.adapt.threshold);
    get("w_local", cfg.adapt.w_local);
    get("w_remote", cfg.adapt.w_remote);
    get("local_weight", cfg.adapt.local_weight);
    if (j.contains("mode"))
    {
        const auto m = parse_mode(j.at("mode").get<std::string>());
        if (!m)
        {
            throw UsageError("config: unknown mode");
        }
        cfg.mode = *m;
    }
    if (j.contains("scenario"))
    {
        const auto s = parse_scenario(j.at("scenario").get<std::string>());
        if (!s)
        {
            throw UsageError("config: unknown scenario");
        }
        cfg.scenario = *s;
    }
    if (j.contains("delivery"))
    {
        const auto d = j.at("delivery").get<std::string>();
        if (d != "shuffled" && d != "by-sender")
        {
            throw UsageError("config: unknown delivery order");
        }
        cfg.delivery = d == "shuffled" ? DeliveryOrder::shuffled : DeliveryOrder::by_sender;
    }
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    f << content;
}

// Runs one sweep entry and writes its files into `out_dir`.
inline AggregateMetrics run_entry(const SweepEntry& entry, const std::filesystem::path& out_dir, bool trace)
{
    const SimConfig& cfg = entry.config;
    Simulation first(cfg, run_seed(cfg.seed, 0));
    std::vector<RunMetrics> runs;
    runs.reserve(cfg.runs);
    runs.push_back(first.run());
    if (cfg.runs > 1)
    {
        auto rest = run_many(cfg);
        for (std::size_t i = 1; i < rest.size(); ++i)
        {
            runs.push_back(std::move(rest[i]));
        }
    }
    const auto agg = aggregate(runs);

    std::ostringstream steps;
    report::write_steps_csv(steps, agg);
    write_file(out_dir / (entry.label + "_steps.csv"), steps.str());

    std::ostringstream cycles;
    report::write_cycles_csv(cycles, agg);
    write_file(out_dir / (entry.label + "_cycles.csv"), cycles.str());

    std::ostringstream reactions;
    write_reaction_log_csv(reactions, first.reaction_log());
    write_file(out_dir / (entry.label + "_reactions.csv"), reactions.str());

    if (trace)
    {
        std::ostringstream tr;
        report::write_trace_csv(tr, first.trace());
        write_file(out_dir / (entry.label + "_trace.csv"), tr.str());
    }

    const auto summary = report::summary_json(cfg, runs, agg, first.multiset().live());
    write_file(out_dir / (entry.label + "_summary.json"), summary.dump(2) + "\n");
    return agg;
}

// Entry point shared by the tool and the tests. Returns the process exit code.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Atomic multi-molecule capture simulator"};
    app.require_subcommand(1);
    auto* run = app.add_subcommand("run", "Run a preset sweep or a custom configuration");

    SimConfig flags;
    std::string mode_name;
    std::string scenario_name;
    std::string delivery_name;
    std::string preset;
    std::string out_dir = "out";
    std::string config_path;
    bool trace = false;

    auto* o_nodes = run->add_option("--nodes", flags.nodes, "Number of nodes (default 250)");
    auto* o_molecules = run->add_option("--molecules", flags.molecules, "Initial molecules (default 15000)");
    auto* o_mode = run->add_option("--mode", mode_name, "optimistic | pessimistic | mixed (default mixed)");
    auto* o_threshold = run->add_option("--threshold", flags.adapt.threshold, "Switch threshold s in (0,1] (default 0.7)");
    auto* o_seed = run->add_option("--seed", flags.seed, "Base seed (default 42)");
    auto* o_runs = run->add_option("--runs", flags.runs, "Repetitions per configuration (default 50)");
    auto* o_steps = run->add_option("--max-steps", flags.max_steps, "Step limit per run (default 500)");
    auto* o_cycle = run->add_option("--cycle-len", flags.cycle_len, "Steps per message-accounting cycle (default 12)");
    auto* o_wl = run->add_option("--w-local", flags.adapt.w_local, "Local outcome window (default 20)");
    auto* o_wr = run->add_option("--w-remote", flags.adapt.w_remote, "Remote sigma window (default 20)");
    auto* o_lw = run->add_option("--local-weight", flags.adapt.local_weight, "Weight of the local rate (default 0.3)");
    auto* o_scenario = run->add_option("--scenario", scenario_name, "benchmark-consume2 | count-aggregate");
    auto* o_delivery = run->add_option("--delivery-order", delivery_name, "shuffled | by-sender (default shuffled)");
    run->add_option("--preset", preset, "Experiment preset");
    run->add_option("--out", out_dir, "Output directory (default out)");
    run->add_option("--config", config_path, "JSON configuration file; flags override it");
    run->add_flag("--trace", trace, "Also write the message trace of the first run");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e, out, err);
    }

    try
    {
        SimConfig cfg;
        if (!preset.empty())
        {
            apply_preset_base(preset, cfg);
        }
        if (!config_path.empty())
        {
            std::ifstream f(config_path);
            if (!f)
            {
                throw UsageError("cannot read config file " + config_path);
            }
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse(f);
                apply_config_json(j, cfg);
            }
            catch (const nlohmann::json::exception& e)
            {
                throw UsageError(std::string("bad config file: ") + e.what());
            }
        }
        auto given = [](const CLI::Option* o) { return o->count() > 0; };
        if (given(o_nodes)) cfg.nodes = flags.nodes;
        if (given(o_molecules)) cfg.molecules = flags.molecules;
        if (given(o_threshold)) cfg.adapt.threshold = flags.adapt.threshold;
        if (given(o_seed)) cfg.seed = flags.seed;
        if (given(o_runs)) cfg.runs = flags.runs;
        if (given(o_steps)) cfg.max_steps = flags.max_steps;
        if (given(o_cycle)) cfg.cycle_len = flags.cycle_len;
        if (given(o_wl)) cfg.adapt.w_local = flags.adapt.w_local;
        if (given(o_wr)) cfg.adapt.w_remote = flags.adapt.w_remote;
        if (given(o_lw)) cfg.adapt.local_weight = flags.adapt.local_weight;
        if (given(o_mode))
        {
            const auto m = parse_mode(mode_name);
            if (!m)
            {
                throw UsageError("unknown mode '" + mode_name + "'");
            }
            cfg.mode = *m;
        }
        if (given(o_scenario))
        {
            const auto s = parse_scenario(scenario_name);
            if (!s)
            {
                throw UsageError("unknown scenario '" + scenario_name + "'");
            }
            cfg.scenario = *s;
        }
        if (given(o_delivery))
        {
            if (delivery_name != "shuffled" && delivery_name != "by-sender")
            {
                throw UsageError("unknown delivery order '" + delivery_name + "'");
            }
            cfg.delivery = delivery_name == "shuffled" ? DeliveryOrder::shuffled : DeliveryOrder::by_sender;
        }

        const auto entries = expand_preset(preset, cfg);
        for (const auto& e : entries)
        {
            try
            {
                e.config.validate();
            }
            catch (const std::invalid_argument& ex)
            {
                throw UsageError(ex.what());
            }
        }

        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        if (preset == "exp1-modes")
        {
            std::ostringstream os;
            report::write_optimum_csv(os, theoretic_optimum(cfg.nodes, cfg.molecules));
            write_file(dir / "exp1_optimum.csv", os.str());
        }
        for (const auto& e : entries)
        {
            const auto agg = run_entry(e, dir, trace);
            out << e.label << ": inertia " << agg.inertia_fraction * 100.0 << "% of " << agg.runs << " runs";
            if (agg.mean_steps_to_inertia)
            {
                out << ", mean steps " << *agg.mean_steps_to_inertia;
            }
            out << '\n';
        }
        return 0;
    }
    catch (const UsageError& e)
    {
        err << "error: " << e.what() << '\n' << run->help();
        return 2;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline int main(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args)
    {
        argv.push_back(a.c_str());
    }
    return main(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace molcap::cli
