#pragma once

// Full simulations: scenario setup, the step loop, metrics and multi-run sweeps.

#include "adapt.hpp"
#include "chemistry.hpp"
#include "metrics.hpp"
#include "netsim.hpp"
#include "node.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

namespace molcap {

enum class Mode : std::uint8_t
{
    optimistic_only,
    pessimistic_only,
    mixed,
};

inline constexpr std::string_view to_string(Mode m) noexcept
{
    switch (m)
    {
    case Mode::optimistic_only:
        return "optimistic";
    case Mode::pessimistic_only:
        return "pessimistic";
    case Mode::mixed:
        return "mixed";
    }
    return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s)
{
    if (s == "optimistic" || s == "optimistic-only")
    {
        return Mode::optimistic_only;
    }
    if (s == "pessimistic" || s == "pessimistic-only")
    {
        return Mode::pessimistic_only;
    }
    if (s == "mixed")
    {
        return Mode::mixed;
    }
    return std::nullopt;
}

enum class ScenarioKind : std::uint8_t
{
    benchmark_consume2,
    count_aggregate,
};

inline constexpr std::string_view to_string(ScenarioKind k) noexcept
{
    return k == ScenarioKind::benchmark_consume2 ? "benchmark-consume2" : "count-aggregate";
}

inline std::optional<ScenarioKind> parse_scenario(std::string_view s)
{
    if (s == "benchmark-consume2")
    {
        return ScenarioKind::benchmark_consume2;
    }
    if (s == "count-aggregate")
    {
        return ScenarioKind::count_aggregate;
    }
    return std::nullopt;
}

struct SimConfig
{
    std::size_t nodes = 250;
    std::size_t molecules = 15000;
    ScenarioKind scenario = ScenarioKind::benchmark_consume2;
    Mode mode = Mode::mixed;
    AdaptConfig adapt;
    std::uint64_t seed = 42;
    std::size_t runs = 50;
    Step max_steps = 500;
    std::size_t cycle_len = 12;
    DeliveryOrder delivery = DeliveryOrder::shuffled;

    void validate() const
    {
        if (nodes == 0)
        {
            throw std::invalid_argument("nodes must be at least 1");
        }
        if (runs == 0)
        {
            throw std::invalid_argument("runs must be at least 1");
        }
        if (max_steps == 0)
        {
            throw std::invalid_argument("max_steps must be at least 1");
        }
        if (cycle_len == 0)
        {
            throw std::invalid_argument("cycle_len must be at least 1");
        }
        if (nodes > std::numeric_limits<std::uint32_t>::max())
        {
            throw std::invalid_argument("too many nodes");
        }
        adapt.validate();
    }
};

inline const std::vector<std::string>& count_aggregate_words()
{
    static const std::vector<std::string> words{"maecenas", "ligula",  "massa", "varius", "a",
                                                "semper",   "congue",  "euismod", "non", "mi"};
    return words;
}

struct Scenario
{
    std::vector<ReactionRule> rules;
    std::vector<Payload> initial;
    // Reactions still needed to reach inertia from the given state.
    std::function<std::uint64_t(const Multiset&)> reactions_left;
};

inline Scenario make_scenario(const SimConfig& cfg)
{
    Scenario s;
    if (cfg.scenario == ScenarioKind::benchmark_consume2)
    {
        s.rules = {rules::consume2()};
        s.initial.reserve(cfg.molecules);
        for (std::size_t i = 0; i < cfg.molecules; ++i)
        {
            s.initial.emplace_back(static_cast<std::int64_t>(i));
        }
        s.reactions_left = [](const Multiset& m) { return static_cast<std::uint64_t>(m.size() / 2); };
        return s;
    }
    s.rules = {rules::count(), rules::aggregate()};
    for (const auto& w : count_aggregate_words())
    {
        s.initial.emplace_back(w);
    }
    // Every countable string is counted once, then all integers fold into one.
    s.reactions_left = [](const Multiset& m) {
        std::uint64_t countable = 0;
        std::uint64_t ints = 0;
        for (const auto& mol : m.live())
        {
            if (const auto* str = std::get_if<std::string>(&mol.payload))
            {
                countable += str->size() >= 2 ? 1 : 0;
            }
            else
            {
                ++ints;
            }
        }
        const std::uint64_t final_ints = ints + countable;
        return countable + (final_ints > 0 ? final_ints - 1 : 0);
    };
    return s;
}

// Who may start attempts and with which combination. The default draws a
// random rule and random matching live molecules from the global registry.
using CombinationPicker =
    std::function<std::optional<std::pair<std::size_t, std::vector<Molecule>>>(NodeId, const Multiset&, std::mt19937_64&)>;

class Simulation
{
public:
    Simulation(SimConfig cfg, std::uint64_t seed) : Simulation(cfg, seed, make_scenario(cfg)) {}

    // `placement`, when given, pins initial molecule i on node placement[i].
    Simulation(SimConfig cfg, std::uint64_t seed, Scenario scenario, std::vector<NodeId> placement = {})
        : m_cfg(std::move(cfg)), m_scenario(std::move(scenario)), m_rng(seed),
          m_transport(m_cfg.nodes, m_cfg.delivery, seed ^ 0x9e3779b97f4a7c15ULL)
    {
        m_cfg.validate();
        m_nodes.reserve(m_cfg.nodes);
        for (std::size_t i = 0; i < m_cfg.nodes; ++i)
        {
            m_nodes.emplace_back(NodeId{static_cast<std::uint32_t>(i)}, m_cfg.adapt);
        }
        for (auto& p : m_scenario.initial)
        {
            m_multiset.insert(std::move(p));
        }
        m_scenario.initial.clear();

        const auto live = m_multiset.live();
        if (placement.empty())
        {
            m_holder_of = disseminate(live, m_cfg.nodes, m_rng);
        }
        else
        {
            if (placement.size() != live.size())
            {
                throw std::invalid_argument("Simulation: placement size mismatch");
            }
            for (std::size_t i = 0; i < live.size(); ++i)
            {
                if (placement[i].value >= m_cfg.nodes)
                {
                    throw std::out_of_range("Simulation: placement node out of range");
                }
                m_holder_of.emplace(live[i].id, placement[i]);
            }
        }
        for (const auto& m : live)
        {
            m_nodes[m_holder_of.at(m.id).value].hold(m);
        }
        m_switch_step.assign(m_cfg.nodes, std::nullopt);
        m_picker = [this](NodeId, const Multiset& ms, std::mt19937_64& rng) { return default_pick(ms, rng); };
    }

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    void set_picker(CombinationPicker picker) { m_picker = std::move(picker); }

    const SimConfig& config() const noexcept { return m_cfg; }
    const Scenario& scenario() const noexcept { return m_scenario; }
    const Multiset& multiset() const noexcept { return m_multiset; }
    const std::vector<Node>& nodes() const noexcept { return m_nodes; }
    const std::vector<ReactionRecord>& reaction_log() const noexcept { return m_reactions; }
    const std::vector<TraceRecord>& trace() const noexcept { return m_trace; }
    const Transport<ProtocolMessage>& transport() const noexcept { return m_transport; }
    NodeId holder_of(MoleculeId id) const { return m_holder_of.at(id); }
    Step now() const noexcept { return m_transport.now(); }
    bool finished() const noexcept { return m_finished; }

    bool inert() const { return is_inert(m_multiset, m_scenario.rules); }

    // Runs one step: deliver, process, apply reactions, start new attempts,
    // then record metrics. Returns false once the run is over.
    bool advance()
    {
        if (m_finished)
        {
            return false;
        }
        if (m_started)
        {
            deliver(m_transport.tick());
        }
        m_started = true;
        const Step t = m_transport.now();

        for (auto& node : m_nodes)
        {
            if (node.idle())
            {
                start_attempt(node);
            }
        }
        record_step(t);

        if (inert())
        {
            m_metrics.steps_to_inertia = t;
            m_finished = true;
        }
        else if (t >= m_cfg.max_steps)
        {
            m_finished = true;
        }
        return !m_finished;
    }

    RunMetrics run()
    {
        while (advance())
        {
        }
        return metrics();
    }

    // Snapshot of metrics gathered so far, with message classes filled in.
    RunMetrics metrics() const
    {
        RunMetrics m = m_metrics;
        auto counts = classify_messages(m_trace, m_reactions, m_cfg.cycle_len);
        const std::size_t cycles = m.reactions_left.empty() ? 0 : (m.reactions_left.size() - 1) / m_cfg.cycle_len + 1;
        counts.useful.resize(std::max(cycles, counts.useful.size()), 0);
        counts.useless.resize(std::max(cycles, counts.useless.size()), 0);
        m.messages_useful = std::move(counts.useful);
        m.messages_useless = std::move(counts.useless);
        m.total_reactions = m_reactions.size();
        m.total_messages = m_trace.size();
        m.final_switch_step.assign(m_cfg.nodes, std::nullopt);
        for (std::size_t i = 0; i < m_nodes.size(); ++i)
        {
            if (m_nodes[i].last_decision() == RequestType::pessimistic)
            {
                m.final_switch_step[i] = m_switch_step[i];
            }
        }
        return m;
    }

private:
    std::optional<std::pair<std::size_t, std::vector<Molecule>>> default_pick(const Multiset& ms, std::mt19937_64& rng)
    {
        std::vector<std::size_t> order(m_scenario.rules.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (auto r : order)
        {
            if (auto combo = sample_combination(m_scenario.rules[r], ms.live(), rng))
            {
                return std::make_pair(r, std::move(*combo));
            }
        }
        return std::nullopt;
    }

    void deliver(const std::vector<MessageEnvelope>& due)
    {
        std::vector<CompletedCapture> completed;
        std::size_t i = 0;
        while (i < due.size())
        {
            std::size_t j = i;
            while (j < due.size() && due[j].to == due[i].to)
            {
                ++j;
            }
            Node& node = m_nodes[due[i].to.value];
            auto result = node.receive(std::span<const MessageEnvelope>(due.data() + i, j - i));
            send_all(node.id(), result.out);
            if (result.completed)
            {
                completed.push_back(std::move(*result.completed));
            }
            i = j;
        }
        for (auto& c : completed)
        {
            apply(c);
        }
    }

    void apply(const CompletedCapture& c)
    {
        const ReactionRule& rule = m_scenario.rules.at(c.rule);
        auto produced = m_multiset.apply_reaction(rule, c.reactants);
        ReactionRecord rec;
        rec.step = m_transport.now();
        rec.requester = c.requester;
        rec.attempt = c.attempt;
        rec.rule_name = rule.name;
        for (const auto& m : c.reactants)
        {
            rec.consumed.push_back(m.id);
        }
        std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(m_cfg.nodes - 1));
        for (auto& m : produced)
        {
            rec.produced.push_back(m.id);
            const NodeId holder{pick(m_rng)};
            m_holder_of.emplace(m.id, holder);
            m_nodes[holder.value].hold(m);
        }
        m_nodes[c.requester.value].count_reaction();
        m_reactions.push_back(std::move(rec));
    }

    void start_attempt(Node& node)
    {
        auto pick = m_picker(node.id(), m_multiset, m_rng);
        if (!pick)
        {
            return;
        }
        auto& [rule, molecules] = *pick;
        std::optional<RequestType> forced;
        if (m_cfg.mode == Mode::optimistic_only)
        {
            forced = RequestType::optimistic;
        }
        else if (m_cfg.mode == Mode::pessimistic_only)
        {
            forced = RequestType::pessimistic;
        }
        const auto before = node.last_decision();
        const RequestType mode = node.decide(molecules.size(), forced);
        auto& switched = m_switch_step[node.id().value];
        if (mode == RequestType::optimistic)
        {
            switched.reset();
        }
        else if (before == RequestType::optimistic)
        {
            switched = m_transport.now();
        }

        std::vector<Target> combination;
        for (const auto& m : molecules)
        {
            combination.push_back(Target{m.id, m_holder_of.at(m.id)});
        }
        send_all(node.id(), node.begin_attempt(rule, std::move(combination), mode));
    }

    void send_all(NodeId from, std::vector<Outgoing>& out)
    {
        const Step t = m_transport.now();
        for (auto& o : out)
        {
            m_trace.push_back(
                TraceRecord{t, from, o.to, o.msg.kind, o.msg.molecule, o.msg.attempt, o.msg.request_type});
            m_transport.send(MessageEnvelope{from, o.to, t, std::move(o.msg)});
        }
    }

    void send_all(NodeId from, std::vector<Outgoing>&& out) { send_all(from, out); }

    void record_step(Step)
    {
        m_metrics.reactions_left.push_back(m_scenario.reactions_left(m_multiset));
        std::uint32_t opt = 0;
        std::uint32_t pess = 0;
        for (const auto& n : m_nodes)
        {
            if (n.last_decision() == RequestType::optimistic)
            {
                ++opt;
            }
            else if (n.last_decision() == RequestType::pessimistic)
            {
                ++pess;
            }
        }
        m_metrics.optimistic_nodes.push_back(opt);
        m_metrics.pessimistic_nodes.push_back(pess);
    }

    SimConfig m_cfg;
    Scenario m_scenario;
    std::mt19937_64 m_rng;
    Transport<ProtocolMessage> m_transport;
    Multiset m_multiset;
    std::vector<Node> m_nodes;
    std::unordered_map<MoleculeId, NodeId> m_holder_of;
    std::vector<ReactionRecord> m_reactions;
    std::vector<TraceRecord> m_trace;
    std::vector<std::optional<Step>> m_switch_step;
    CombinationPicker m_picker;
    RunMetrics m_metrics;
    bool m_started = false;
    bool m_finished = false;
};

// Seed of the index-th repetition.
inline std::uint64_t run_seed(std::uint64_t base, std::size_t index)
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline RunMetrics run_one(const SimConfig& cfg, std::uint64_t seed)
{
    Simulation sim(cfg, seed);
    return sim.run();
}

// All cfg.runs repetitions; runs are independent and may execute on worker
// threads, results come back in run order.
inline std::vector<RunMetrics> run_many(const SimConfig& cfg, unsigned workers = std::thread::hardware_concurrency())
{
    cfg.validate();
    std::vector<RunMetrics> results(cfg.runs);
    workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(cfg.runs));
    if (workers == 1)
    {
        for (std::size_t i = 0; i < cfg.runs; ++i)
        {
            results[i] = run_one(cfg, run_seed(cfg.seed, i));
        }
        return results;
    }

    std::mutex lock;
    std::size_t next = 0;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;)
        {
            std::size_t i;
            {
                std::lock_guard g(lock);
                if (next >= cfg.runs || failure)
                {
                    return;
                }
                i = next++;
            }
            try
            {
                results[i] = run_one(cfg, run_seed(cfg.seed, i));
            }
            catch (...)
            {
                std::lock_guard g(lock);
                failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
    {
        pool.emplace_back(worker);
    }
    pool.clear();
    if (failure)
    {
        std::rethrow_exception(failure);
    }
    return results;
}

} // namespace molcap
