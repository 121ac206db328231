#pragma once

// Per-run measurements, message classification, baselines and run averaging.

#include "chemistry.hpp"
#include "protocol.hpp"
#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace molcap {

// One envelope as sent; also the message-trace CSV row.
struct TraceRecord
{
    Step step = 0;
    NodeId from;
    NodeId to;
    MessageKind kind = MessageKind::query;
    MoleculeId molecule = 0;
    AttemptId attempt = 0;
    RequestType request_type = RequestType::optimistic;

    // The requester whose attempt this envelope belongs to.
    NodeId owner() const noexcept { return is_request(kind) ? from : to; }
};

struct RunMetrics
{
    // Indexed by step, from 0 to the final step inclusive.
    std::vector<std::uint64_t> reactions_left;
    std::vector<std::uint32_t> optimistic_nodes;
    std::vector<std::uint32_t> pessimistic_nodes;
    // Indexed by cycle.
    std::vector<std::uint64_t> messages_useful;
    std::vector<std::uint64_t> messages_useless;
    std::optional<Step> steps_to_inertia;
    std::uint64_t total_reactions = 0;
    std::uint64_t total_messages = 0;
    // Per node: step of the last optimistic -> pessimistic switch, if the
    // node ended the run pessimistic after having been optimistic.
    std::vector<std::optional<Step>> final_switch_step;
};

struct CycleCounts
{
    std::vector<std::uint64_t> useful;
    std::vector<std::uint64_t> useless;

    std::uint64_t total_useful() const noexcept { return sum(useful); }
    std::uint64_t total_useless() const noexcept { return sum(useless); }

private:
    static std::uint64_t sum(const std::vector<std::uint64_t>& v) noexcept
    {
        std::uint64_t s = 0;
        for (auto x : v)
        {
            s += x;
        }
        return s;
    }
};

// A message is useful iff its attempt ended in a logged reaction. Buckets
// are cycle = send step / cycle_len.
inline CycleCounts classify_messages(std::span<const TraceRecord> trace, std::span<const ReactionRecord> reactions,
                                     std::size_t cycle_len)
{
    if (cycle_len == 0)
    {
        throw std::invalid_argument("classify_messages: cycle_len must be at least 1");
    }
    std::set<std::pair<NodeId, AttemptId>> successful;
    for (const auto& r : reactions)
    {
        successful.emplace(r.requester, r.attempt);
    }
    CycleCounts counts;
    for (const auto& t : trace)
    {
        const std::size_t cycle = t.step / cycle_len;
        if (cycle >= counts.useful.size())
        {
            counts.useful.resize(cycle + 1, 0);
            counts.useless.resize(cycle + 1, 0);
        }
        if (successful.contains({t.owner(), t.attempt}))
        {
            ++counts.useful[cycle];
        }
        else
        {
            ++counts.useless[cycle];
        }
    }
    return counts;
}

// Centralised baseline for the consume-two benchmark: every node completes
// one reaction per two-step round trip. R(t) = max(0, M/2 - floor(n t / 2)),
// listed from t = 0 until it first reaches zero.
inline std::vector<std::uint64_t> theoretic_optimum(std::size_t nodes, std::size_t molecules)
{
    if (nodes == 0)
    {
        throw std::invalid_argument("theoretic_optimum: need at least one node");
    }
    const std::uint64_t total = molecules / 2;
    std::vector<std::uint64_t> curve;
    for (std::uint64_t t = 0;; ++t)
    {
        const std::uint64_t done = nodes * t / 2;
        curve.push_back(done >= total ? 0 : total - done);
        if (curve.back() == 0)
        {
            break;
        }
    }
    return curve;
}

// Steps between the first and the last node's final switch to pessimistic.
// Empty when some node never switched for good.
inline std::optional<Step> switch_spread(const RunMetrics& m)
{
    if (m.final_switch_step.empty())
    {
        return std::nullopt;
    }
    Step lo = ~Step{0};
    Step hi = 0;
    for (const auto& s : m.final_switch_step)
    {
        if (!s)
        {
            return std::nullopt;
        }
        lo = std::min(lo, *s);
        hi = std::max(hi, *s);
    }
    return hi - lo;
}

// Step at which the last node made its final switch.
inline std::optional<Step> global_switch_step(const RunMetrics& m)
{
    if (!switch_spread(m))
    {
        return std::nullopt;
    }
    Step hi = 0;
    for (const auto& s : m.final_switch_step)
    {
        hi = std::max(hi, *s);
    }
    return hi;
}

struct AggregateMetrics
{
    std::size_t runs = 0;
    std::vector<double> reactions_left;
    std::vector<double> optimistic_nodes;
    std::vector<double> pessimistic_nodes;
    std::vector<double> messages_useful;
    std::vector<double> messages_useless;
    double inertia_fraction = 0.0;
    // Over the runs that reached inertia.
    std::optional<double> mean_steps_to_inertia;
    std::optional<Step> min_steps_to_inertia;
    std::optional<Step> max_steps_to_inertia;
    double mean_total_messages = 0.0;
    double mean_total_reactions = 0.0;
};

namespace detail {

template <typename T>
std::vector<double> pointwise_mean(std::span<const RunMetrics> runs, const std::vector<T> RunMetrics::*field)
{
    std::size_t len = 0;
    for (const auto& r : runs)
    {
        len = std::max(len, (r.*field).size());
    }
    std::vector<double> mean(len, 0.0);
    for (const auto& r : runs)
    {
        const auto& v = r.*field;
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            mean[i] += static_cast<double>(v[i]);
        }
    }
    for (auto& x : mean)
    {
        x /= static_cast<double>(runs.size());
    }
    return mean;
}

} // namespace detail

// Pointwise mean; a run that stopped early counts as zero after its end.
inline AggregateMetrics aggregate(std::span<const RunMetrics> runs)
{
    if (runs.empty())
    {
        throw std::invalid_argument("aggregate: no runs");
    }
    AggregateMetrics a;
    a.runs = runs.size();
    a.reactions_left = detail::pointwise_mean(runs, &RunMetrics::reactions_left);
    a.optimistic_nodes = detail::pointwise_mean(runs, &RunMetrics::optimistic_nodes);
    a.pessimistic_nodes = detail::pointwise_mean(runs, &RunMetrics::pessimistic_nodes);
    a.messages_useful = detail::pointwise_mean(runs, &RunMetrics::messages_useful);
    a.messages_useless = detail::pointwise_mean(runs, &RunMetrics::messages_useless);

    std::size_t inert = 0;
    double steps_sum = 0.0;
    for (const auto& r : runs)
    {
        a.mean_total_messages += static_cast<double>(r.total_messages);
        a.mean_total_reactions += static_cast<double>(r.total_reactions);
        if (!r.steps_to_inertia)
        {
            continue;
        }
        ++inert;
        const Step s = *r.steps_to_inertia;
        steps_sum += static_cast<double>(s);
        a.min_steps_to_inertia = a.min_steps_to_inertia ? std::min(*a.min_steps_to_inertia, s) : s;
        a.max_steps_to_inertia = a.max_steps_to_inertia ? std::max(*a.max_steps_to_inertia, s) : s;
    }
    a.mean_total_messages /= static_cast<double>(runs.size());
    a.mean_total_reactions /= static_cast<double>(runs.size());
    a.inertia_fraction = static_cast<double>(inert) / static_cast<double>(runs.size());
    if (inert > 0)
    {
        a.mean_steps_to_inertia = steps_sum / static_cast<double>(inert);
    }
    return a;
}

} // namespace molcap
