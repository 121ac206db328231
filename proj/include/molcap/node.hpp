#pragma once

// One simulated machine: holder of its molecules and requester of one
// combination at a time.

#include "adapt.hpp"
#include "holder.hpp"
#include "netsim.hpp"
#include "protocol.hpp"
#include "requester.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace molcap {

using MessageEnvelope = Envelope<ProtocolMessage>;

struct CompletedCapture
{
    NodeId requester;
    AttemptId attempt = 0;
    std::size_t rule = 0;
    std::vector<Molecule> reactants;
};

struct NodeOutput
{
    std::vector<Outgoing> out;
    std::optional<CompletedCapture> completed;
};

class Node
{
public:
    Node(NodeId id, AdaptConfig cfg) : m_id(id), m_tracker(cfg) {}

    NodeId id() const noexcept { return m_id; }

    void hold(Molecule m)
    {
        const auto id = m.id;
        if (!m_store.try_emplace(id, std::move(m)).second)
        {
            throw std::logic_error("Node::hold: molecule " + std::to_string(id) + " already held");
        }
    }

    const HolderRecord* record(MoleculeId id) const
    {
        const auto it = m_store.find(id);
        return it == m_store.end() ? nullptr : &it->second;
    }

    const Requester& requester() const noexcept { return m_requester; }
    const SuccessTracker& tracker() const noexcept { return m_tracker; }
    bool idle() const noexcept { return m_requester.idle(); }

    std::uint64_t reactions() const noexcept { return m_reactions; }
    void count_reaction() noexcept { ++m_reactions; }

    // Applies the switch rule for an r-molecule attempt, or records a forced mode.
    RequestType decide(std::size_t r, std::optional<RequestType> forced = std::nullopt)
    {
        m_last_decision = forced ? *forced : m_tracker.choose_protocol(r);
        return *m_last_decision;
    }
    std::optional<RequestType> last_decision() const noexcept { return m_last_decision; }

    std::vector<Outgoing> begin_attempt(std::size_t rule, std::vector<Target> combination, RequestType mode)
    {
        auto out = m_requester.start_attempt(rule, std::move(combination), mode);
        stamp(out);
        return out;
    }

    // Handles one step's deliveries. Holder-bound requests go first, in
    // coexistence order; replies to our own attempt follow in arrival order.
    NodeOutput receive(std::span<const MessageEnvelope> inbox)
    {
        NodeOutput result;
        std::vector<const MessageEnvelope*> requests;
        std::vector<const MessageEnvelope*> replies;
        for (const auto& env : inbox)
        {
            if (env.to != m_id)
            {
                throw std::logic_error("Node::receive: envelope for another node");
            }
            m_tracker.record_remote_sigma(env.payload.sender_sigma);
            (is_request(env.payload.kind) ? requests : replies).push_back(&env);
        }
        resolve_coexistence(requests, [](const MessageEnvelope* e) -> const ProtocolMessage& { return e->payload; });

        for (const auto* env : requests)
        {
            auto it = m_store.find(env->payload.molecule);
            if (it == m_store.end())
            {
                throw std::logic_error("Node::receive: request for molecule " +
                                       std::to_string(env->payload.molecule) + " not held here");
            }
            if (auto reply = handle_request(env->from, env->payload, it->second))
            {
                result.out.push_back(Outgoing{env->from, std::move(*reply)});
            }
        }

        for (const auto* env : replies)
        {
            auto r = m_requester.on_response(env->payload);
            if (r.event == AttemptEvent::abandoned)
            {
                m_tracker.record_outcome(false);
            }
            else if (r.event == AttemptEvent::completed)
            {
                m_tracker.record_outcome(true);
                result.completed =
                    CompletedCapture{m_id, env->payload.attempt, m_requester.state().rule, std::move(r.reactants)};
            }
            for (auto& o : r.out)
            {
                result.out.push_back(std::move(o));
            }
        }
        stamp(result.out);
        return result;
    }

private:
    void stamp(std::vector<Outgoing>& out) const
    {
        for (auto& o : out)
        {
            o.msg.sender_reactions = m_reactions;
            o.msg.sender_sigma = m_tracker.sigma_local();
        }
    }

    NodeId m_id;
    SuccessTracker m_tracker;
    Requester m_requester;
    std::unordered_map<MoleculeId, HolderRecord> m_store;
    std::uint64_t m_reactions = 0;
    std::optional<RequestType> m_last_decision;
};

} // namespace molcap
