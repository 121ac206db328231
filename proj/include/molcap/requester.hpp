#pragma once

// Requester-side capture of one combination at a time.

#include "protocol.hpp"
#include "types.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

namespace molcap {

enum class Phase : std::uint8_t
{
    none,
    opt_fetch,
    query,
    commitment,
    fetch,
};

struct Target
{
    MoleculeId molecule = 0;
    NodeId holder;
};

struct AttemptState
{
    AttemptId attempt = 0;
    // Index of the rule in the scenario's rule list.
    std::size_t rule = 0;
    std::vector<Target> combination;
    Phase phase = Phase::none;
    RequestType mode = RequestType::optimistic;
    // Molecules whose reply for the current phase is still outstanding.
    std::vector<MoleculeId> pending;
    // Payloads received so far, by combination position.
    std::vector<std::optional<Payload>> gathered;
};

struct Outgoing
{
    NodeId to;
    ProtocolMessage msg;
};

enum class AttemptEvent : std::uint8_t
{
    ignored,
    progressed,
    abandoned,
    completed,
};

struct ResponseResult
{
    AttemptEvent event = AttemptEvent::ignored;
    std::vector<Outgoing> out;
    // Filled on completion, in combination order.
    std::vector<Molecule> reactants;
};

class Requester
{
public:
    const AttemptState& state() const noexcept { return m_state; }
    bool idle() const noexcept { return m_state.phase == Phase::none; }

    std::vector<Outgoing> start_attempt(std::size_t rule, std::vector<Target> combination, RequestType mode)
    {
        if (!idle())
        {
            throw std::logic_error("start_attempt: attempt already in progress");
        }
        if (combination.empty())
        {
            throw std::invalid_argument("start_attempt: empty combination");
        }
        for (std::size_t i = 0; i < combination.size(); ++i)
        {
            for (std::size_t j = i + 1; j < combination.size(); ++j)
            {
                if (combination[i].molecule == combination[j].molecule)
                {
                    throw std::invalid_argument("start_attempt: molecule repeated in combination");
                }
            }
        }
        m_state.attempt = m_next_attempt++;
        m_state.rule = rule;
        m_state.combination = std::move(combination);
        m_state.mode = mode;
        m_state.gathered.assign(m_state.combination.size(), std::nullopt);
        if (mode == RequestType::optimistic)
        {
            return enter(Phase::opt_fetch, MessageKind::fetch);
        }
        return enter(Phase::query, MessageKind::query);
    }

    ResponseResult on_response(const ProtocolMessage& resp)
    {
        if (!matches(resp))
        {
            return {};
        }
        return m_state.mode == RequestType::optimistic ? on_response_optimistic(resp) : on_response_pessimistic(resp);
    }

    ResponseResult on_response_pessimistic(const ProtocolMessage& resp)
    {
        if (!matches(resp) || m_state.mode != RequestType::pessimistic)
        {
            return {};
        }
        if (m_state.phase == Phase::fetch)
        {
            if (resp.kind != MessageKind::resp_molecule || !resp.molecule_payload)
            {
                throw std::logic_error("pessimistic fetch refused by a committed holder");
            }
            gather(resp);
            if (!m_state.pending.empty())
            {
                return {AttemptEvent::progressed, {}, {}};
            }
            return complete({});
        }
        if (resp.kind != MessageKind::resp_ok)
        {
            return abandon();
        }
        settle(resp.molecule);
        if (!m_state.pending.empty())
        {
            return {AttemptEvent::progressed, {}, {}};
        }
        if (m_state.phase == Phase::query)
        {
            return {AttemptEvent::progressed, enter(Phase::commitment, MessageKind::commitment), {}};
        }
        return {AttemptEvent::progressed, enter(Phase::fetch, MessageKind::fetch), {}};
    }

    ResponseResult on_response_optimistic(const ProtocolMessage& resp)
    {
        if (!matches(resp) || m_state.phase != Phase::opt_fetch)
        {
            return {};
        }
        if (resp.kind != MessageKind::resp_molecule || !resp.molecule_payload)
        {
            return abandon();
        }
        gather(resp);
        if (!m_state.pending.empty())
        {
            return {AttemptEvent::progressed, {}, {}};
        }
        return complete(broadcast(MessageKind::reaction));
    }

private:
    // Current attempt, an outstanding phase, and a molecule still awaited.
    bool matches(const ProtocolMessage& resp) const
    {
        return m_state.phase != Phase::none && resp.attempt == m_state.attempt &&
               std::find(m_state.pending.begin(), m_state.pending.end(), resp.molecule) != m_state.pending.end();
    }

    std::vector<Outgoing> broadcast(MessageKind kind) const
    {
        std::vector<Outgoing> out;
        out.reserve(m_state.combination.size());
        for (const auto& t : m_state.combination)
        {
            ProtocolMessage m;
            m.kind = kind;
            m.molecule = t.molecule;
            m.attempt = m_state.attempt;
            m.request_type = m_state.mode;
            out.push_back(Outgoing{t.holder, std::move(m)});
        }
        return out;
    }

    std::vector<Outgoing> enter(Phase phase, MessageKind kind)
    {
        m_state.phase = phase;
        m_state.pending.clear();
        for (const auto& t : m_state.combination)
        {
            m_state.pending.push_back(t.molecule);
        }
        return broadcast(kind);
    }

    void settle(MoleculeId molecule) { std::erase(m_state.pending, molecule); }

    void gather(const ProtocolMessage& resp)
    {
        for (std::size_t i = 0; i < m_state.combination.size(); ++i)
        {
            if (m_state.combination[i].molecule == resp.molecule)
            {
                m_state.gathered[i] = *resp.molecule_payload;
            }
        }
        settle(resp.molecule);
    }

    ResponseResult abandon()
    {
        ResponseResult r{AttemptEvent::abandoned, broadcast(MessageKind::give_up), {}};
        reset();
        return r;
    }

    ResponseResult complete(std::vector<Outgoing> out)
    {
        ResponseResult r{AttemptEvent::completed, std::move(out), {}};
        for (std::size_t i = 0; i < m_state.combination.size(); ++i)
        {
            r.reactants.push_back(Molecule{m_state.combination[i].molecule, *m_state.gathered[i]});
        }
        reset();
        return r;
    }

    void reset()
    {
        m_state.phase = Phase::none;
        m_state.pending.clear();
    }

    AttemptState m_state;
    AttemptId m_next_attempt = 1;
};

} // namespace molcap
