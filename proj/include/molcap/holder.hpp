#pragma once

// Holder-side arbitration for one molecule, for both sub-protocols.

#include "protocol.hpp"
#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace molcap {

struct Waiter
{
    NodeId node;
    std::uint64_t reactions = 0;
    AttemptId attempt = 0;

    friend bool operator==(const Waiter&, const Waiter&) = default;
};

// A requester attempt that currently owns a lock or a reservation.
struct Grant
{
    NodeId node;
    AttemptId attempt = 0;

    friend bool operator==(const Grant&, const Grant&) = default;
};

enum class HolderState : std::uint8_t
{
    available,
    queried,
    committed,
    taken_opt,
    removed,
};

struct HolderRecord
{
    Molecule molecule;
    // Pessimistic requesters that got RESP_OK to a QUERY; no duplicate nodes.
    std::vector<Waiter> waiters;
    std::optional<Grant> locker;
    std::optional<Grant> reserver;
    bool removed = false;

    explicit HolderRecord(Molecule m) : molecule(std::move(m)) {}

    HolderState state() const noexcept
    {
        if (removed)
        {
            return HolderState::removed;
        }
        if (reserver)
        {
            return HolderState::taken_opt;
        }
        if (locker)
        {
            return HolderState::committed;
        }
        return waiters.empty() ? HolderState::available : HolderState::queried;
    }
};

// Orders waiters by (completed reactions, node id) ascending and returns the
// head, which becomes the locker.
inline Waiter sort_requesters(std::vector<Waiter>& waiters)
{
    if (waiters.empty())
    {
        throw std::invalid_argument("sort_requesters: no waiters");
    }
    std::sort(waiters.begin(), waiters.end(), [](const Waiter& a, const Waiter& b) {
        return a.reactions != b.reactions ? a.reactions < b.reactions : a.node < b.node;
    });
    return waiters.front();
}

namespace detail {

inline ProtocolMessage reply_to(const ProtocolMessage& request, MessageKind kind)
{
    ProtocolMessage out;
    out.kind = kind;
    out.molecule = request.molecule;
    out.attempt = request.attempt;
    out.request_type = request.request_type;
    return out;
}

inline void erase_waiter(std::vector<Waiter>& waiters, NodeId node)
{
    std::erase_if(waiters, [node](const Waiter& w) { return w.node == node; });
}

} // namespace detail

// Pessimistic holder. Returns the reply, if any. The branch order follows the
// three-phase holder: release, existence, fetch, lock check, query, commit.
inline std::optional<ProtocolMessage> handle_pessimistic(NodeId sender, const ProtocolMessage& msg, HolderRecord& rec)
{
    if (msg.request_type != RequestType::pessimistic)
    {
        throw std::invalid_argument("handle_pessimistic: optimistic message");
    }
    const Grant from{sender, msg.attempt};

    if (msg.kind == MessageKind::give_up)
    {
        if (rec.removed)
        {
            return std::nullopt;
        }
        std::erase_if(rec.waiters, [&](const Waiter& w) { return w.node == sender && w.attempt == msg.attempt; });
        if (rec.locker == from)
        {
            rec.locker.reset();
            if (!rec.waiters.empty())
            {
                const Waiter head = sort_requesters(rec.waiters);
                rec.locker = Grant{head.node, head.attempt};
            }
        }
        return std::nullopt;
    }
    if (rec.removed)
    {
        return detail::reply_to(msg, MessageKind::resp_removed);
    }
    if (msg.kind == MessageKind::fetch)
    {
        // Only the locker ever reaches the fetch phase.
        if (rec.locker != from)
        {
            return detail::reply_to(msg, MessageKind::resp_taken);
        }
        rec.waiters.clear();
        rec.locker.reset();
        rec.removed = true;
        auto reply = detail::reply_to(msg, MessageKind::resp_molecule);
        reply.molecule_payload = rec.molecule.payload;
        return reply;
    }
    if (rec.reserver || (rec.locker && rec.locker != from))
    {
        return detail::reply_to(msg, MessageKind::resp_taken);
    }
    if (msg.kind == MessageKind::query)
    {
        detail::erase_waiter(rec.waiters, sender);
        rec.waiters.push_back(Waiter{sender, msg.sender_reactions, msg.attempt});
        return detail::reply_to(msg, MessageKind::resp_ok);
    }
    if (msg.kind == MessageKind::commitment)
    {
        if (rec.locker == from)
        {
            return detail::reply_to(msg, MessageKind::resp_ok);
        }
        const auto known = std::find_if(rec.waiters.begin(), rec.waiters.end(), [&](const Waiter& w) {
            return w.node == sender && w.attempt == msg.attempt;
        });
        if (known == rec.waiters.end())
        {
            // Commitment without a live query entry (e.g. crossed with our own
            // GIVE_UP handling): treat it as query followed by commitment.
            detail::erase_waiter(rec.waiters, sender);
            rec.waiters.push_back(Waiter{sender, msg.sender_reactions, msg.attempt});
        }
        const Waiter head = sort_requesters(rec.waiters);
        if (head.node == sender && head.attempt == msg.attempt)
        {
            rec.locker = Grant{sender, msg.attempt};
            return detail::reply_to(msg, MessageKind::resp_ok);
        }
        return detail::reply_to(msg, MessageKind::resp_taken);
    }
    throw std::invalid_argument("handle_pessimistic: unexpected message kind");
}

// Optimistic holder: first FETCH wins, until GIVE_UP or REACTION from the
// reserver. Pending pessimistic interest also refuses the FETCH.
inline std::optional<ProtocolMessage> handle_optimistic(NodeId sender, const ProtocolMessage& msg, HolderRecord& rec)
{
    if (msg.request_type != RequestType::optimistic)
    {
        throw std::invalid_argument("handle_optimistic: pessimistic message");
    }
    const Grant from{sender, msg.attempt};

    if (msg.kind == MessageKind::give_up)
    {
        if (!rec.removed && rec.reserver == from)
        {
            rec.reserver.reset();
        }
        return std::nullopt;
    }
    if (msg.kind == MessageKind::reaction)
    {
        if (!rec.removed && rec.reserver == from)
        {
            rec.reserver.reset();
            rec.removed = true;
        }
        return std::nullopt;
    }
    if (msg.kind != MessageKind::fetch)
    {
        throw std::invalid_argument("handle_optimistic: unexpected message kind");
    }
    if (rec.removed)
    {
        return detail::reply_to(msg, MessageKind::resp_removed);
    }
    if (rec.reserver || rec.locker || !rec.waiters.empty())
    {
        return detail::reply_to(msg, MessageKind::resp_taken);
    }
    rec.reserver = from;
    auto reply = detail::reply_to(msg, MessageKind::resp_molecule);
    reply.molecule_payload = rec.molecule.payload;
    return reply;
}

inline std::optional<ProtocolMessage> handle_request(NodeId sender, const ProtocolMessage& msg, HolderRecord& rec)
{
    return msg.request_type == RequestType::pessimistic ? handle_pessimistic(sender, msg, rec)
                                                        : handle_optimistic(sender, msg, rec);
}

// Same-step arbitration between sub-protocols: optimistic FETCHes are moved
// behind every other request, stable otherwise. Releases keep their place so
// per-sender FIFO order is preserved.
template <typename T, typename Project>
void resolve_coexistence(std::vector<T>& batch, Project message_of)
{
    std::stable_partition(batch.begin(), batch.end(), [&](const T& item) {
        const ProtocolMessage& m = message_of(item);
        return !(m.request_type == RequestType::optimistic && is_acquire(m.kind));
    });
}

} // namespace molcap
