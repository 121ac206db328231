#pragma once

#include "chemistry.hpp"
#include "types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace molcap {

enum class MessageKind : std::uint8_t
{
    query,
    commitment,
    fetch,
    give_up,
    reaction,
    resp_ok,
    resp_taken,
    resp_removed,
    resp_molecule,
};

inline constexpr std::string_view to_string(MessageKind k) noexcept
{
    switch (k)
    {
    case MessageKind::query:
        return "QUERY";
    case MessageKind::commitment:
        return "COMMITMENT";
    case MessageKind::fetch:
        return "FETCH";
    case MessageKind::give_up:
        return "GIVE_UP";
    case MessageKind::reaction:
        return "REACTION";
    case MessageKind::resp_ok:
        return "RESP_OK";
    case MessageKind::resp_taken:
        return "RESP_TAKEN";
    case MessageKind::resp_removed:
        return "RESP_REMOVED";
    case MessageKind::resp_molecule:
        return "RESP_MOLECULE";
    }
    return "?";
}

// Requester -> holder messages. Everything else is a holder reply.
inline constexpr bool is_request(MessageKind k) noexcept
{
    return k == MessageKind::query || k == MessageKind::commitment || k == MessageKind::fetch ||
           k == MessageKind::give_up || k == MessageKind::reaction;
}

// Requests that can be answered with a grant or a refusal; GIVE_UP and
// REACTION only release state.
inline constexpr bool is_acquire(MessageKind k) noexcept
{
    return k == MessageKind::query || k == MessageKind::commitment || k == MessageKind::fetch;
}

struct ProtocolMessage
{
    MessageKind kind = MessageKind::query;
    MoleculeId molecule = 0;
    // Sequence number local to the requester that owns the exchange; holders
    // echo it back in replies.
    AttemptId attempt = 0;
    RequestType request_type = RequestType::optimistic;
    // Reactions completed by the sender so far (conflict-resolution key).
    std::uint64_t sender_reactions = 0;
    // Sender's local success rate, piggybacked for gossip.
    double sender_sigma = 1.0;
    // Only on RESP_MOLECULE.
    std::optional<Payload> molecule_payload;
};

} // namespace molcap
