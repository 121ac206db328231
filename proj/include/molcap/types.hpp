#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

namespace molcap {

using MoleculeId = std::uint64_t;
using AttemptId = std::uint64_t;
using Step = std::uint64_t;

// Node identifiers are dense in [0, n); the integer order is the tie-break
// order used by conflict resolution.
struct NodeId
{
    std::uint32_t value = 0;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

enum class RequestType : std::uint8_t
{
    optimistic,
    pessimistic,
};

inline constexpr std::string_view to_string(RequestType t) noexcept
{
    return t == RequestType::optimistic ? "optimistic" : "pessimistic";
}

} // namespace molcap

template <>
struct std::hash<molcap::NodeId>
{
    std::size_t operator()(molcap::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
