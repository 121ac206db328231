#pragma once

// Discrete-time transport: everything sent during step t is delivered at t+1.

#include "chemistry.hpp"
#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace molcap {

template <typename Message>
struct Envelope
{
    NodeId from;
    NodeId to;
    Step sent_at = 0;
    Message payload;
};

// How envelopes from different senders are interleaved at one destination.
// Messages from the same sender always keep their send order.
enum class DeliveryOrder : std::uint8_t
{
    // Ascending sender id.
    by_sender,
    // Sender groups permuted by a seeded generator, fresh per destination and
    // step. Models unordered arrival without giving low ids a permanent edge.
    shuffled,
};

template <typename Message>
class Transport
{
public:
    using envelope_type = Envelope<Message>;

    explicit Transport(std::size_t nodes, DeliveryOrder order = DeliveryOrder::by_sender, std::uint64_t seed = 0)
        : m_nodes(nodes), m_order(order), m_rng(seed)
    {
        if (nodes == 0)
        {
            throw std::invalid_argument("Transport: need at least one node");
        }
    }

    Step now() const noexcept { return m_step; }
    std::size_t nodes() const noexcept { return m_nodes; }

    // Envelopes must be stamped with the current step.
    void send(envelope_type env)
    {
        if (env.from.value >= m_nodes || env.to.value >= m_nodes)
        {
            throw std::out_of_range("Transport::send: node id out of range");
        }
        if (env.sent_at != m_step)
        {
            throw std::logic_error("Transport::send: envelope stamped " + std::to_string(env.sent_at) +
                                   " at step " + std::to_string(m_step));
        }
        ++m_sent;
        m_outbox.push_back(std::move(env));
    }

    void send(NodeId from, NodeId to, Message payload) { send(envelope_type{from, to, m_step, std::move(payload)}); }

    // Advances the clock and returns the envelopes due now, grouped by
    // ascending destination.
    std::vector<envelope_type> tick()
    {
        ++m_step;
        std::vector<envelope_type> due;
        due.swap(m_outbox);
        std::stable_sort(due.begin(), due.end(), [](const envelope_type& a, const envelope_type& b) {
            return a.to != b.to ? a.to < b.to : a.from < b.from;
        });
        if (m_order == DeliveryOrder::shuffled)
        {
            shuffle_senders(due);
        }
        m_delivered += due.size();
        return due;
    }

    std::uint64_t sent_count() const noexcept { return m_sent; }
    std::uint64_t delivered_count() const noexcept { return m_delivered; }
    std::size_t in_flight() const noexcept { return m_outbox.size(); }

private:
    // Input is sorted by (to, from). Within each destination, permute whole
    // sender runs so per-pair FIFO survives.
    void shuffle_senders(std::vector<envelope_type>& due)
    {
        std::vector<envelope_type> out;
        out.reserve(due.size());
        std::vector<std::pair<std::size_t, std::size_t>> runs;
        std::size_t i = 0;
        while (i < due.size())
        {
            const NodeId dest = due[i].to;
            runs.clear();
            while (i < due.size() && due[i].to == dest)
            {
                std::size_t j = i;
                while (j < due.size() && due[j].to == dest && due[j].from == due[i].from)
                {
                    ++j;
                }
                runs.emplace_back(i, j);
                i = j;
            }
            std::shuffle(runs.begin(), runs.end(), m_rng);
            for (const auto& [begin, end] : runs)
            {
                for (std::size_t k = begin; k < end; ++k)
                {
                    out.push_back(std::move(due[k]));
                }
            }
        }
        due.swap(out);
    }

    std::size_t m_nodes;
    DeliveryOrder m_order;
    std::mt19937_64 m_rng;
    Step m_step = 0;
    std::vector<envelope_type> m_outbox;
    std::uint64_t m_sent = 0;
    std::uint64_t m_delivered = 0;
};

// Random placement of molecules on holders, standing in for the DHT.
template <typename Rng>
std::unordered_map<MoleculeId, NodeId> disseminate(std::span<const Molecule> molecules, std::size_t nodes, Rng& rng)
{
    if (nodes == 0)
    {
        throw std::invalid_argument("disseminate: need at least one node");
    }
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(nodes - 1));
    std::unordered_map<MoleculeId, NodeId> holders;
    holders.reserve(molecules.size());
    for (const auto& m : molecules)
    {
        holders.emplace(m.id, NodeId{pick(rng)});
    }
    return holders;
}

} // namespace molcap
