#pragma once

// Multiset of molecules and the built-in reaction rules acting on it.

#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace molcap {

using Payload = std::variant<std::int64_t, std::string>;

inline std::string payload_to_string(const Payload& p)
{
    if (const auto* i = std::get_if<std::int64_t>(&p))
    {
        return std::to_string(*i);
    }
    return '"' + std::get<std::string>(p) + '"';
}

struct Molecule
{
    MoleculeId id = 0;
    Payload payload;

    friend bool operator==(const Molecule&, const Molecule&) = default;
};

enum class PayloadKind : std::uint8_t
{
    any,
    integer,
    string,
};

inline bool kind_matches(PayloadKind kind, const Payload& p) noexcept
{
    switch (kind)
    {
    case PayloadKind::any:
        return true;
    case PayloadKind::integer:
        return std::holds_alternative<std::int64_t>(p);
    case PayloadKind::string:
        return std::holds_alternative<std::string>(p);
    }
    return false;
}

struct ReactionRule
{
    std::string name;
    // One entry per consumed molecule; the arity is the pattern length.
    std::vector<PayloadKind> pattern;
    // Empty means "always true".
    std::function<bool(std::span<const Payload>)> condition;
    std::function<std::vector<Payload>(std::span<const Payload>)> produce;

    std::size_t arity() const noexcept { return pattern.size(); }

    // Any r distinct molecules form a valid combination.
    bool unrestricted() const noexcept
    {
        return !condition &&
               std::all_of(pattern.begin(), pattern.end(), [](PayloadKind k) { return k == PayloadKind::any; });
    }
};

namespace rules {

// replace s::string by len(s) if len(s) >= 2
inline ReactionRule count()
{
    return ReactionRule{
        "count",
        {PayloadKind::string},
        [](std::span<const Payload> in) { return std::get<std::string>(in[0]).size() >= 2; },
        [](std::span<const Payload> in) {
            return std::vector<Payload>{static_cast<std::int64_t>(std::get<std::string>(in[0]).size())};
        },
    };
}

// replace x::int, y::int by x + y
inline ReactionRule aggregate()
{
    return ReactionRule{
        "aggregate",
        {PayloadKind::integer, PayloadKind::integer},
        {},
        [](std::span<const Payload> in) {
            return std::vector<Payload>{std::get<std::int64_t>(in[0]) + std::get<std::int64_t>(in[1])};
        },
    };
}

// Consumes any two molecules and produces nothing.
inline ReactionRule consume2()
{
    return ReactionRule{
        "consume2",
        {PayloadKind::any, PayloadKind::any},
        {},
        [](std::span<const Payload>) { return std::vector<Payload>{}; },
    };
}

} // namespace rules

namespace detail {

inline std::vector<Payload> payloads_of(std::span<const Molecule> molecules)
{
    std::vector<Payload> out;
    out.reserve(molecules.size());
    for (const auto& m : molecules)
    {
        out.push_back(m.payload);
    }
    return out;
}

inline bool payloads_match(const ReactionRule& rule, std::span<const Payload> payloads)
{
    for (std::size_t i = 0; i < payloads.size(); ++i)
    {
        if (!kind_matches(rule.pattern[i], payloads[i]))
        {
            return false;
        }
    }
    return !rule.condition || rule.condition(payloads);
}

} // namespace detail

// Throws std::invalid_argument when the caller passes the wrong number of
// molecules or repeats a molecule.
inline bool match_combination(const ReactionRule& rule, std::span<const Molecule> molecules)
{
    if (molecules.size() != rule.arity())
    {
        throw std::invalid_argument("match_combination: rule '" + rule.name + "' expects " +
                                    std::to_string(rule.arity()) + " molecules, got " +
                                    std::to_string(molecules.size()));
    }
    for (std::size_t i = 0; i < molecules.size(); ++i)
    {
        for (std::size_t j = i + 1; j < molecules.size(); ++j)
        {
            if (molecules[i].id == molecules[j].id)
            {
                throw std::invalid_argument("match_combination: molecule " + std::to_string(molecules[i].id) +
                                            " repeated");
            }
        }
    }
    const auto payloads = detail::payloads_of(molecules);
    return detail::payloads_match(rule, payloads);
}

// Raised when a reaction tries to consume a molecule that some earlier
// reaction already consumed. A correct capture protocol never triggers it.
class AlreadyConsumed : public std::runtime_error
{
public:
    explicit AlreadyConsumed(MoleculeId id)
        : std::runtime_error("molecule " + std::to_string(id) + " already consumed"), m_id(id)
    {
    }

    MoleculeId id() const noexcept { return m_id; }

private:
    MoleculeId m_id;
};

// The solution. Ids come from a per-instance counter and are never reused.
class Multiset
{
public:
    const Molecule& insert(Payload payload)
    {
        ++m_inserted;
        return add(std::move(payload));
    }

    std::vector<Molecule> apply_reaction(const ReactionRule& rule, std::span<const Molecule> molecules)
    {
        if (molecules.size() != rule.arity())
        {
            throw std::invalid_argument("apply_reaction: arity mismatch for rule '" + rule.name + "'");
        }
        std::vector<Molecule> stored;
        stored.reserve(molecules.size());
        for (const auto& m : molecules)
        {
            if (m_consumed.contains(m.id))
            {
                throw AlreadyConsumed(m.id);
            }
            const auto it = m_index.find(m.id);
            if (it == m_index.end())
            {
                throw std::invalid_argument("apply_reaction: unknown molecule " + std::to_string(m.id));
            }
            stored.push_back(m_live[it->second]);
        }
        const auto payloads = detail::payloads_of(stored);
        if (!match_combination(rule, stored))
        {
            throw std::invalid_argument("apply_reaction: combination does not satisfy rule '" + rule.name + "'");
        }

        for (const auto& m : molecules)
        {
            remove(m.id);
            m_consumed.insert(m.id);
            ++m_consumed_count;
        }

        std::vector<Molecule> produced;
        for (auto& p : rule.produce(payloads))
        {
            ++m_produced;
            produced.push_back(add(std::move(p)));
        }
        return produced;
    }

    std::span<const Molecule> live() const noexcept { return m_live; }
    std::size_t size() const noexcept { return m_live.size(); }

    const Molecule* find(MoleculeId id) const
    {
        const auto it = m_index.find(id);
        return it == m_index.end() ? nullptr : &m_live[it->second];
    }

    bool is_live(MoleculeId id) const { return m_index.contains(id); }
    bool is_consumed(MoleculeId id) const { return m_consumed.contains(id); }

    std::uint64_t inserted_count() const noexcept { return m_inserted; }
    std::uint64_t produced_count() const noexcept { return m_produced; }
    std::uint64_t consumed_count() const noexcept { return m_consumed_count; }

    bool ledger_balanced() const noexcept
    {
        return m_inserted + m_produced - m_consumed_count == m_live.size();
    }

private:
    const Molecule& add(Payload payload)
    {
        const MoleculeId id = m_next_id++;
        m_index.emplace(id, m_live.size());
        m_live.push_back(Molecule{id, std::move(payload)});
        return m_live.back();
    }

    void remove(MoleculeId id)
    {
        const auto it = m_index.find(id);
        const std::size_t slot = it->second;
        m_index.erase(it);
        if (slot != m_live.size() - 1)
        {
            m_live[slot] = std::move(m_live.back());
            m_index[m_live[slot].id] = slot;
        }
        m_live.pop_back();
    }

    std::vector<Molecule> m_live;
    std::unordered_map<MoleculeId, std::size_t> m_index;
    std::unordered_set<MoleculeId> m_consumed;
    MoleculeId m_next_id = 0;
    std::uint64_t m_inserted = 0;
    std::uint64_t m_produced = 0;
    std::uint64_t m_consumed_count = 0;
};

namespace detail {

// Depth-first search for a distinct-index tuple satisfying the rule, trying
// candidates starting at `offset` (mod size) at every position.
inline bool search_combination(const ReactionRule& rule, std::span<const Molecule> live, std::size_t offset,
                               std::vector<std::size_t>& chosen)
{
    if (chosen.size() == rule.arity())
    {
        std::vector<Payload> payloads;
        payloads.reserve(chosen.size());
        for (auto idx : chosen)
        {
            payloads.push_back(live[idx].payload);
        }
        return !rule.condition || rule.condition(payloads);
    }
    const auto kind = rule.pattern[chosen.size()];
    for (std::size_t k = 0; k < live.size(); ++k)
    {
        const std::size_t idx = (offset + k) % live.size();
        if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end() || !kind_matches(kind, live[idx].payload))
        {
            continue;
        }
        chosen.push_back(idx);
        if (search_combination(rule, live, offset, chosen))
        {
            return true;
        }
        chosen.pop_back();
    }
    return false;
}

} // namespace detail

inline bool has_combination(const ReactionRule& rule, std::span<const Molecule> live)
{
    if (live.size() < rule.arity())
    {
        return false;
    }
    if (rule.unrestricted())
    {
        return true;
    }
    std::vector<std::size_t> chosen;
    return detail::search_combination(rule, live, 0, chosen);
}

// Global-observer check; protocol nodes never call this.
inline bool is_inert(const Multiset& multiset, std::span<const ReactionRule> rules)
{
    return std::none_of(rules.begin(), rules.end(),
                        [&](const ReactionRule& r) { return has_combination(r, multiset.live()); });
}

// Draws a combination of distinct live molecules satisfying `rule`.
// Unrestricted rules sample uniformly; other rules try a few random tuples
// and then fall back to an exhaustive search from a random starting offset.
template <typename Rng>
std::optional<std::vector<Molecule>> sample_combination(const ReactionRule& rule, std::span<const Molecule> live,
                                                        Rng& rng)
{
    const std::size_t r = rule.arity();
    if (live.size() < r || live.empty())
    {
        return std::nullopt;
    }
    std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);

    if (rule.unrestricted())
    {
        std::vector<std::size_t> idx;
        while (idx.size() < r)
        {
            const auto i = pick(rng);
            if (std::find(idx.begin(), idx.end(), i) == idx.end())
            {
                idx.push_back(i);
            }
        }
        std::vector<Molecule> out;
        for (auto i : idx)
        {
            out.push_back(live[i]);
        }
        return out;
    }

    constexpr int random_trials = 32;
    for (int trial = 0; trial < random_trials; ++trial)
    {
        std::vector<std::size_t> idx;
        bool ok = true;
        for (std::size_t pos = 0; pos < r && ok; ++pos)
        {
            const auto i = pick(rng);
            ok = std::find(idx.begin(), idx.end(), i) == idx.end() && kind_matches(rule.pattern[pos], live[i].payload);
            idx.push_back(i);
        }
        if (!ok)
        {
            continue;
        }
        std::vector<Molecule> out;
        for (auto i : idx)
        {
            out.push_back(live[i]);
        }
        const auto payloads = detail::payloads_of(out);
        if (!rule.condition || rule.condition(payloads))
        {
            return out;
        }
    }

    std::vector<std::size_t> chosen;
    if (!detail::search_combination(rule, live, pick(rng), chosen))
    {
        return std::nullopt;
    }
    std::vector<Molecule> out;
    for (auto i : chosen)
    {
        out.push_back(live[i]);
    }
    return out;
}

// One applied reaction, as written to the reaction log.
struct ReactionRecord
{
    Step step = 0;
    NodeId requester;
    AttemptId attempt = 0;
    std::string rule_name;
    std::vector<MoleculeId> consumed;
    std::vector<MoleculeId> produced;
};

inline void write_reaction_log_csv(std::ostream& os, std::span<const ReactionRecord> log)
{
    auto join = [&os](const std::vector<MoleculeId>& ids) {
        for (std::size_t i = 0; i < ids.size(); ++i)
        {
            if (i != 0)
            {
                os << ';';
            }
            os << ids[i];
        }
    };
    os << "step,requester_node,rule_name,consumed_ids,produced_ids\n";
    for (const auto& rec : log)
    {
        os << rec.step << ',' << rec.requester.value << ',' << rec.rule_name << ',';
        join(rec.consumed);
        os << ',';
        join(rec.produced);
        os << '\n';
    }
}

// Every consumed id appears in at most one logged reaction.
inline bool audit_atomicity(std::span<const ReactionRecord> log)
{
    std::unordered_set<MoleculeId> seen;
    for (const auto& rec : log)
    {
        for (auto id : rec.consumed)
        {
            if (!seen.insert(id).second)
            {
                return false;
            }
        }
    }
    return true;
}

} // namespace molcap
