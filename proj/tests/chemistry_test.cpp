#include <molcap/chemistry.hpp>
#include <molcap/simulation.hpp>

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace molcap;

namespace {

std::vector<Molecule> mols(std::initializer_list<Payload> payloads)
{
    std::vector<Molecule> out;
    MoleculeId id = 100;
    for (const auto& p : payloads)
    {
        out.push_back(Molecule{id++, p});
    }
    return out;
}

// Independent inertia oracle for the count/aggregate rules: any string of
// length >= 2, or any two integers, means a reaction is still possible.
bool count_aggregate_inert_oracle(const std::vector<Payload>& live)
{
    int ints = 0;
    for (const auto& p : live)
    {
        if (const auto* s = std::get_if<std::string>(&p); s && s->size() >= 2)
        {
            return false;
        }
        if (std::holds_alternative<std::int64_t>(p))
        {
            ++ints;
        }
    }
    return ints < 2;
}

} // namespace

TEST(MatchCombination, CountAcceptsLongStrings)
{
    const auto rule = rules::count();
    EXPECT_TRUE(match_combination(rule, mols({std::string("maecenas")})));
    EXPECT_FALSE(match_combination(rule, mols({std::string("a")})));
    EXPECT_FALSE(match_combination(rule, mols({std::int64_t{7}})));
}

TEST(MatchCombination, AggregateNeedsTwoIntegers)
{
    const auto rule = rules::aggregate();
    EXPECT_TRUE(match_combination(rule, mols({std::int64_t{8}, std::int64_t{6}})));
    EXPECT_FALSE(match_combination(rule, mols({std::int64_t{8}, std::string("xy")})));
}

TEST(MatchCombination, ArityMismatchIsContractViolation)
{
    EXPECT_THROW(match_combination(rules::aggregate(), mols({std::int64_t{1}})), std::invalid_argument);
    const Molecule m{1, std::int64_t{3}};
    const std::vector<Molecule> twice{m, m};
    EXPECT_THROW(match_combination(rules::consume2(), twice), std::invalid_argument);
}

TEST(ApplyReaction, ProducesFreshMolecules)
{
    Multiset ms;
    const auto word = ms.insert(std::string("maecenas"));
    auto produced = ms.apply_reaction(rules::count(), std::vector<Molecule>{word});
    ASSERT_EQ(produced.size(), 1u);
    EXPECT_EQ(std::get<std::int64_t>(produced[0].payload), 8);
    EXPECT_NE(produced[0].id, word.id);
    EXPECT_TRUE(ms.is_consumed(word.id));
    EXPECT_TRUE(ms.is_live(produced[0].id));

    const auto six = ms.insert(std::int64_t{6});
    auto sum = ms.apply_reaction(rules::aggregate(), std::vector<Molecule>{produced[0], six});
    ASSERT_EQ(sum.size(), 1u);
    EXPECT_EQ(std::get<std::int64_t>(sum[0].payload), 14);
    EXPECT_TRUE(ms.ledger_balanced());
}

TEST(ApplyReaction, Consume2ProducesNothing)
{
    Multiset ms;
    const auto a = ms.insert(std::int64_t{1});
    const auto b = ms.insert(std::string("b"));
    EXPECT_TRUE(ms.apply_reaction(rules::consume2(), std::vector<Molecule>{a, b}).empty());
    EXPECT_EQ(ms.size(), 0u);
    EXPECT_TRUE(ms.ledger_balanced());
}

TEST(ApplyReaction, DoubleConsumptionIsDetected)
{
    Multiset ms;
    const auto a = ms.insert(std::int64_t{1});
    const auto b = ms.insert(std::int64_t{2});
    const auto c = ms.insert(std::int64_t{3});
    ms.apply_reaction(rules::consume2(), std::vector<Molecule>{a, b});
    try
    {
        ms.apply_reaction(rules::consume2(), std::vector<Molecule>{c, a});
        FAIL() << "expected AlreadyConsumed";
    }
    catch (const AlreadyConsumed& e)
    {
        EXPECT_EQ(e.id(), a.id);
    }
    EXPECT_TRUE(ms.is_live(c.id));
}

TEST(IsInert, Examples)
{
    const std::vector<ReactionRule> ca{rules::count(), rules::aggregate()};
    Multiset done;
    done.insert(std::string("a"));
    done.insert(std::int64_t{49});
    EXPECT_TRUE(is_inert(done, ca));

    Multiset pair;
    pair.insert(std::int64_t{5});
    pair.insert(std::int64_t{2});
    EXPECT_FALSE(is_inert(pair, std::vector<ReactionRule>{rules::aggregate()}));

    Multiset single;
    single.insert(std::int64_t{1});
    EXPECT_TRUE(is_inert(single, std::vector<ReactionRule>{rules::consume2()}));
}

TEST(IsInert, AgreesWithBruteForceOracle)
{
    const std::vector<ReactionRule> ca{rules::count(), rules::aggregate()};
    std::mt19937_64 rng(7);
    const std::vector<Payload> pool{std::string("a"), std::string("b"), std::string("xy"),
                                    std::string("word"), std::int64_t{1}, std::int64_t{2}};
    for (int trial = 0; trial < 300; ++trial)
    {
        Multiset ms;
        std::vector<Payload> payloads;
        const int n = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int i = 0; i < n; ++i)
        {
            payloads.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
            ms.insert(payloads.back());
        }
        EXPECT_EQ(is_inert(ms, ca), count_aggregate_inert_oracle(payloads));
    }
}

// Oracle: sum of lengths of the strings with at least two characters,
// 8+6+5+6+6+6+7+3+2 = 49.
TEST(CountAggregate, SequentialReductionReachesOracleMultiset)
{
    std::int64_t oracle = 0;
    for (const auto& w : count_aggregate_words())
    {
        oracle += w.size() >= 2 ? static_cast<std::int64_t>(w.size()) : 0;
    }
    ASSERT_EQ(oracle, 49);

    const std::vector<ReactionRule> ca{rules::count(), rules::aggregate()};
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        std::mt19937_64 rng(seed);
        Multiset ms;
        for (const auto& w : count_aggregate_words())
        {
            ms.insert(w);
        }
        while (!is_inert(ms, ca))
        {
            const std::size_t r = std::uniform_int_distribution<std::size_t>(0, 1)(rng);
            if (auto combo = sample_combination(ca[r], ms.live(), rng))
            {
                ms.apply_reaction(ca[r], *combo);
            }
            ASSERT_TRUE(ms.ledger_balanced());
        }
        ASSERT_EQ(ms.size(), 2u);
        std::set<std::string> finals;
        for (const auto& m : ms.live())
        {
            finals.insert(payload_to_string(m.payload));
        }
        EXPECT_EQ(finals, (std::set<std::string>{"\"a\"", "49"}));
    }
}

TEST(Consume2, PerformsFloorHalfReactions)
{
    for (std::size_t m : {0u, 1u, 2u, 7u, 100u})
    {
        std::mt19937_64 rng(m);
        Multiset ms;
        for (std::size_t i = 0; i < m; ++i)
        {
            ms.insert(static_cast<std::int64_t>(i));
        }
        const std::vector<ReactionRule> rs{rules::consume2()};
        std::size_t reactions = 0;
        while (!is_inert(ms, rs))
        {
            ms.apply_reaction(rs[0], *sample_combination(rs[0], ms.live(), rng));
            ++reactions;
        }
        EXPECT_EQ(reactions, m / 2);
    }
}

TEST(SampleCombination, ReturnsDistinctMatchingMolecules)
{
    std::mt19937_64 rng(3);
    Multiset ms;
    ms.insert(std::string("a"));
    ms.insert(std::int64_t{4});
    ms.insert(std::string("zz"));
    ms.insert(std::int64_t{5});
    for (int i = 0; i < 100; ++i)
    {
        auto agg = sample_combination(rules::aggregate(), ms.live(), rng);
        ASSERT_TRUE(agg);
        EXPECT_NE((*agg)[0].id, (*agg)[1].id);
        EXPECT_TRUE(match_combination(rules::aggregate(), *agg));
        auto cnt = sample_combination(rules::count(), ms.live(), rng);
        ASSERT_TRUE(cnt);
        EXPECT_EQ(std::get<std::string>((*cnt)[0].payload), "zz");
    }
    Multiset one;
    one.insert(std::int64_t{1});
    EXPECT_FALSE(sample_combination(rules::consume2(), one.live(), rng));
    EXPECT_FALSE(sample_combination(rules::count(), one.live(), rng));
}

TEST(Multiset, IdsAreNeverReused)
{
    std::mt19937_64 rng(11);
    Multiset ms;
    std::set<MoleculeId> seen;
    for (int i = 0; i < 50; ++i)
    {
        seen.insert(ms.insert(std::int64_t{i}).id);
    }
    const std::vector<ReactionRule> rs{rules::aggregate()};
    while (!is_inert(ms, rs))
    {
        for (const auto& m : ms.apply_reaction(rs[0], *sample_combination(rs[0], ms.live(), rng)))
        {
            EXPECT_TRUE(seen.insert(m.id).second);
        }
    }
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(std::get<std::int64_t>(ms.live()[0].payload), 49 * 50 / 2);
}

TEST(ReactionLog, CsvSchema)
{
    std::vector<ReactionRecord> log{{3, NodeId{2}, 9, "aggregate", {4, 5}, {11}}, {4, NodeId{0}, 1, "consume2", {1, 2}, {}}};
    std::ostringstream os;
    write_reaction_log_csv(os, log);
    EXPECT_EQ(os.str(), "step,requester_node,rule_name,consumed_ids,produced_ids\n"
                        "3,2,aggregate,4;5,11\n"
                        "4,0,consume2,1;2,\n");
    EXPECT_TRUE(audit_atomicity(log));
    log.push_back({5, NodeId{1}, 2, "consume2", {2, 7}, {}});
    EXPECT_FALSE(audit_atomicity(log));
}
