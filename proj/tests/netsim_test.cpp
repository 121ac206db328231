#include <molcap/netsim.hpp>

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace molcap;

namespace {

struct Msg
{
    int tag = 0;
};

using Net = Transport<Msg>;

void run_to(Net& net, Step target)
{
    while (net.now() < target)
    {
        EXPECT_TRUE(net.tick().empty());
    }
}

} // namespace

TEST(Transport, LatencyIsOneStep)
{
    Net net(3);
    run_to(net, 7);
    net.send(NodeId{0}, NodeId{2}, Msg{1});
    const auto due = net.tick();
    ASSERT_EQ(due.size(), 1u);
    EXPECT_EQ(net.now(), 8u);
    EXPECT_EQ(due[0].sent_at, 7u);
    EXPECT_EQ(due[0].payload.tag, 1);
}

TEST(Transport, FifoPerPair)
{
    Net net(2);
    net.send(NodeId{1}, NodeId{0}, Msg{1});
    net.send(NodeId{1}, NodeId{0}, Msg{2});
    const auto due = net.tick();
    ASSERT_EQ(due.size(), 2u);
    EXPECT_EQ(due[0].payload.tag, 1);
    EXPECT_EQ(due[1].payload.tag, 2);
}

TEST(Transport, SelfSendPaysSameLatency)
{
    Net net(1);
    run_to(net, 3);
    net.send(NodeId{0}, NodeId{0}, Msg{5});
    const auto due = net.tick();
    ASSERT_EQ(due.size(), 1u);
    EXPECT_EQ(net.now(), 4u);
    EXPECT_EQ(due[0].to, NodeId{0});
}

TEST(Transport, EmptyTick)
{
    Net net(4);
    EXPECT_TRUE(net.tick().empty());
    EXPECT_EQ(net.now(), 1u);
}

TEST(Transport, AllMessagesOfAStepArriveTogether)
{
    Net net(4);
    net.send(NodeId{0}, NodeId{1}, Msg{1});
    net.send(NodeId{2}, NodeId{3}, Msg{2});
    net.send(NodeId{3}, NodeId{1}, Msg{3});
    EXPECT_EQ(net.tick().size(), 3u);
    EXPECT_EQ(net.in_flight(), 0u);
}

TEST(Transport, BySenderOrdersDestinationThenSender)
{
    Net net(5);
    net.send(NodeId{4}, NodeId{1}, Msg{1});
    net.send(NodeId{2}, NodeId{3}, Msg{2});
    net.send(NodeId{0}, NodeId{1}, Msg{3});
    net.send(NodeId{4}, NodeId{1}, Msg{4});
    const auto due = net.tick();
    std::vector<int> tags;
    for (const auto& e : due)
    {
        tags.push_back(e.payload.tag);
    }
    EXPECT_EQ(tags, (std::vector<int>{3, 1, 4, 2}));
}

TEST(Transport, RejectsBadEnvelopes)
{
    Net net(2);
    EXPECT_THROW(net.send(NodeId{0}, NodeId{2}, Msg{}), std::out_of_range);
    EXPECT_THROW(net.send(Envelope<Msg>{NodeId{0}, NodeId{1}, 5, Msg{}}), std::logic_error);
    EXPECT_THROW(Net(0), std::invalid_argument);
}

// Random traffic: every envelope delivered exactly once, one step after it
// was sent, with per-pair order intact, under both delivery policies.
TEST(Transport, ExactlyOnceFifoProperty)
{
    for (auto order : {DeliveryOrder::by_sender, DeliveryOrder::shuffled})
    {
        std::mt19937_64 rng(99);
        Net net(6, order, 5);
        std::map<std::pair<std::uint32_t, std::uint32_t>, int> last_seen;
        int next_tag = 0;
        std::uint64_t received = 0;
        for (int step = 0; step < 200; ++step)
        {
            const int sends = std::uniform_int_distribution<int>(0, 12)(rng);
            for (int i = 0; i < sends; ++i)
            {
                const NodeId from{std::uniform_int_distribution<std::uint32_t>(0, 5)(rng)};
                const NodeId to{std::uniform_int_distribution<std::uint32_t>(0, 5)(rng)};
                net.send(from, to, Msg{next_tag++});
            }
            for (const auto& e : net.tick())
            {
                ++received;
                EXPECT_EQ(e.sent_at + 1, net.now());
                const auto key = std::make_pair(e.from.value, e.to.value);
                if (const auto it = last_seen.find(key); it != last_seen.end())
                {
                    EXPECT_GT(e.payload.tag, it->second);
                }
                last_seen[key] = e.payload.tag;
            }
        }
        EXPECT_EQ(received, static_cast<std::uint64_t>(next_tag));
        EXPECT_EQ(net.sent_count(), net.delivered_count());
    }
}

TEST(Transport, ShuffledIsSeedDeterministic)
{
    auto trace = [](std::uint64_t seed) {
        Net net(8, DeliveryOrder::shuffled, seed);
        std::vector<int> tags;
        for (int step = 0; step < 20; ++step)
        {
            for (std::uint32_t from = 0; from < 8; ++from)
            {
                net.send(NodeId{from}, NodeId{from % 2}, Msg{step * 10 + static_cast<int>(from)});
            }
            for (const auto& e : net.tick())
            {
                tags.push_back(e.payload.tag);
            }
        }
        return tags;
    };
    EXPECT_EQ(trace(1), trace(1));
    EXPECT_NE(trace(1), trace(2));
}

TEST(Disseminate, EveryMoleculeGetsOneHolder)
{
    std::vector<Molecule> molecules;
    for (MoleculeId i = 0; i < 15000; ++i)
    {
        molecules.push_back(Molecule{i, static_cast<std::int64_t>(i)});
    }
    std::mt19937_64 rng(42);
    const auto holders = disseminate(molecules, 250, rng);
    ASSERT_EQ(holders.size(), molecules.size());
    std::vector<int> per_node(250, 0);
    for (const auto& [id, node] : holders)
    {
        ASSERT_LT(node.value, 250u);
        ++per_node[node.value];
    }
    // Binomial(15000, 1/250): mean 60, sd ~7.7.
    for (int c : per_node)
    {
        EXPECT_GT(c, 25);
        EXPECT_LT(c, 100);
    }

    std::mt19937_64 again(42);
    EXPECT_EQ(disseminate(molecules, 250, again), holders);
}

TEST(Disseminate, SingleNode)
{
    std::mt19937_64 rng(0);
    const std::vector<Molecule> one{Molecule{0, std::int64_t{1}}};
    EXPECT_EQ(disseminate(one, 1, rng).at(0), NodeId{0});
}
