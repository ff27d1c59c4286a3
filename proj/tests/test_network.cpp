#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"

namespace dipm {
namespace {

using testing::vec;

TEST(Exchange, ChainExample) {
  auto p = make_problem(testing::chain_qp_spec());
  auto cs = build_coupling(p);
  SimNetwork net(cs);
  Slices out = net.exchange_shared_components({vec({1, 2}), vec({4, 6})});
  EXPECT_EQ(out[0], vec({1, 3}));
  EXPECT_EQ(out[1], vec({3, 6}));
  EXPECT_EQ(net.stats().data_messages, 2);
  EXPECT_EQ(net.stats().rounds, 1);
}

TEST(Exchange, DecoupledSendsNothing) {
  auto p = make_problem(testing::decoupled_spec());
  auto cs = build_coupling(p);
  SimNetwork net(cs, true);
  Slices in = {vec({1, 2}), vec({3, 4})};
  Slices out = net.exchange_shared_components(in);
  EXPECT_EQ(out[0], in[0]);
  EXPECT_EQ(out[1], in[1]);
  EXPECT_EQ(net.stats().total(), 0);
  EXPECT_EQ(net.all_agree({1, 0}).rounds, 0);
  EXPECT_EQ(net.stats().total(), 0);
}

TEST(Exchange, MatchesGatherAverageBitForBit) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorOptions o;
    o.seed = seed;
    o.agents = 5;
    auto p = make_problem(generate_problem(o).spec);
    auto cs = build_coupling(p);
    SimNetwork net(cs);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Slices S(5);
    for (Index i = 0; i < 5; ++i) {
      S[i].resize(cs.block_size(i));
      for (Index a = 0; a < S[i].size(); ++a) S[i][a] = z(rng);
    }
    Slices got = net.exchange_shared_components(S);
    Slices ref = scatter(gather_average(S, cs), cs);
    for (Index i = 0; i < 5; ++i) ASSERT_EQ(got[i], ref[i]);

    // Per round each agent sends |Ne(i)| messages, only to its neighbors.
    for (Index i = 0; i < 5; ++i) {
      ASSERT_EQ(net.stats().data_sent[i], static_cast<long>(cs.neighbors[i].size()));
    }
    for (const auto& [from, to] : net.last_round_edges()) ASSERT_TRUE(cs.are_neighbors(from, to));
  }
}

TEST(Exchange, InactiveAgentsKeepTheirValues) {
  auto p = make_problem(testing::decoupled_spec());
  auto cs = build_coupling(p);
  SimNetwork net(cs, true);
  std::vector<char> active = {1, 0};
  Slices out = net.exchange_shared_components({vec({1, 2}), vec({3, 4})}, &active);
  EXPECT_EQ(out[1], vec({3, 4}));
}

TEST(Consensus, AllAgree) {
  auto p = make_problem(testing::path_spec(5));
  auto cs = build_coupling(p);
  SimNetwork net(cs);
  EXPECT_TRUE(net.all_agree({1, 1, 1, 1, 1}).value());
  auto r = net.all_agree({1, 1, 0, 1, 1});
  for (Index i = 0; i < 5; ++i) EXPECT_FALSE(r.at(i));
}

TEST(Consensus, FourAgentChainUsesDiameterRounds) {
  auto cs = build_coupling(make_problem(testing::path_spec(4)));
  SimNetwork net(cs);
  EXPECT_EQ(net.diameter(), 3);
  EXPECT_LE(net.all_agree({1, 1, 1, 0}).rounds, 3);
  EXPECT_LE(net.min_consensus({1, 2, 3, 4}).rounds, 3);
}

TEST(Consensus, Min) {
  auto cs3 = build_coupling(make_problem(testing::path_spec(3)));
  SimNetwork net3(cs3);
  auto r = net3.min_consensus({0.5, 1.0, 0.25});
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(r.at(i), 0.25);
  EXPECT_EQ(net3.min_consensus({1, 1, 1}).value(), 1.0);

  auto cs2 = build_coupling(make_problem(testing::path_spec(2)));
  SimNetwork net2(cs2);
  auto two = net2.min_consensus({1.0, 1e-8});
  EXPECT_EQ(two.value(), 1e-8);
  EXPECT_EQ(two.rounds, 1);
}

TEST(Consensus, SumIsIdenticalEverywhere) {
  auto cs = build_coupling(make_problem(testing::path_spec(6)));
  SimNetwork net(cs);
  std::vector<double> v = {0.1, 0.2, 0.3, 1e-17, -0.6, 1e10};
  auto r = net.sum_consensus(v);
  double ref = 0.0;
  for (double x : v) ref += x;
  for (Index i = 0; i < 6; ++i) EXPECT_EQ(r.at(i), ref);
}

TEST(Network, DisconnectedGraphIsRejected) {
  auto cs = build_coupling(make_problem(testing::decoupled_spec()));
  EXPECT_THROW(SimNetwork net(cs), Error);
  SimNetwork net(cs, true);
  EXPECT_EQ(net.num_components(), 2);
}

TEST(Network, DisconnectedConsensusStaysPerComponent) {
  ProblemSpec spec = testing::chain_qp_spec();
  ProblemSpec other = testing::chain_qp_spec();
  for (auto& b : other.blocks) {
    for (auto& j : b.index_set) j += 3;
    spec.blocks.push_back(b);
  }
  spec.n = 6;
  auto cs = build_coupling(make_problem(spec));
  SimNetwork net(cs, true);
  auto r = net.min_consensus({3, 4, 1, 2});
  EXPECT_EQ(r.values, (std::vector<double>{3, 3, 1, 1}));
}

TEST(Network, Conservation) {
  GeneratorOptions o;
  o.seed = 7;
  o.agents = 8;
  auto cs = build_coupling(make_problem(generate_problem(o).spec));
  SimNetwork net(cs);
  Slices S(8);
  for (Index i = 0; i < 8; ++i) S[i] = Vector::Ones(cs.block_size(i));
  net.exchange_shared_components(S);
  net.all_agree(std::vector<char>(8, 1));
  net.min_consensus(std::vector<double>(8, 1.0));
  net.sum_consensus(std::vector<double>(8, 1.0));
  const auto& st = net.stats();
  EXPECT_EQ(std::accumulate(st.data_sent.begin(), st.data_sent.end(), 0L),
            std::accumulate(st.data_received.begin(), st.data_received.end(), 0L));
  EXPECT_EQ(std::accumulate(st.consensus_sent.begin(), st.consensus_sent.end(), 0L),
            std::accumulate(st.consensus_received.begin(), st.consensus_received.end(), 0L));
  EXPECT_EQ(st.data_messages, std::accumulate(st.data_sent.begin(), st.data_sent.end(), 0L));
}

}  // namespace
}  // namespace dipm
