#include <gtest/gtest.h>

#include <random>
#include <tuple>

#include "exrec/graph.hpp"
#include "exrec/ingest.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace exrec;

namespace {

using EdgeList = std::vector<std::tuple<UserId, UserId, std::int64_t>>;

Post question(PostId id, UserId owner) {
  Post p;
  p.id = id;
  p.type = PostType::Question;
  p.owner = owner;
  return p;
}

Post answer(PostId id, PostId parent, UserId owner) {
  Post p;
  p.id = id;
  p.type = PostType::Answer;
  p.parent = parent;
  p.owner = owner;
  return p;
}

ErOptions tight() {
  ErOptions o;
  o.tol = 1e-13;
  o.max_iter = 2000;
  return o;
}

// Random simple digraph on nodes 0..n-1 (user ids 100 + i), no self-loops.
std::pair<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> random_digraph(
    std::mt19937_64& rng) {
  const std::size_t n = 1 + rng() % 10;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const double p = static_cast<double>(rng() % 100) / 100.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && static_cast<double>(rng() % 1000) / 1000.0 < p) edges.emplace_back(u, v);
  return {n, edges};
}

QaGraph to_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                 std::int64_t offset = 100) {
  std::vector<UserId> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(offset + static_cast<UserId>(i));
  EdgeList el;
  for (auto [u, v] : edges)
    el.emplace_back(offset + static_cast<UserId>(u), offset + static_cast<UserId>(v), 1);
  return QaGraph::from_edges(nodes, el);
}

}  // namespace

TEST(BuildGraph, EdgesWeightsAndSelfLoops) {
  // A=1 asks 10 and 11; B=2 answers both, C=3 answers 10 twice; A answers
  // own question 11.
  std::vector<Post> posts = {question(10, 1), question(11, 1), answer(12, 10, 2),
                             answer(13, 11, 2), answer(14, 10, 3), answer(15, 10, 3),
                             answer(16, 11, 1), answer(17, 999, 4)};
  const auto store = CorpusStore::from_records(posts, {});
  const auto [g, report] = build_graph(store);
  EXPECT_EQ(g.node_count(), 4u);  // 1, 2, 3, 4 (4 is isolated)
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.out_degree(1), 2u);
  EXPECT_EQ(g.edge_weight(1, 2), 2);
  EXPECT_EQ(g.edge_weight(1, 3), 1);  // same question counted once
  EXPECT_EQ(g.edge_weight(1, 1), 0);
  EXPECT_EQ(g.out_degree(4), 0u);
  EXPECT_TRUE(g.contains(4));
  EXPECT_EQ(report.answers, 6u);
  EXPECT_EQ(report.self_answers, 1u);
  EXPECT_EQ(report.orphans, 1u);
  EXPECT_EQ(report.edges_contributed, 4u);
  EXPECT_EQ(g.edge_list(), "1 2 2\n1 3 1\n");
}

TEST(BuildGraph, SampleDump) {
  const auto store = ingest_dump(EXREC_TEST_DATA_DIR "/sample_posts.xml",
                                 EXREC_TEST_DATA_DIR "/sample_users.xml")
                         .store;
  const auto [g, report] = build_graph(store);
  for (UserId u : g.nodes()) EXPECT_EQ(g.edge_weight(u, u), 0);
  EXPECT_EQ(report.answers, store.answer_count());
}

TEST(ExpertiseRank, ClosedFormCases) {
  const auto isolated = expertise_rank(QaGraph::from_edges({7}, {}));
  EXPECT_EQ(isolated.er.at(7), 1.0 - 0.85);
  EXPECT_TRUE(isolated.converged);

  const auto chain = expertise_rank(QaGraph::from_edges({}, {{1, 2, 1}}));
  EXPECT_NEAR(chain.er.at(1), 0.15, 1e-12);
  EXPECT_NEAR(chain.er.at(2), 0.2775, 1e-12);

  const auto cycle = expertise_rank(QaGraph::from_edges({}, {{1, 2, 1}, {2, 1, 1}}));
  EXPECT_EQ(cycle.er.at(1), 1.0);
  EXPECT_EQ(cycle.er.at(2), 1.0);
}

TEST(ExpertiseRank, MatchesLinearSolve) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 50; ++round) {
    const auto [n, edges] = random_digraph(rng);
    const auto s = expertise_rank(to_graph(n, edges), tight());
    ASSERT_TRUE(s.converged);
    const auto ref = oracle::expertise_rank_direct(n, edges, 0.85);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s.er.at(100 + UserId(i)), ref[i], 1e-9);
  }
}

TEST(ExpertiseRank, DefaultToleranceInvariants) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const auto [n, edges] = random_digraph(rng);
    const auto g = to_graph(n, edges);
    const auto s = expertise_rank(g);
    for (const auto& [u, v] : s.er) EXPECT_GE(v, 1.0 - 0.85);
    if (s.converged) {
      EXPECT_LT(s.residual, 1e-8);
      EXPECT_LT(fixed_point_defect(g, s), 10 * 1e-8);
    }
  }
}

TEST(ExpertiseRank, PermutationEquivariance) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 20; ++round) {
    const auto [n, edges] = random_digraph(rng);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<std::size_t, std::size_t>> relabeled;
    for (auto [u, v] : edges) relabeled.emplace_back(perm[u], perm[v]);
    const auto a = expertise_rank(to_graph(n, edges), tight());
    const auto b = expertise_rank(to_graph(n, relabeled), tight());
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_NEAR(a.er.at(100 + UserId(i)), b.er.at(100 + UserId(perm[i])), 1e-12);
  }
}

TEST(ExpertiseRank, StarHubOutranksAskers) {
  EdgeList edges;
  for (UserId asker = 1; asker <= 12; ++asker) edges.emplace_back(asker, 100, 1);
  const auto s = expertise_rank(QaGraph::from_edges({}, edges));
  for (UserId asker = 1; asker <= 12; ++asker) EXPECT_GT(s.er.at(100), s.er.at(asker));
}

TEST(ExpertiseRank, ThreadCountDoesNotChangeBits) {
  std::mt19937_64 rng(3);
  EdgeList edges;
  for (int i = 0; i < 4000; ++i) edges.emplace_back(rng() % 500, rng() % 500, 1 + rng() % 3);
  const auto g = QaGraph::from_edges({}, edges);
  for (bool weighted : {false, true}) {
    ErOptions one;
    one.weighted = weighted;
    ErOptions many = one;
    many.threads = 7;
    const auto a = expertise_rank(g, one);
    const auto b = expertise_rank(g, many);
    EXPECT_EQ(a.er, b.er);
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

TEST(ExpertiseRank, WeightedModeUsesEdgeShares) {
  // 1 -> 2 (weight 3), 1 -> 3 (weight 1)
  const auto g = QaGraph::from_edges({}, {{1, 2, 3}, {1, 3, 1}});
  ErOptions w;
  w.weighted = true;
  const auto s = expertise_rank(g, w);
  EXPECT_NEAR(s.er.at(2), 0.15 + 0.85 * 0.15 * 0.75, 1e-12);
  EXPECT_NEAR(s.er.at(3), 0.15 + 0.85 * 0.15 * 0.25, 1e-12);
  const auto u = expertise_rank(g);
  EXPECT_NEAR(u.er.at(2), u.er.at(3), 1e-15);
}

TEST(ExpertiseRank, NonConvergenceIsFlagged) {
  ErOptions o;
  o.max_iter = 3;
  const auto s = expertise_rank(QaGraph::from_edges({}, {{1, 2, 1}, {2, 3, 1}, {3, 1, 1}, {1, 3, 1}}), o);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.iterations, 3u);
  EXPECT_GT(s.residual, o.tol);
}

TEST(ExpertiseRank, RejectsBadDamping) {
  for (double d : {0.0, 1.0, -0.1, 1.5}) {
    ErOptions o;
    o.d = d;
    EXPECT_THROW(expertise_rank(QaGraph{}, o), ArgumentError);
  }
}

TEST(CandidateEr, Projection) {
  const auto s = expertise_rank(QaGraph::from_edges({}, {{1, 2, 1}}));
  const auto m = candidate_er(s, {2, 42});
  EXPECT_EQ(m.at(2), s.er.at(2));
  EXPECT_EQ(m.at(42), 1.0 - 0.85);
  EXPECT_TRUE(candidate_er(s, {}).empty());
}

TEST(ScoresFile, RoundTrip) {
  std::mt19937_64 rng(8);
  EdgeList edges;
  for (int i = 0; i < 200; ++i) edges.emplace_back(rng() % 60, rng() % 60, 1);
  auto s = expertise_rank(QaGraph::from_edges({}, edges));
  s.store_hash = "00ff";
  nlohmann::ordered_json header;
  header["kind"] = "er_scores";
  const auto text = scores_text(s, header);
  const auto loaded = parse_scores(text);
  EXPECT_EQ(loaded.scores.er, s.er);
  EXPECT_EQ(loaded.scores.d, s.d);
  EXPECT_EQ(loaded.scores.store_hash, "00ff");
  EXPECT_EQ(scores_text(loaded.scores, header), text);
  EXPECT_THROW(parse_scores("# {\"d\":0.85,\"iterations\":1,\"residual\":0,\"converged\":true}\n"
                            "12 abc\n"),
               ParseError);
}
