#include <gtest/gtest.h>

#include <random>

#include "exrec/evaluation.hpp"
#include "exrec/ingest.hpp"
#include "exrec/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace exrec;

namespace {

std::vector<UserId> ids(std::size_t n) {
  std::vector<UserId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<UserId>(i + 1));
  return out;
}

std::set<UserId> relevant_from(const std::vector<int>& rel) {
  std::set<UserId> r;
  for (std::size_t i = 0; i < rel.size(); ++i)
    if (rel[i]) r.insert(static_cast<UserId>(i + 1));
  return r;
}

}  // namespace

TEST(Metrics, PrecisionAtN) {
  EXPECT_DOUBLE_EQ(precision_at_n({1, 2, 3}, {1, 3}, 3), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(precision_at_n(ids(5), {1, 2, 3, 4, 5}, 5), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_n(ids(5), {9}, 5), 0.0);
  EXPECT_DOUBLE_EQ(precision_at_n({1}, {1}, 5), 0.2);  // short list
  EXPECT_THROW(precision_at_n({1}, {1}, 0), ArgumentError);
}

TEST(Metrics, AveragePrecisionExamples) {
  EXPECT_DOUBLE_EQ(average_precision(ids(3), {1, 2, 3}), 1.0);
  EXPECT_NEAR(average_precision(ids(3), {1, 3}), 0.8333333333333334, 1e-12);
  EXPECT_NEAR(average_precision({1, 2, 3, 50, 51}, {1, 3}), 0.8333333333333334, 1e-12);
  EXPECT_THROW(average_precision(ids(3), {}), PreconditionError);
}

TEST(Metrics, ExhaustiveAveragePrecision) {
  for (std::size_t len = 1; len <= 6; ++len)
    for (unsigned mask = 1; mask < (1u << len); ++mask) {
      std::vector<int> rel(len);
      for (std::size_t i = 0; i < len; ++i) rel[i] = (mask >> i) & 1;
      const auto relevant = relevant_from(rel);
      EXPECT_NEAR(average_precision(ids(len), relevant),
                  oracle::average_precision(rel, relevant.size()), 1e-15);
      // AP = 1 iff the relevant items fill the top positions
      bool prefix = true;
      for (std::size_t i = 0; i < relevant.size(); ++i) prefix = prefix && rel[i];
      EXPECT_EQ(average_precision(ids(len), relevant) == 1.0, prefix);
    }
}

TEST(Metrics, PrecisionNonIncreasingWhenRelevantFirst) {
  std::set<UserId> rel = {1, 2, 3};
  double prev = 1.0;
  for (std::size_t n = 1; n <= 20; ++n) {
    const double p = precision_at_n(ids(10), rel, n);
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(Metrics, Spearman) {
  EXPECT_NEAR(*spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-15);
  EXPECT_NEAR(*spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_FALSE(spearman({1, 1, 1}, {1, 2, 3}).has_value());
  EXPECT_FALSE(spearman({1}, {1}).has_value());
  // ties take average ranks: x ranks {1.5, 1.5, 3}, y ranks {1, 2, 3}
  EXPECT_NEAR(*spearman({5, 5, 9}, {1, 2, 3}), 0.8660254037844386, 1e-12);
}

TEST(Queries, Parse) {
  const auto qs = parse_queries("# comment\nlinked list reversal\t12, 40\n\nmutex\r\nheap sort\t\n");
  ASSERT_EQ(qs.size(), 3u);
  EXPECT_EQ(qs[0].query_id, "q1");
  EXPECT_EQ(qs[0].text, "linked list reversal");
  EXPECT_EQ(*qs[0].gold_experts, (std::set<UserId>{12, 40}));
  EXPECT_FALSE(qs[1].gold_experts.has_value());
  EXPECT_EQ(qs[1].text, "mutex");
  EXPECT_TRUE(qs[2].gold_experts->empty());
  EXPECT_THROW(parse_queries("x\t12 abc\n"), ParseError);
}

class PlantedEvaluation : public ::testing::Test {
 protected:
  void SetUp() override {
    synthetic::Options opt;
    opt.seed = 31;
    community = synthetic::generate(opt);
    store = ingest_xml(community.posts_xml, community.users_xml).store;
    index = build_index(store);
    scores = expertise_rank(build_graph(store).graph);
    for (const auto& q : synthetic::topic_queries(community, 9))
      queries.push_back({"q" + std::to_string(q.topic + 1), q.text, std::nullopt});
  }
  synthetic::Community community;
  CorpusStore store;
  RelevanceIndex index;
  ErScores scores;
  std::vector<QuerySpec> queries;
};

TEST_F(PlantedEvaluation, TopExpertPrecisionIsOne) {
  const auto rep = evaluate(queries, FusionConfig{}, store, index, scores);
  EXPECT_EQ(rep.evaluated, 5u);
  for (const auto& q : rep.queries) {
    EXPECT_EQ(q.final.p_at[0], 1.0) << q.query_id;
    EXPECT_EQ(q.phase1.p_at[0], 1.0) << q.query_id;
    for (double v : {q.final.ap, q.phase1.ap, q.final.p_at[1], q.final.p_at[3]}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  double s = 0;
  for (const auto& q : rep.queries) s += q.final.ap;
  EXPECT_DOUBLE_EQ(rep.map_final, s / 5);
}

TEST_F(PlantedEvaluation, GoldSetsAndSkips) {
  auto qs = queries;
  for (auto& q : qs) q.gold_experts = std::set<UserId>{community.planted_experts[std::stoul(q.query_id.substr(1)) - 1]};
  qs.push_back({"q6", queries[0].text, std::set<UserId>{}});
  qs.push_back({"q7", "the of and", std::nullopt});
  const auto rep = evaluate(qs, FusionConfig{}, store, index, scores);
  EXPECT_EQ(rep.evaluated, 5u);
  EXPECT_EQ(rep.skipped, 2u);
  EXPECT_DOUBLE_EQ(rep.map_final, 1.0);
  EXPECT_THROW(evaluate({}, FusionConfig{}, store, index, scores), ArgumentError);
}

TEST_F(PlantedEvaluation, DeterministicAcrossThreads) {
  EvalOptions one, many;
  many.threads = 4;
  const auto a = to_json(evaluate(queries, FusionConfig{}, store, index, scores, one)).dump();
  const auto b = to_json(evaluate(queries, FusionConfig{}, store, index, scores, many)).dump();
  EXPECT_EQ(a, b);
}

TEST_F(PlantedEvaluation, ReportsAndPlotData) {
  const auto rep = evaluate(queries, FusionConfig{}, store, index, scores);
  const auto csv = plot_csv(rep);
  EXPECT_EQ(csv.rfind("query_id,phase,rank,precision\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 * 2 * 20);
  EXPECT_NE(csv.find("q1,final,1,1\n"), std::string::npos);
  const auto j = to_json(rep);
  EXPECT_EQ(j["relevance_threshold"], 0.5);
  EXPECT_EQ(j["queries"].size(), 5u);
  EXPECT_TRUE(j["queries"][0].contains("rank_comparison"));
  EXPECT_NE(format_table(rep).find("MAP final"), std::string::npos);
  for (const auto& q : rep.queries) {
    ASSERT_TRUE(q.spearman_reputation.has_value());
    EXPECT_GE(q.top_acceptance_ratio, 0.0);
    EXPECT_LE(q.top_acceptance_ratio, 1.0);
  }
}

TEST(Evaluation, InversionFixtureRankComparison) {
  const auto store = fixture::build(fixture::inversion_specs());
  const auto index = build_index(store);
  const auto scores = expertise_rank(build_graph(store).graph);
  const auto rep = evaluate({{"q1", fixture::kQuery, std::set<UserId>{4}}}, FusionConfig{},
                            store, index, scores);
  const auto& q = rep.queries[0];
  EXPECT_EQ(q.phase1.p_at[0], 0.0);
  EXPECT_EQ(q.final.p_at[0], 1.0);
  EXPECT_DOUBLE_EQ(q.phase1.ap, 0.25);
  EXPECT_DOUBLE_EQ(q.final.ap, 1.0);
  for (const auto& c : q.ranks)
    if (c.user_id == 4) {
      EXPECT_EQ(c.phase1_rank, 4u);
      EXPECT_EQ(c.final_rank, 1u);
      EXPECT_EQ(c.reputation_rank, 1u);
    }
  EXPECT_GT(*q.spearman_reputation, 0.0);
}
