#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "exrec/ingest.hpp"
#include "exrec/store_io.hpp"
#include "fixtures.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(const std::string& args, const fs::path& cwd, const std::string& env = "") {
  const fs::path err_file = cwd / "stderr.txt";
  const std::string cmd = "cd '" + cwd.string() + "' && " + env + " '" EXREC_CLI_PATH "' " +
                          args + " 2>'" + err_file.string() + "'";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = test::read_file(err_file);
  return r;
}

// Synthetic dump ingested, indexed and ranked once for the whole suite.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir();
    const auto& d = dir_->path();
    ASSERT_EQ(run("synth --out dump --topics 4 --questions 20", d).code, 0);
    ASSERT_EQ(run("ingest --posts dump/Posts.xml --users dump/Users.xml --out store", d).code, 0);
    ASSERT_EQ(run("index --store store", d).code, 0);
    ASSERT_EQ(run("graph --store store --edges edges.txt", d).code, 0);
  }
  static void TearDownTestSuite() { delete dir_; }
  static const fs::path& dir() { return dir_->path(); }
  static std::string first_query() {
    const auto q = test::read_file(dir() / "dump/queries.tsv");
    const auto start = q.find('\n') + 1;
    return q.substr(start, q.find('\t', start) - start);
  }
  static test::TempDir* dir_;
};

test::TempDir* CliPipeline::dir_ = nullptr;

}  // namespace

TEST_F(CliPipeline, RecommendTableAndJson) {
  const auto table = run("recommend --store store --top 3 --query '" + first_query() + "'", dir());
  ASSERT_EQ(table.code, 0) << table.err;
  EXPECT_NE(table.out.find("fused"), std::string::npos);
  EXPECT_EQ(table.out.rfind("# {\"config\"", 0), 0u);

  const auto js = run("recommend --store store --format json --query '" + first_query() + "'", dir());
  ASSERT_EQ(js.code, 0) << js.err;
  const auto j = nlohmann::json::parse(js.out);
  EXPECT_EQ(j["entries"][0]["user_id"], 1);  // planted expert of topic 0
  EXPECT_EQ(j["config"]["seed"], 42);
  EXPECT_TRUE(j["inputs"].contains("scores_hash"));
  const auto again = run("recommend --store store --format json --query '" + first_query() + "'", dir());
  EXPECT_EQ(again.out, js.out);
}

TEST_F(CliPipeline, EvaluatePlantedCorpus) {
  const auto r = run("evaluate --store store --queries dump/queries.tsv --out report.json "
                     "--plot-data plot.csv",
                     dir());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(test::read_file(dir() / "report.json"));
  EXPECT_EQ(j["map_final"], 1.0);
  EXPECT_EQ(j["evaluated"], 4);
  const auto csv = test::read_file(dir() / "plot.csv");
  EXPECT_NE(csv.find("query_id,phase,rank,precision"), std::string::npos);
}

TEST_F(CliPipeline, ThreadCountDoesNotChangeArtifacts) {
  ASSERT_EQ(run("index --store store --out idx4.jsonl --threads 4", dir()).code, 0);
  ASSERT_EQ(run("graph --store store --out er4.txt --threads 4", dir()).code, 0);
  EXPECT_EQ(test::read_file(dir() / "idx4.jsonl"), test::read_file(dir() / "store/index.jsonl"));
  EXPECT_EQ(test::read_file(dir() / "er4.txt"), test::read_file(dir() / "store/er_scores.txt"));
  const auto a = run("evaluate --store store --queries dump/queries.tsv --out e1.json", dir());
  const auto b = run("evaluate --store store --queries dump/queries.tsv --out e4.json --threads 3", dir());
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(test::read_file(dir() / "e1.json"), test::read_file(dir() / "e4.json"));
}

TEST_F(CliPipeline, ExplainAndNotFound) {
  const auto r = run("explain --store store --user 1 --query '" + first_query() + "'", dir());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["explanation"]["final_rank"], 1);
  EXPECT_EQ(run("explain --store store --user 999999 --query '" + first_query() + "'", dir()).code, 1);
}

TEST_F(CliPipeline, MismatchedArtifactsExitFour) {
  ASSERT_EQ(run("synth --out other --seed 5 --topics 2 --questions 5", dir()).code, 0);
  ASSERT_EQ(run("ingest --posts other/Posts.xml --out other_store", dir()).code, 0);
  ASSERT_EQ(run("graph --store other_store", dir()).code, 0);
  const auto r = run("recommend --store store --scores other_store/er_scores.txt --query '" +
                         first_query() + "'",
                     dir());
  EXPECT_EQ(r.code, 4);
  const auto store_hash = exrec::load_store(dir() / "store").hash();
  const auto other_hash = exrec::load_store(dir() / "other_store").hash();
  EXPECT_NE(r.err.find(store_hash), std::string::npos) << r.err;
  EXPECT_NE(r.err.find(other_hash), std::string::npos) << r.err;
  EXPECT_EQ(run("recommend --store store --seed 7 --query '" + first_query() + "'", dir()).code, 4);
  EXPECT_EQ(run("recommend --store store --d 0.8 --query '" + first_query() + "'", dir()).code, 4);
}

TEST_F(CliPipeline, ConfigFileAndEnvironment) {
  exrec::write_text_file(dir() / "run.ini", "[recommend]\nalpha=1.0\nformat=\"json\"\n");
  const auto q = " --store store --query '" + first_query() + "'";
  const auto from_file = run("recommend --config run.ini" + q, dir());
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(nlohmann::json::parse(from_file.out)["config"]["alpha"], 1.0);
  const auto from_env = run("recommend --alpha 0.25" + q, dir(), "EXREC_CONFIG=run.ini");
  ASSERT_EQ(from_env.code, 0) << from_env.err;
  EXPECT_EQ(nlohmann::json::parse(from_env.out)["config"]["alpha"], 0.25);  // flag wins
}

TEST_F(CliPipeline, HelpListsDefaults) {
  for (const char* sub : {"ingest", "index", "graph", "recommend", "explain", "evaluate", "synth"}) {
    const auto r = run(std::string(sub) + " --help", dir());
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--"), std::string::npos);
  }
  const auto rec = run("recommend --help", dir()).out;
  for (const char* needle : {"[0.5]", "[50]", "[20]", "[0.85]", "[15]", "[42]"})
    EXPECT_NE(rec.find(needle), std::string::npos) << needle;
  const auto idx = run("index --help", dir()).out;
  EXPECT_NE(idx.find("[0.2]"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  test::TempDir dir;
  EXPECT_EQ(run("", dir.path()).code, 1);
  EXPECT_EQ(run("ingest --posts missing.xml --out s", dir.path()).code, 2);
  const auto sample = test::read_file(EXREC_TEST_DATA_DIR "/sample_posts.xml");
  exrec::write_text_file(dir.path() / "trunc.xml", sample.substr(0, sample.size() / 2));
  const auto r = run("ingest --posts trunc.xml --out s", dir.path());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("byte offset"), std::string::npos);
  const auto ok = run("ingest --posts '" EXREC_TEST_DATA_DIR "/sample_posts.xml' --out s", dir.path());
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("questions  2"), std::string::npos);
  EXPECT_NE(ok.out.find("skipped    1"), std::string::npos);
  EXPECT_EQ(run("index --store s --idf cubic", dir.path()).code, 1);
  EXPECT_EQ(run("index --store nowhere", dir.path()).code, 2);
}

TEST(Cli, DateWindow) {
  test::TempDir dir;
  const auto r = run("ingest --posts '" EXREC_TEST_DATA_DIR "/sample_posts.xml' --out s "
                     "--from 2000-01-01 --to 2000-01-02",
                     dir.path());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("questions  0"), std::string::npos);
  EXPECT_EQ(run("ingest --posts '" EXREC_TEST_DATA_DIR "/sample_posts.xml' --out s --from junk",
                dir.path())
                .code,
            1);
}

TEST(Cli, AlphaExtremesDisagreeOnFixture) {
  test::TempDir dir;
  const auto store = fixture::build(fixture::disagreement_specs());
  exrec::write_text_file(dir.path() / "Posts.xml", exrec::export_posts_xml(store));
  exrec::write_text_file(dir.path() / "Users.xml", exrec::export_users_xml(store));
  ASSERT_EQ(run("ingest --posts Posts.xml --users Users.xml --out s", dir.path()).code, 0);
  ASSERT_EQ(run("index --store s", dir.path()).code, 0);
  ASSERT_EQ(run("graph --store s", dir.path()).code, 0);
  auto order = [&](const char* alpha) {
    const auto r = run(std::string("recommend --store s --format json --alpha ") + alpha +
                           " --query '" + fixture::kQuery + "'",
                       dir.path());
    const auto j = nlohmann::json::parse(r.out);
    std::vector<long long> ids;
    for (const auto& e : j["entries"]) ids.push_back(e["user_id"]);
    return ids;
  };
  const auto by_er = order("1");
  const auto by_sig = order("0");
  ASSERT_FALSE(by_er.empty());
  EXPECT_NE(by_er, by_sig);
  EXPECT_EQ(by_er[0], 5);
  EXPECT_EQ(by_sig[0], 6);
}
