#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "exrec/ingest.hpp"
#include "exrec/store_io.hpp"
#include "test_util.hpp"

using namespace exrec;

namespace {

const std::string kPosts = EXREC_TEST_DATA_DIR "/sample_posts.xml";
const std::string kUsers = EXREC_TEST_DATA_DIR "/sample_users.xml";

std::size_t count_rows(const std::string& xml) {
  std::size_t n = 0;
  for (auto pos = xml.find("<row"); pos != std::string::npos;
       pos = xml.find("<row", pos + 1))
    ++n;
  return n;
}

}  // namespace

TEST(Ingest, SingleQuestionRow) {
  const auto r = ingest_xml(
      R"(<posts><row Id="7" PostTypeId="1" CreationDate="2009-04-01T00:00:00.000" OwnerUserId="3" Body="hi" /></posts>)");
  EXPECT_EQ(r.summary.questions, 1u);
  EXPECT_EQ(r.summary.answers, 0u);
  EXPECT_EQ(r.summary.rows, 1u);
}

TEST(Ingest, SampleDumpCounts) {
  const auto r = ingest_dump(kPosts, kUsers);
  EXPECT_EQ(r.summary.questions, 2u);
  EXPECT_EQ(r.summary.answers, 3u);
  EXPECT_EQ(r.summary.skipped, 1u);
  EXPECT_EQ(r.summary.orphans, 0u);
  EXPECT_EQ(r.summary.users, 4u);  // the Community bot (-1) is dropped
  EXPECT_EQ(r.summary.rows, count_rows(test::read_file(kPosts)));
  EXPECT_EQ(r.summary.questions + r.summary.answers + r.summary.skipped,
            r.summary.rows);
}

TEST(Ingest, FieldsDecoded) {
  const auto r = ingest_dump(kPosts, kUsers);
  const Post* q = r.store.find_post(1);
  ASSERT_NE(q, nullptr);
  EXPECT_TRUE(q->is_question());
  EXPECT_EQ(q->owner, 10);
  EXPECT_EQ(q->accepted_answer, 3);
  EXPECT_EQ(q->view_count, 340);
  EXPECT_EQ(q->favorite_count, 4);
  EXPECT_EQ(q->title, "Reverse a linked list");
  EXPECT_EQ(q->body.substr(0, 3), "<p>");
  EXPECT_NE(q->body.find('\n'), std::string::npos);
  const Post* q2 = r.store.find_post(2);
  EXPECT_EQ(q2->favorite_count, 0);  // absent attribute defaults to 0
  EXPECT_EQ(q2->created.to_string(), "2009-03-01T08:30:15.250");
  const Post* a = r.store.find_post(4);
  EXPECT_TRUE(a->is_answer());
  EXPECT_EQ(a->parent, 1);
  EXPECT_EQ(a->score, -1);
  EXPECT_EQ(r.store.find_post(5), nullptr);
  const auto answers = r.store.answers_to(1);
  EXPECT_EQ(std::vector<PostId>(answers.begin(), answers.end()),
            (std::vector<PostId>{3, 4}));
  EXPECT_EQ(r.store.find_user(21)->display_name, "other & helper");
}

TEST(Ingest, MissingOwnerKept) {
  const auto r = ingest_xml(
      R"(<posts><row Id="1" PostTypeId="1" CreationDate="2009-04-01" Body="x" /></posts>)");
  ASSERT_NE(r.store.find_post(1), nullptr);
  EXPECT_FALSE(r.store.find_post(1)->owner.has_value());
  EXPECT_TRUE(r.store.owners().empty());
}

TEST(Ingest, OrphanAnswerRetained) {
  const auto r = ingest_xml(R"(<posts>
    <row Id="1" PostTypeId="1" CreationDate="2009-04-01" OwnerUserId="1" />
    <row Id="2" PostTypeId="2" ParentId="99" CreationDate="2009-04-02" OwnerUserId="2" />
  </posts>)");
  EXPECT_EQ(r.summary.orphans, 1u);
  EXPECT_EQ(r.summary.answers, 1u);
  ASSERT_NE(r.store.find_post(2), nullptr);
  EXPECT_TRUE(r.store.is_orphan(*r.store.find_post(2)));
}

TEST(Ingest, AnswerToAnswerIsOrphan) {
  const auto r = ingest_xml(R"(<posts>
    <row Id="1" PostTypeId="1" CreationDate="2009-04-01" OwnerUserId="1" />
    <row Id="2" PostTypeId="2" ParentId="1" CreationDate="2009-04-02" OwnerUserId="2" />
    <row Id="3" PostTypeId="2" ParentId="2" CreationDate="2009-04-02" OwnerUserId="3" />
  </posts>)");
  EXPECT_EQ(r.summary.orphans, 1u);
  EXPECT_TRUE(r.store.is_orphan(*r.store.find_post(3)));
}

TEST(Ingest, Errors) {
  EXPECT_THROW(ingest_dump("/nonexistent/Posts.xml"), IoError);
  try {
    ingest_xml(R"(<posts><row Id="1" PostTypeId="1" CreationDate="2009-04-01" )");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GT(e.byte_offset(), 0);
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
  EXPECT_THROW(ingest_xml("<users><row Id=\"1\"/></users>"), ParseError);
  EXPECT_THROW(ingest_xml(R"(<posts><item Id="1"/></posts>)"), ParseError);
  EXPECT_THROW(ingest_xml(R"(<posts><row Id="x" PostTypeId="1" CreationDate="2009-04-01"/></posts>)"),
               ParseError);
  EXPECT_THROW(ingest_xml(R"(<posts><row Id="1" PostTypeId="2" CreationDate="2009-04-01"/></posts>)"),
               ParseError);
  EXPECT_THROW(ingest_xml(""), ParseError);
  try {
    ingest_xml(R"(<posts>
      <row Id="5" PostTypeId="1" CreationDate="2009-04-01" />
      <row Id="5" PostTypeId="2" ParentId="5" CreationDate="2009-04-01" />
    </posts>)");
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos);
  }
}

TEST(Ingest, ParseErrorOffsetPointsIntoFile) {
  const std::string xml = R"(<posts><row Id="1" PostTypeId="1" CreationDate="2009-04-01" /><row Id="2" </posts>)";
  try {
    ingest_xml(xml);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.byte_offset(), 60);
    EXPECT_LE(e.byte_offset(), static_cast<std::int64_t>(xml.size()));
  }
}

TEST(Store, RoundTripExportIsBitIdentical) {
  const auto first = ingest_dump(kPosts, kUsers);
  const auto posts_xml = export_posts_xml(first.store);
  const auto users_xml = export_users_xml(first.store);
  const auto second = ingest_xml(posts_xml, users_xml);
  EXPECT_EQ(first.store.posts_jsonl(), second.store.posts_jsonl());
  EXPECT_EQ(first.store.users_jsonl(), second.store.users_jsonl());
  EXPECT_EQ(first.store.hash(), second.store.hash());
  EXPECT_EQ(export_posts_xml(second.store), posts_xml);
}

TEST(Store, SaveLoadDeterministic) {
  test::TempDir a, b;
  const auto r1 = ingest_dump(kPosts, kUsers);
  const auto r2 = ingest_dump(kPosts, kUsers);
  save_store(a.path(), r1.store, r1.summary);
  save_store(b.path(), r2.store, r2.summary);
  for (const char* f : {"manifest.json", "posts.jsonl", "users.jsonl"})
    EXPECT_EQ(test::read_file(a.path() / f), test::read_file(b.path() / f)) << f;
  const auto loaded = load_store(a.path());
  EXPECT_EQ(loaded.hash(), r1.store.hash());
  EXPECT_EQ(loaded.posts_jsonl(), r1.store.posts_jsonl());
}

TEST(Store, TamperedStoreRejected) {
  test::TempDir dir;
  const auto r = ingest_dump(kPosts, kUsers);
  save_store(dir.path(), r.store, r.summary);
  auto posts = test::read_file(dir.path() / "posts.jsonl");
  posts.replace(posts.find("\"score\":20"), 10, "\"score\":21");
  write_text_file(dir.path() / "posts.jsonl", posts);
  EXPECT_THROW(load_store(dir.path()), IntegrityError);
}

TEST(DateFilter, Windows) {
  const auto store = ingest_dump(kPosts, kUsers).store;
  const auto all = date_filter(store, *Timestamp::parse("2000-01-01"),
                               *Timestamp::parse("2100-01-01"));
  EXPECT_EQ(all.posts_jsonl(), store.posts_jsonl());
  const auto none = date_filter(store, *Timestamp::parse("2001-01-01"),
                                *Timestamp::parse("2001-12-31"));
  EXPECT_TRUE(none.empty());
  EXPECT_THROW(date_filter(store, *Timestamp::parse("2010-01-01"),
                           *Timestamp::parse("2009-01-01")),
               ArgumentError);
}

TEST(DateFilter, PartialWindow) {
  const auto store = ingest_xml(R"(<posts>
    <row Id="1" PostTypeId="1" CreationDate="2009-02-17T23:59:59.999" OwnerUserId="1" />
    <row Id="2" PostTypeId="1" CreationDate="2009-02-18T00:00:00.000" OwnerUserId="1" />
    <row Id="3" PostTypeId="2" ParentId="2" CreationDate="2009-06-07T00:00:00.000" OwnerUserId="2" />
    <row Id="4" PostTypeId="2" ParentId="2" CreationDate="2009-06-08T00:00:00.000" OwnerUserId="3" />
  </posts>)").store;
  const auto view = date_filter(store, *Timestamp::parse("2009-02-18"),
                                *Timestamp::parse("2009-06-07"));
  EXPECT_EQ(view.posts().size(), 2u);
  EXPECT_NE(view.find_post(2), nullptr);
  EXPECT_NE(view.find_post(3), nullptr);
  const auto answers = view.answers_to(2);
  EXPECT_EQ(answers.size(), 1u);
}

TEST(DateFilter, AnswerOfExcludedQuestionBecomesOrphan) {
  const auto store = ingest_xml(R"(<posts>
    <row Id="1" PostTypeId="1" CreationDate="2009-01-01" OwnerUserId="1" />
    <row Id="2" PostTypeId="2" ParentId="1" CreationDate="2009-03-01" OwnerUserId="2" />
  </posts>)").store;
  const auto view = date_filter(store, *Timestamp::parse("2009-02-18"),
                                *Timestamp::parse("2009-06-07"));
  EXPECT_EQ(view.orphan_count(), 1u);
}

TEST(Timestamp, ParseAndFormat) {
  EXPECT_EQ(Timestamp::parse("1970-01-01")->millis(), 0);
  EXPECT_EQ(Timestamp::parse("2009-02-18T14:05:31.1")->to_string(),
            "2009-02-18T14:05:31.100");
  EXPECT_EQ(Timestamp::parse("1969-12-31T23:59:59.999")->millis(), -1);
  EXPECT_EQ(Timestamp(-1).to_string(), "1969-12-31T23:59:59.999");
  EXPECT_FALSE(Timestamp::parse("2009-13-01"));
  EXPECT_FALSE(Timestamp::parse("2009-02-18T14:05"));
  EXPECT_FALSE(Timestamp::parse("garbage"));
  EXPECT_LT(*Timestamp::parse("2009-02-18"), *Timestamp::parse("2009-02-18T00:00:00.001"));
}
