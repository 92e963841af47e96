#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "senm/ingest.hpp"
#include "support.hpp"

namespace senm {
namespace {

using test::at;
using test::record;

TEST(Rfc3339, ParsesOffsetsAndFractions) {
  const auto base = parse_rfc3339("2021-03-04T05:06:07Z");
  ASSERT_TRUE(base);
  EXPECT_EQ(format_rfc3339(*base), "2021-03-04T05:06:07Z");
  EXPECT_EQ(parse_rfc3339("2021-03-04T05:06:07.999Z"), base);
  EXPECT_EQ(parse_rfc3339("2021-03-04T07:06:07+02:00"), base);
  EXPECT_EQ(parse_rfc3339("2021-03-04T04:06:07-01:00"), base);
  EXPECT_FALSE(parse_rfc3339("2021-13-04T05:06:07Z"));
  EXPECT_FALSE(parse_rfc3339("2021-02-30T05:06:07Z"));
  EXPECT_FALSE(parse_rfc3339("yesterday"));
}

TEST(ParseTimelines, EmptyInputYieldsNothing) {
  ParseReport rep;
  const auto d = parse_timelines_text("", {}, &rep);
  EXPECT_TRUE(d.timelines.empty());
  EXPECT_EQ(rep.lines, 0u);
  EXPECT_EQ(rep.malformed, 0u);
}

TEST(ParseTimelines, ResortsOutOfOrderRecords) {
  const std::vector<RawRecord> recs{
      record("c", "alice", at(2021, 3, 1), RecordKind::original),
      record("a", "alice", at(2021, 1, 1), RecordKind::original),
      record("b", "alice", at(2021, 2, 1), RecordKind::original),
  };
  const auto d = parse_timelines_text(test::jsonl(recs));
  ASSERT_EQ(d.timelines.size(), 1u);
  const auto& t = d.timelines[0];
  ASSERT_EQ(t.records.size(), 3u);
  EXPECT_EQ(d.records.name(t.records[0].id), "a");
  EXPECT_EQ(d.records.name(t.records[1].id), "b");
  EXPECT_EQ(d.records.name(t.records[2].id), "c");
  EXPECT_EQ(t.span_start, at(2021, 1, 1));
  EXPECT_EQ(t.span_end, at(2021, 3, 1));
}

TEST(ParseTimelines, CountsOneMalformedLineInHundred) {
  std::string text;
  for (int i = 0; i < 100; ++i) {
    if (i == 41) {
      text += "{\"id\": \"broken\", \"author_id\": \n";
      continue;
    }
    text += to_jsonl(record("r" + std::to_string(i), "u" + std::to_string(i % 7), at(2021, 1, 1, 0, i),
                            RecordKind::original)) +
            "\n";
  }
  ParseReport rep;
  const auto d = parse_timelines_text(text, {}, &rep);
  EXPECT_EQ(rep.lines, 100u);
  EXPECT_EQ(rep.records, 99u);
  EXPECT_EQ(rep.malformed, 1u);
  ASSERT_EQ(rep.examples.size(), 1u);
  EXPECT_EQ(rep.examples[0].line, 42u);
  EXPECT_EQ(d.timelines.size(), 7u);
}

TEST(ParseTimelines, TooManyMalformedLinesIsFatal) {
  std::string text;
  for (int i = 0; i < 10; ++i) {
    text += i < 2 ? "not json\n" : to_jsonl(record("r" + std::to_string(i), "u", at(2021, 1, 1), RecordKind::original)) + "\n";
  }
  try {
    parse_timelines_text(text);
    FAIL() << "expected corrupt_input";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::corrupt_input);
  }
  // Exactly 10% is still accepted.
  text = "not json\n";
  for (int i = 0; i < 9; ++i) text += to_jsonl(record("r" + std::to_string(i), "u", at(2021, 1, 1), RecordKind::original)) + "\n";
  EXPECT_NO_THROW(parse_timelines_text(text));
}

TEST(ParseTimelines, MissingFileIsIoError) {
  try {
    parse_timelines("/nonexistent/timelines.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
}

TEST(ParseTimelines, ReplyWithoutTargetsAndDuplicateIdsAreMalformed) {
  std::string text = to_jsonl(record("x", "u", at(2021, 1, 1), RecordKind::original)) + "\n";
  text += to_jsonl(record("x", "u", at(2021, 1, 2), RecordKind::original)) + "\n";
  text += to_jsonl(record("y", "u", at(2021, 1, 2), RecordKind::reply)) + "\n";
  for (int i = 0; i < 30; ++i) text += to_jsonl(record("z" + std::to_string(i), "u", at(2021, 1, 3), RecordKind::original)) + "\n";
  ParseReport rep;
  parse_timelines_text(text, {}, &rep);
  EXPECT_EQ(rep.malformed, 2u);
  EXPECT_EQ(rep.duplicate_ids, 1u);
}

TEST(ParseTimelines, SkipsManifestHeaderLine) {
  std::string text = "{\"manifest\":\"abc\"}\n";
  text += to_jsonl(record("a", "u", at(2021, 1, 1), RecordKind::original)) + "\n";
  ParseReport rep;
  const auto d = parse_timelines_text(text, {}, &rep);
  EXPECT_EQ(rep.lines, 1u);
  EXPECT_EQ(rep.malformed, 0u);
  EXPECT_EQ(d.records.size(), 1u);
}

TEST(ParseTimelines, ShardCountDoesNotChangeResult) {
  std::mt19937_64 rng(5);
  std::vector<RawRecord> recs;
  for (int i = 0; i < 3000; ++i) {
    const int author = static_cast<int>(rng() % 40);
    std::vector<std::string> targets;
    for (unsigned k = 0; k < rng() % 3; ++k) targets.push_back("u" + std::to_string(rng() % 60));
    const auto kind = targets.empty() ? RecordKind::original : RecordKind::mention_only;
    recs.push_back(record("r" + std::to_string(i), "u" + std::to_string(author),
                          at(2021, 1, 1) + std::chrono::seconds(rng() % 10'000'000), kind, targets));
  }
  const std::string text = test::jsonl(recs);
  ParseOptions one;
  ParseOptions many;
  many.jobs = 7;
  many.block_bytes = 1 << 16;
  const auto a = parse_timelines_text(text, one);
  const auto b = parse_timelines_text(text, many);
  ASSERT_EQ(a.timelines.size(), b.timelines.size());
  ASSERT_EQ(a.accounts.size(), b.accounts.size());
  for (std::size_t i = 0; i < a.accounts.size(); ++i) {
    EXPECT_EQ(a.accounts.name(AccountId{static_cast<std::uint32_t>(i)}),
              b.accounts.name(AccountId{static_cast<std::uint32_t>(i)}));
  }
  for (std::size_t t = 0; t < a.timelines.size(); ++t) {
    const auto ia = extract_interactions(a.timelines[t]);
    const auto ib = extract_interactions(b.timelines[t]);
    ASSERT_EQ(ia.size(), ib.size());
    for (std::size_t k = 0; k < ia.size(); ++k) {
      EXPECT_EQ(ia[k].alter, ib[k].alter);
      EXPECT_EQ(a.records.name(ia[k].source_record), b.records.name(ib[k].source_record));
    }
  }
}

TEST(Extract, PlainRetweetsAreNotCommunications) {
  const auto d = test::build({
      record("1", "a", at(2021, 1, 1), RecordKind::retweet, {"b"}, std::nullopt, ""),
      record("2", "a", at(2021, 1, 2), RecordKind::retweet, {"c"}, std::nullopt, ""),
  });
  ExtractionStats st;
  EXPECT_TRUE(extract_interactions(d.timelines.at(0), &st).empty());
  EXPECT_EQ(st.non_communications, 2u);
}

TEST(Extract, ReplyToTwoAccountsFansOut) {
  const auto d = test::build({record("1", "a", at(2021, 1, 1), RecordKind::reply, {"b", "c"}, Sentiment::negative)});
  const auto& tl = *d.find_timeline(*d.accounts.find("a"));
  const auto out = extract_interactions(tl);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].source_record, out[1].source_record);
  EXPECT_NE(out[0].alter, out[1].alter);
  EXPECT_EQ(out[0].sentiment, Sentiment::negative);
}

TEST(Extract, SelfReplyYieldsNothing) {
  const auto d = test::build({record("1", "a", at(2021, 1, 1), RecordKind::reply, {"a"})});
  ExtractionStats st;
  EXPECT_TRUE(extract_interactions(d.timelines.at(0), &st).empty());
  EXPECT_EQ(st.self_targets, 1u);
}

TEST(Extract, QuoteWithoutTextIsDowngraded) {
  const auto d = test::build({
      record("1", "a", at(2021, 1, 1), RecordKind::quote_retweet, {"b"}, std::nullopt, ""),
      record("2", "a", at(2021, 1, 2), RecordKind::quote_retweet, {"b"}, std::nullopt, "my take"),
  });
  ExtractionStats st;
  const auto out = extract_interactions(d.timelines.at(0), &st);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(st.downgraded_quotes, 1u);
}

TEST(Extract, RepeatedTargetInOneRecordCountsOnce) {
  const auto d = test::build({record("1", "a", at(2021, 1, 1), RecordKind::mention_only, {"b", "b", "c"})});
  EXPECT_EQ(extract_interactions(d.timelines.at(0)).size(), 2u);
}

TEST(RelationshipIndex, EmptyInputEmptyMap) { EXPECT_TRUE(build_relationship_index({}).empty()); }

TEST(RelationshipIndex, CountsMultiplicity) {
  const AccountId a{0}, b{1}, c{2};
  std::vector<Interaction> in;
  for (int i = 0; i < 5; ++i) in.push_back({a, b, at(2021, 1, 1), Sentiment::positive, RecordIndex{0}});
  for (int i = 0; i < 2; ++i) in.push_back({a, c, at(2021, 1, 1), Sentiment::negative, RecordIndex{0}});
  const auto idx = build_relationship_index(in);
  ASSERT_EQ(idx.size(), 2u);
  EXPECT_EQ(idx.at({a, b}).interaction_count, 5u);
  EXPECT_EQ(idx.at({a, c}).interaction_count, 2u);
  EXPECT_EQ(idx.at({a, c}).sentiment.negative, 2u);
}

TEST(RelationshipIndex, DirectedPairsAreDistinct) {
  const AccountId a{0}, b{1};
  const std::vector<Interaction> in{{a, b, at(2021, 1, 1), std::nullopt, RecordIndex{0}},
                                    {b, a, at(2021, 1, 1), std::nullopt, RecordIndex{1}}};
  EXPECT_EQ(build_relationship_index(in).size(), 2u);
}

// Property: permutation invariance and conservation of interactions.
TEST(RelationshipIndex, ShuffledInputGivesIdenticalMap) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Interaction> in;
    const int n = static_cast<int>(rng() % 400);
    for (int i = 0; i < n; ++i) {
      const auto s = static_cast<Sentiment>(rng() % 3);
      in.push_back({AccountId{static_cast<std::uint32_t>(rng() % 4)}, AccountId{static_cast<std::uint32_t>(rng() % 30)},
                    at(2021, 1, 1), rng() % 10 ? std::optional(s) : std::nullopt, RecordIndex{static_cast<std::uint32_t>(i)}});
    }
    auto shuffled = in;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto a = build_relationship_index(in);
    const auto b = build_relationship_index(shuffled);
    EXPECT_EQ(a, b);
    std::size_t total = 0;
    for (const auto& [k, r] : a) {
      total += r.interaction_count;
      EXPECT_EQ(r.sentiment.total(), r.interaction_count);
    }
    EXPECT_EQ(total, in.size());
  }
}

TEST(Extract, TimelineOrderIndependent) {
  std::vector<RawRecord> recs;
  for (int i = 0; i < 50; ++i) {
    recs.push_back(record("r" + std::to_string(i), "a", at(2021, 1, 1 + i % 28, i % 24), RecordKind::mention_only,
                          {"b" + std::to_string(i % 5)}, Sentiment::positive));
  }
  auto shuffled = recs;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(3));
  const auto da = test::build(recs);
  const auto db = test::build(shuffled);
  const auto ia = extract_interactions(da.timelines[0]);
  const auto ib = extract_interactions(db.timelines[0]);
  ASSERT_EQ(ia.size(), ib.size());
  for (std::size_t k = 0; k < ia.size(); ++k) {
    EXPECT_EQ(da.records.name(ia[k].source_record), db.records.name(ib[k].source_record));
    EXPECT_EQ(da.accounts.name(ia[k].alter), db.accounts.name(ib[k].alter));
  }
}

TEST(Joins, SentimentAndTopicCsv) {
  test::TempDir dir("join");
  auto d = test::build({record("r1", "a", at(2021, 1, 1), RecordKind::reply, {"b"}),
                        record("r2", "a", at(2021, 1, 2), RecordKind::reply, {"b"})});
  test::write_file(dir / "s.csv", "# manifest: x\nrecord_id,label\nr1,negative\nr2,positive\nr9,neutral\n");
  const auto rep = join_sentiments(d, dir / "s.csv");
  EXPECT_EQ(rep.applied, 2u);
  EXPECT_EQ(rep.unknown_records, 1u);
  EXPECT_EQ(d.record(*d.records.find("r1")).sentiment, Sentiment::negative);
  test::write_file(dir / "t.csv", "record_id,topic_id\nr2,7\n");
  join_topics(d, dir / "t.csv");
  EXPECT_EQ(d.record(*d.records.find("r2")).topic_id(), 7);
  EXPECT_FALSE(d.record(*d.records.find("r1")).topic_id());
}

TEST(Joins, BadLabelsBeyondLimitAreFatal) {
  test::TempDir dir("join_bad");
  auto d = test::build({record("r1", "a", at(2021, 1, 1), RecordKind::reply, {"b"})});
  test::write_file(dir / "s.csv", "r1,angry\n");
  EXPECT_THROW(join_sentiments(d, dir / "s.csv"), Error);
}

}  // namespace
}  // namespace senm
