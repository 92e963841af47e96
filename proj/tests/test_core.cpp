#include <gtest/gtest.h>

#include "senm/core.hpp"
#include "senm/csv.hpp"
#include "senm/keyvalue.hpp"
#include "senm/registry.hpp"

namespace senm {
namespace {

TEST(Enums, RoundTripThroughText) {
  for (auto s : {Sentiment::positive, Sentiment::neutral, Sentiment::negative}) {
    EXPECT_EQ(parse_sentiment(to_string(s)), s);
  }
  for (auto k : {RecordKind::original, RecordKind::reply, RecordKind::mention_only, RecordKind::retweet,
                 RecordKind::quote_retweet}) {
    EXPECT_EQ(parse_record_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_sentiment("Negative"));
  EXPECT_FALSE(parse_record_kind("tweet"));
}

TEST(Csv, SplitsQuotedFields) {
  std::vector<std::string> f;
  ASSERT_TRUE(csv::split("a,\"b,c\",\"d\"\"e\",", f));
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[1], "b,c");
  EXPECT_EQ(f[2], "d\"e");
  EXPECT_EQ(f[3], "");
  EXPECT_FALSE(csv::split("\"open", f));
}

TEST(Csv, EscapeRoundTrips) {
  for (std::string s : {"plain", "with,comma", "quote\"inside", ""}) {
    std::vector<std::string> f;
    ASSERT_TRUE(csv::split(csv::escape(s), f));
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0], s);
  }
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::trim("  x \r"), "x");
}

TEST(KeyValues, ParsesCommentsAndOverrides) {
  const auto kv = KeyValues::parse("# header\na = 1\nb = x, y # trailing\n\na = 2\n");
  EXPECT_EQ(kv.get("a"), "2");
  EXPECT_EQ(kv.get("b"), "x, y");
  EXPECT_EQ(kv.get_int("a"), 2);
  EXPECT_FALSE(kv.get("missing"));
  EXPECT_EQ(kv.unknown_keys({"a"}), std::vector<std::string>{"b"});
}

TEST(KeyValues, TypedAccessorsRejectBadValues) {
  const auto kv = KeyValues::parse("n = abc\nflag = maybe\nlist = 1,2,x\nok = 0.5, 1.5");
  EXPECT_THROW(kv.get_double("n"), Error);
  EXPECT_THROW(kv.get_bool("flag"), Error);
  EXPECT_THROW(kv.get_doubles("list"), Error);
  EXPECT_EQ(kv.get_doubles("ok"), (std::vector<double>{0.5, 1.5}));
  try {
    KeyValues::parse("no equals sign");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
}

TEST(Registry, InternsDenselyAndFinds) {
  AccountRegistry r;
  bool inserted = false;
  const auto a = r.intern("alice", &inserted);
  EXPECT_TRUE(inserted);
  const auto b = r.intern("bob");
  EXPECT_EQ(r.intern("alice", &inserted), a);
  EXPECT_FALSE(inserted);
  EXPECT_EQ(a.value, 0u);
  EXPECT_EQ(b.value, 1u);
  EXPECT_EQ(r.name(b), "bob");
  EXPECT_EQ(r.find("bob"), b);
  EXPECT_FALSE(r.find("carol"));
  EXPECT_EQ(r.size(), 2u);
}

}  // namespace
}  // namespace senm
