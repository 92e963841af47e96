#include <gtest/gtest.h>

#include "senm/outputs.hpp"
#include "support.hpp"

namespace senm {
namespace {

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  test::TempDir dir("sha");
  test::write_file(dir / "f", "abc");
  EXPECT_EQ(sha256_file(dir / "f"), sha256_hex("abc"));
}

TEST(OutputWriter, EveryFileNamesItsManifest) {
  test::TempDir dir("writer");
  OutputWriter w(dir.path(), "m123");
  w.write("a.jsonl", FileKind::jsonl, "{\"x\":1}\n");
  w.write("b.csv", FileKind::csv, "h\n1\n");
  w.write("c.md", FileKind::markdown, "# t\n");
  w.write("d.svg", FileKind::svg, "<svg/>\n");
  EXPECT_EQ(test::read_file(dir / "a.jsonl"), "{\"manifest\":\"m123\"}\n{\"x\":1}\n");
  EXPECT_EQ(test::read_file(dir / "b.csv"), "# manifest: m123\nh\n1\n");
  EXPECT_TRUE(test::read_file(dir / "c.md").starts_with("<!-- manifest: m123 -->\n"));
  EXPECT_TRUE(test::read_file(dir / "d.svg").starts_with("<!-- manifest: m123 -->\n"));
  ASSERT_EQ(w.digests().size(), 4u);
  for (const auto& [name, digest] : w.digests()) EXPECT_EQ(digest, sha256_file(dir / name)) << name;
}

SignedEgoNetwork sample_network(AccountRegistry& names) {
  for (auto n : {"a1", "a2", "a3", "a4", "ego"}) names.intern(n);
  SignedEgoNetwork s;
  s.network.ego = *names.find("ego");
  s.network.clusters = {{20.0, 20.0, {*names.find("a1")}}, {3.0, 3.2, {*names.find("a2"), *names.find("a3"), *names.find("a4")}}};
  s.network.circle_sizes = {1, 4};
  s.network.bandwidth = 0.5;
  s.signs = {{*names.find("a1"), Sign::negative}, {*names.find("a2"), Sign::positive}, {*names.find("a3"), Sign::positive}};
  s.unsigned_alters = {*names.find("a4")};
  s.negativity_pct = 100.0 / 3.0;
  return s;
}

TEST(NetworkFiles, RoundTripThroughLoader) {
  AccountRegistry names;
  const auto s = sample_network(names);
  test::TempDir dir("netfiles");
  OutputWriter w(dir.path(), "m");
  w.write("ego_networks.jsonl", FileKind::jsonl, ego_network_json(s.network, names, 42) + "\n");
  w.write("signed_networks.jsonl", FileKind::jsonl, signed_network_json(s, names) + "\n");
  const auto loaded = load_signed_networks(dir.path());
  ASSERT_EQ(loaded.networks.size(), 1u);
  const auto& got = loaded.networks[0];
  EXPECT_EQ(loaded.interactions[0], 42u);
  EXPECT_EQ(got.network.circle_sizes, s.network.circle_sizes);
  EXPECT_EQ(got.signs.size(), 3u);
  EXPECT_EQ(got.unsigned_alters.size(), 1u);
  EXPECT_DOUBLE_EQ(*got.negativity_pct, *s.negativity_pct);
  EXPECT_EQ(loaded.accounts.name(got.network.ego), "ego");
}

TEST(NetworkFiles, InconsistentFilesAreCorrupt) {
  AccountRegistry names;
  auto s = sample_network(names);
  s.unsigned_alters.clear();
  test::TempDir dir("netbad");
  test::write_file(dir / "ego_networks.jsonl", ego_network_json(s.network, names, 1) + "\n");
  test::write_file(dir / "signed_networks.jsonl", signed_network_json(s, names) + "\n");
  try {
    load_signed_networks(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::corrupt_input);
  }
}

DatasetStats sample_stats() {
  DatasetStats d;
  d.dataset_type = "Generic";
  d.dataset_region = "Italy";
  d.n_egos = 3;
  d.n_relationships = 300;
  d.n_interactions = 4000;
  d.network_size = {100.0, 88.7, 111.3, 3};
  d.n_circles = {4.0, 3.0, 5.0, 3};
  d.n_five_circle_egos = 2;
  d.circle_sizes_5 = std::vector<double>{1.5, 5.0, 15.0, 50.0, 150.0};
  d.user_negativity_pct = 61.25;
  CircleNegativityTable t;
  t.n_egos = 2;
  for (int k = 0; k < 5; ++k) t.circles.push_back({0.5 * (k + 1), 50.0 + k});
  t.range_inner = 3.0;
  d.circle_negativity_5 = t;
  d.unsigned_relationships = 4;
  return d;
}

TEST(DatasetStatsJson, RoundTrips) {
  const auto d = sample_stats();
  const auto back = parse_dataset_stats(dataset_stats_json(d, "m"));
  EXPECT_EQ(back.dataset_type, d.dataset_type);
  EXPECT_EQ(back.n_interactions, d.n_interactions);
  EXPECT_DOUBLE_EQ(back.network_size.upper, d.network_size.upper);
  EXPECT_EQ(back.circle_sizes_5, d.circle_sizes_5);
  EXPECT_EQ(back.user_negativity_pct, d.user_negativity_pct);
  ASSERT_TRUE(back.circle_negativity_5);
  EXPECT_DOUBLE_EQ(back.circle_negativity_5->circles[4].pct, 54.0);
  EXPECT_DOUBLE_EQ(back.circle_negativity_5->range_inner, 3.0);
  EXPECT_EQ(back.unsigned_relationships, 4u);
}

TEST(StatsTables, CircleNegativityHasFiveRowsAndRange) {
  const std::vector<DatasetStats> s{sample_stats()};
  const auto csv = stats_table_csv(s, 6);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "type,region,circle,mean_count,pct,range_c1_c4");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_TRUE(line.starts_with("Generic,Italy,C" + std::to_string(rows) + ","));
    EXPECT_TRUE(line.ends_with(",3.0000"));
  }
  EXPECT_EQ(rows, 5);
  EXPECT_THROW(stats_table_csv(s, 5), Error);
}

TEST(StatsTables, HeadersMatchPublishedLayouts) {
  const std::vector<DatasetStats> s{sample_stats()};
  auto header = [&](int t) { return stats_table_csv(s, t).substr(0, stats_table_csv(s, t).find('\n')); };
  EXPECT_EQ(header(1), "type,region,egos,relationships,interactions");
  EXPECT_EQ(header(2), "type,region,mean_size,size_lo,size_hi,mean_circles,circles_lo,circles_hi,five_circle_egos");
  EXPECT_EQ(header(3), "type,region,c1,c2,c3,c4,c5");
  EXPECT_TRUE(stats_markdown(s, {1, 2, 3, 4, 6}).find("Italy") != std::string::npos);
  EXPECT_FALSE(circle_negativity_svg(s[0]).empty());
}

TEST(NegativityGrid, RegionByTypeWithRanges) {
  auto a = sample_stats();
  auto b = sample_stats();
  b.dataset_type = "Journalists";
  b.user_negativity_pct = 71.25;
  const std::vector<DatasetStats> s{a, b};
  const auto grid = negativity_grid_csv(s);
  EXPECT_NE(grid.find("Italy"), std::string::npos);
  EXPECT_NE(grid.find("10.0000"), std::string::npos);
}

}  // namespace
}  // namespace senm
