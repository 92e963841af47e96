#include "senm/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "senm/csv.hpp"

namespace senm {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io, "SHA-256 failed");
  }
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(ErrorCode::io, "SHA-256 failed");
  }
  std::vector<char> buf(std::size_t{1} << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

OutputWriter::OutputWriter(std::filesystem::path dir, std::string manifest_id)
    : dir_(std::move(dir)), manifest_id_(std::move(manifest_id)) {
  std::filesystem::create_directories(dir_);
}

void OutputWriter::write(const std::string& name, FileKind kind, std::string_view body) {
  std::string text;
  switch (kind) {
    case FileKind::jsonl: text = json{{"manifest", manifest_id_}}.dump() + "\n"; break;
    case FileKind::csv: text = fmt::format("# manifest: {}\n", manifest_id_); break;
    case FileKind::markdown:
    case FileKind::svg: text = fmt::format("<!-- manifest: {} -->\n", manifest_id_); break;
    case FileKind::json: break;
  }
  text += body;
  std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write {}", (dir_ / name).string()));
  digests_.emplace_back(name, sha256_hex(text));
}

std::string ego_network_json(const EgoNetwork& en, const AccountRegistry& names, std::size_t interactions) {
  json clusters = json::array();
  for (const auto& c : en.clusters) {
    json ids = json::array();
    for (AccountId a : c.alters) ids.push_back(names.name(a));
    clusters.push_back({{"mode", c.mode_frequency}, {"alter_ids", std::move(ids)}});
  }
  json j{{"ego_id", names.name(en.ego)},
         {"n_circles", en.n_circles()},
         {"circle_sizes", en.circle_sizes},
         {"clusters", std::move(clusters)},
         {"interactions", interactions}};
  if (en.bandwidth) j["bandwidth"] = *en.bandwidth;
  return j.dump();
}

std::string signed_network_json(const SignedEgoNetwork& s, const AccountRegistry& names) {
  // std::map keeps sorted keys, so alter order is by name like the ids.
  json signs = json::object();
  for (const auto& [alter, sign] : s.signs) signs[std::string(names.name(alter))] = std::string(1, sign_symbol(sign));
  json j{{"ego_id", names.name(s.network.ego)}, {"signs", std::move(signs)}};
  j["negativity_pct"] = s.negativity_pct ? json(*s.negativity_pct) : json(nullptr);
  if (!s.unsigned_alters.empty()) {
    json u = json::array();
    for (AccountId a : s.unsigned_alters) u.push_back(names.name(a));
    j["unsigned"] = std::move(u);
  }
  return j.dump();
}

std::string filter_report_json(const FilterReport& r, std::string_view manifest_id) {
  json j{{"manifest", manifest_id},
         {"egos_in", r.egos_in},
         {"egos_out", r.egos_out},
         {"removed_nonhuman", r.removed_nonhuman},
         {"removed_irregular", r.removed_irregular},
         {"removed_irregular_by_reason",
          {{"min_volume", r.removed_min_volume}, {"short_span", r.removed_short_span}, {"low_rate", r.removed_low_rate}}},
         {"relationships_in", r.relationships_in},
         {"relationships_out", r.relationships_out},
         {"removed_inactive", r.removed_inactive}};
  return j.dump(2) + "\n";
}

namespace {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::corrupt_input, fmt::format("{}:{}: not a JSON object", path.string(), line_no));
    }
    if (j.contains("manifest") && !j.contains("ego_id")) continue;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

LoadedNetworks load_signed_networks(const std::filesystem::path& dir) {
  const auto egos = read_jsonl(dir / "ego_networks.jsonl");
  const auto signs = read_jsonl(dir / "signed_networks.jsonl");
  LoadedNetworks out;
  try {
    std::vector<std::string> names;
    for (const auto& e : egos) {
      names.push_back(e.at("ego_id").get<std::string>());
      for (const auto& c : e.at("clusters")) {
        for (const auto& a : c.at("alter_ids")) names.push_back(a.get<std::string>());
      }
    }
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    for (const auto& n : names) out.accounts.intern(n);

    std::map<std::string, const json*> sign_by_ego;
    for (const auto& s : signs) sign_by_ego[s.at("ego_id").get<std::string>()] = &s;

    for (const auto& e : egos) {
      const auto ego_name = e.at("ego_id").get<std::string>();
      SignedEgoNetwork s;
      s.network.ego = *out.accounts.find(ego_name);
      std::size_t cumulative = 0;
      for (const auto& c : e.at("clusters")) {
        EgoCluster cl;
        cl.mode_frequency = c.at("mode").get<double>();
        for (const auto& a : c.at("alter_ids")) cl.alters.push_back(*out.accounts.find(a.get<std::string>()));
        std::sort(cl.alters.begin(), cl.alters.end());
        cumulative += cl.alters.size();
        s.network.circle_sizes.push_back(cumulative);
        s.network.clusters.push_back(std::move(cl));
      }
      if (e.contains("bandwidth")) s.network.bandwidth = e["bandwidth"].get<double>();
      auto it = sign_by_ego.find(ego_name);
      if (it == sign_by_ego.end()) {
        throw Error(ErrorCode::corrupt_input, fmt::format("ego {} has no signed network", ego_name), {ego_name});
      }
      const json& sj = *it->second;
      std::size_t negative = 0;
      for (const auto& [alter, sym] : sj.at("signs").items()) {
        auto id = out.accounts.find(alter);
        if (!id || !s.network.cluster_of(*id)) {
          throw Error(ErrorCode::corrupt_input, fmt::format("ego {}: signed alter {} not in its network", ego_name, alter));
        }
        const auto v = sym.get<std::string>();
        if (v != "+" && v != "-") throw Error(ErrorCode::corrupt_input, fmt::format("ego {}: bad sign '{}'", ego_name, v));
        s.signs.emplace(*id, v == "+" ? Sign::positive : Sign::negative);
        negative += v == "-";
      }
      if (sj.contains("unsigned")) {
        for (const auto& a : sj["unsigned"]) s.unsigned_alters.push_back(*out.accounts.find(a.get<std::string>()));
      }
      if (s.signs.size() + s.unsigned_alters.size() != s.network.active_network_size()) {
        throw Error(ErrorCode::corrupt_input, fmt::format("ego {}: signs do not cover every alter", ego_name));
      }
      if (!s.signs.empty()) {
        s.negativity_pct = 100.0 * static_cast<double>(negative) / static_cast<double>(s.signs.size());
      }
      out.interactions.push_back(e.value("interactions", std::size_t{0}));
      out.networks.push_back(std::move(s));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::corrupt_input, fmt::format("{}: {}", dir.string(), ex.what()));
  }
  return out;
}

namespace {

json ci_json(const MeanCI& c) { return {{"mean", c.mean}, {"lower", c.lower}, {"upper", c.upper}, {"n", c.n}}; }

MeanCI ci_from(const json& j) {
  return MeanCI{j.at("mean").get<double>(), j.at("lower").get<double>(), j.at("upper").get<double>(),
                j.at("n").get<std::size_t>()};
}

}  // namespace

std::string dataset_stats_json(const DatasetStats& s, std::string_view manifest_id) {
  json j{{"manifest", manifest_id},
         {"dataset_type", s.dataset_type},
         {"dataset_region", s.dataset_region},
         {"n_egos", s.n_egos},
         {"n_relationships", s.n_relationships},
         {"n_interactions", s.n_interactions},
         {"network_size", ci_json(s.network_size)},
         {"n_circles", ci_json(s.n_circles)},
         {"n_five_circle_egos", s.n_five_circle_egos},
         {"unsigned_relationships", s.unsigned_relationships}};
  j["circle_sizes_5"] = s.circle_sizes_5 ? json(*s.circle_sizes_5) : json(nullptr);
  j["user_negativity_pct"] = s.user_negativity_pct ? json(*s.user_negativity_pct) : json(nullptr);
  if (s.circle_negativity_5) {
    json circles = json::array();
    for (const auto& c : s.circle_negativity_5->circles) circles.push_back({{"mean_count", c.mean_count}, {"pct", c.pct}});
    j["circle_negativity_5"] = {
        {"n_egos", s.circle_negativity_5->n_egos}, {"circles", circles}, {"range_c1_c4", s.circle_negativity_5->range_inner}};
  } else {
    j["circle_negativity_5"] = nullptr;
  }
  return j.dump(2) + "\n";
}

DatasetStats parse_dataset_stats(std::string_view text) {
  DatasetStats s;
  try {
    const auto j = json::parse(text);
    s.dataset_type = j.at("dataset_type").get<std::string>();
    s.dataset_region = j.at("dataset_region").get<std::string>();
    s.n_egos = j.at("n_egos").get<std::size_t>();
    s.n_relationships = j.at("n_relationships").get<std::size_t>();
    s.n_interactions = j.at("n_interactions").get<std::size_t>();
    s.network_size = ci_from(j.at("network_size"));
    s.n_circles = ci_from(j.at("n_circles"));
    s.n_five_circle_egos = j.at("n_five_circle_egos").get<std::size_t>();
    s.unsigned_relationships = j.value("unsigned_relationships", std::size_t{0});
    if (!j.at("circle_sizes_5").is_null()) s.circle_sizes_5 = j["circle_sizes_5"].get<std::vector<double>>();
    if (!j.at("user_negativity_pct").is_null()) s.user_negativity_pct = j["user_negativity_pct"].get<double>();
    if (const auto& c = j.at("circle_negativity_5"); !c.is_null()) {
      CircleNegativityTable t;
      t.n_egos = c.at("n_egos").get<std::size_t>();
      for (const auto& row : c.at("circles")) {
        t.circles.push_back({row.at("mean_count").get<double>(), row.at("pct").get<double>()});
      }
      t.range_inner = c.at("range_c1_c4").get<double>();
      s.circle_negativity_5 = t;
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::corrupt_input, fmt::format("dataset stats: {}", ex.what()));
  }
  return s;
}

namespace {

std::string num(double v) { return fmt::format("{:.4f}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string dataset_label(const DatasetStats& s) {
  return s.dataset_region.empty() || s.dataset_region == "--" ? s.dataset_type
                                                               : fmt::format("{}/{}", s.dataset_type, s.dataset_region);
}

Table make_table(std::span<const DatasetStats> stats, int table) {
  Table t;
  switch (table) {
    case 1:
      t.header = {"type", "region", "egos", "relationships", "interactions"};
      for (const auto& s : stats) {
        t.rows.push_back({s.dataset_type, s.dataset_region, std::to_string(s.n_egos), std::to_string(s.n_relationships),
                          std::to_string(s.n_interactions)});
      }
      break;
    case 2:
      t.header = {"type",         "region",      "mean_size",   "size_lo",          "size_hi",
                  "mean_circles", "circles_lo",  "circles_hi",  "five_circle_egos"};
      for (const auto& s : stats) {
        t.rows.push_back({s.dataset_type, s.dataset_region, num(s.network_size.mean), num(s.network_size.lower),
                          num(s.network_size.upper), num(s.n_circles.mean), num(s.n_circles.lower),
                          num(s.n_circles.upper), std::to_string(s.n_five_circle_egos)});
      }
      break;
    case 3:
      t.header = {"type", "region", "c1", "c2", "c3", "c4", "c5"};
      for (const auto& s : stats) {
        std::vector<std::string> row{s.dataset_type, s.dataset_region};
        for (std::size_t k = 0; k < 5; ++k) row.push_back(s.circle_sizes_5 ? num((*s.circle_sizes_5)[k]) : "");
        t.rows.push_back(std::move(row));
      }
      break;
    case 4:
      t.header = {"type", "region", "user_negativity_pct", "unsigned_relationships"};
      for (const auto& s : stats) {
        t.rows.push_back(
            {s.dataset_type, s.dataset_region, num(s.user_negativity_pct), std::to_string(s.unsigned_relationships)});
      }
      break;
    case 6:
      t.header = {"type", "region", "circle", "mean_count", "pct", "range_c1_c4"};
      for (const auto& s : stats) {
        if (!s.circle_negativity_5) continue;
        const auto& c = *s.circle_negativity_5;
        for (std::size_t k = 0; k < c.circles.size(); ++k) {
          t.rows.push_back({s.dataset_type, s.dataset_region, fmt::format("C{}", k + 1), num(c.circles[k].mean_count),
                            num(c.circles[k].pct), num(c.range_inner)});
        }
      }
      break;
    default: throw Error(ErrorCode::config, fmt::format("unknown stats table {}", table));
  }
  return t;
}

std::string render_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv::escape(cells[i]);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::string_view table_title(int table) {
  switch (table) {
    case 1: return "Dataset sizes";
    case 2: return "Active network size and optimum circle count (95% CI)";
    case 3: return "Mean cumulative circle sizes, egos with 5 circles";
    case 4: return "Mean user negativity";
    case 6: return "Negative relationships per circle, egos with 5 circles";
  }
  return "";
}

}  // namespace

std::string stats_table_csv(std::span<const DatasetStats> stats, int table) {
  return render_csv(make_table(stats, table));
}

std::string stats_long_csv(std::span<const DatasetStats> stats, const std::set<int>& tables) {
  std::string out = "table,dataset,row,column,value\n";
  for (int table : tables) {
    const Table t = make_table(stats, table);
    for (const auto& r : t.rows) {
      const std::string dataset = r[1].empty() || r[1] == "--" ? r[0] : r[0] + "/" + r[1];
      const std::size_t first_value = table == 6 ? 3 : 2;
      const std::string row = table == 6 ? r[2] : "all";
      for (std::size_t i = first_value; i < r.size(); ++i) {
        out += fmt::format("{},{},{},{},{}\n", table, csv::escape(dataset), row, t.header[i], r[i]);
      }
    }
  }
  return out;
}

std::string stats_markdown(std::span<const DatasetStats> stats, const std::set<int>& tables) {
  std::string out = "# Signed ego network statistics\n";
  for (int table : tables) {
    const Table t = make_table(stats, table);
    out += fmt::format("\n## Table {}: {}\n\n", table, table_title(table));
    out += "| " + fmt::format("{}", fmt::join(t.header, " | ")) + " |\n";
    out += "|";
    for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : t.rows) out += "| " + fmt::format("{}", fmt::join(r, " | ")) + " |\n";
    if (t.rows.empty()) out += "\n_No qualifying egos._\n";
  }
  return out;
}

std::string negativity_grid_csv(std::span<const DatasetStats> stats) {
  std::vector<std::string> types;
  std::vector<std::string> regions;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& s : stats) {
    if (!s.user_negativity_pct) continue;
    if (std::find(types.begin(), types.end(), s.dataset_type) == types.end()) types.push_back(s.dataset_type);
    if (std::find(regions.begin(), regions.end(), s.dataset_region) == regions.end()) regions.push_back(s.dataset_region);
    cell[{s.dataset_region, s.dataset_type}] = *s.user_negativity_pct;
  }
  auto range_of = [](const std::vector<LabeledValue>& v) {
    return v.size() < 2 ? std::string() : num(negativity_range(v));
  };
  std::string out = "region";
  for (const auto& t : types) out += "," + csv::escape(t);
  out += ",range\n";
  for (const auto& r : regions) {
    out += csv::escape(r);
    std::vector<LabeledValue> row;
    for (const auto& t : types) {
      auto it = cell.find({r, t});
      out += ",";
      if (it != cell.end()) {
        out += num(it->second);
        row.push_back({t, it->second});
      }
    }
    out += "," + range_of(row) + "\n";
  }
  out += "range_all";
  for (const auto& t : types) {
    std::vector<LabeledValue> col;
    for (const auto& r : regions) {
      if (auto it = cell.find({r, t}); it != cell.end()) col.push_back({r, it->second});
    }
    out += "," + range_of(col);
  }
  out += ",\n";
  return out;
}

std::string circle_negativity_svg(const DatasetStats& s) {
  if (!s.circle_negativity_5) return {};
  const auto& c = s.circle_negativity_5->circles;
  constexpr double kWidth = 480;
  constexpr double kHeight = 300;
  constexpr double kLeft = 50;
  constexpr double kBottom = 260;
  constexpr double kPlotHeight = 220;
  const double bar = (kWidth - kLeft - 20) / static_cast<double>(c.size());
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", kWidth, kHeight,
      kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">Negative share by circle: {}</text>\n",
                     kWidth / 2, dataset_label(s));
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft, kBottom, kWidth - 20);
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kBottom,
                     kBottom - kPlotHeight);
  for (int tick = 0; tick <= 100; tick += 25) {
    const double y = kBottom - kPlotHeight * tick / 100.0;
    out += fmt::format("<text x=\"{}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{}%</text>\n", kLeft - 5, y + 3,
                       tick);
  }
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double h = kPlotHeight * std::clamp(c[k].pct, 0.0, 100.0) / 100.0;
    const double x = kLeft + bar * static_cast<double>(k) + bar * 0.15;
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#b03a2e\"/>\n", x,
                       kBottom - h, bar * 0.7, h);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"middle\">{:.2f}</text>\n",
                       x + bar * 0.35, kBottom - h - 4, c[k].pct);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">C{}</text>\n", x + bar * 0.35,
                       kBottom + 15, k + 1);
  }
  out += "</svg>\n";
  return out;
}

namespace {

std::string topic_csv(std::span<const TopicNegativity> topics, bool user) {
  std::string out = user ? "rank,topic_id,keyword,category,users,user_negativity_pct\n"
                         : "rank,topic_id,keyword,category,records,tweet_negativity_pct\n";
  std::size_t rank = 0;
  for (const auto& t : topics) {
    out += fmt::format("{},{},{},{},{},{}\n", ++rank, t.topic_id, csv::escape(t.keyword), to_string(t.category),
                       user ? t.users : t.records, user ? num(t.user_negativity_pct) : num(t.tweet_negativity_pct));
  }
  return out;
}

}  // namespace

std::string topics_user_csv(std::span<const TopicNegativity> topics) { return topic_csv(topics, true); }
std::string topics_tweet_csv(std::span<const TopicNegativity> topics) { return topic_csv(topics, false); }

std::string categories_csv(std::span<const CategoryMean> means) {
  std::string out = "category,topics,user_mean,tweet_mean\n";
  for (const auto& m : means) {
    out += fmt::format("{},{},{},{}\n", to_string(m.category), m.topics, num(m.user_mean), num(m.tweet_mean));
  }
  return out;
}

}  // namespace senm
