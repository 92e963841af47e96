#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "senm/ingest.hpp"

namespace senm::test {

inline Timestamp at(int y, unsigned m, unsigned d, int hh = 12, int mm = 0, int ss = 0) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / day{d}} + hours{hh} + minutes{mm} + seconds{ss};
}

inline RawRecord record(std::string id, std::string author, Timestamp t, RecordKind kind,
                        std::vector<std::string> targets = {}, std::optional<Sentiment> s = std::nullopt,
                        std::string text = "hello") {
  RawRecord r;
  r.id = std::move(id);
  r.author_id = std::move(author);
  r.created_at = t;
  r.kind = kind;
  r.target_ids = std::move(targets);
  r.sentiment = s;
  r.text = std::move(text);
  return r;
}

inline Dataset build(const std::vector<RawRecord>& records) {
  DatasetBuilder b;
  for (const auto& r : records) b.add(r);
  return std::move(b).finish();
}

inline std::string jsonl(const std::vector<RawRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_jsonl(r) + "\n";
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("senm_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

/// Runs a shell command, capturing stdout and stderr together.
inline CommandResult run_command(const std::string& command) {
  const auto log = std::filesystem::temp_directory_path() /
                   ("senm_cmd_" + std::to_string(std::random_device{}()) + ".log");
  const int status = std::system((command + " > " + log.string() + " 2>&1").c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_file(log);
  std::filesystem::remove(log);
  return r;
}

/// Lines of a file, without the leading manifest line and blank lines.
inline std::vector<std::string> data_lines(const std::filesystem::path& p) {
  std::istringstream in(read_file(p));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with("# manifest:") || line.starts_with("{\"manifest\":")) continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace senm::test
