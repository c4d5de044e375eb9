#pragma once

// Dataset files: JSON Lines with id/article/summary fields. Also the
// predictions file ({"id","summary"}) and atomic file writes shared by the
// pipeline stages.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "factsum/error.hpp"
#include "factsum/textkit.hpp"

namespace factsum::data {

struct DocumentPair {
  std::string id;
  std::string article;
  std::string summary;  // may be empty at inference time
};

struct DatasetStats {
  std::size_t pair_count = 0;
  std::size_t article_token_total = 0;
  std::size_t summary_token_total = 0;
  // token-count histograms, bucket width 32
  std::map<std::size_t, std::size_t> article_len_hist;
  std::map<std::size_t, std::size_t> summary_len_hist;
};

struct Dataset {
  std::vector<DocumentPair> pairs;
  DatasetStats stats;
};

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::file_not_found, "cannot open dataset " + path.string());
  Dataset ds;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(Errc::malformed_line, path.string() + ":" + std::to_string(line_no) + ": bad JSON");
    if (!j.contains("id") || !j["id"].is_string())
      fail(Errc::malformed_line,
           path.string() + ":" + std::to_string(line_no) + ": missing \"id\"");
    if (!j.contains("article") || !j["article"].is_string() ||
        j["article"].get<std::string>().empty())
      fail(Errc::malformed_line,
           path.string() + ":" + std::to_string(line_no) + ": missing \"article\"");
    DocumentPair p;
    p.id = j["id"].get<std::string>();
    p.article = j["article"].get<std::string>();
    if (j.contains("summary") && j["summary"].is_string())
      p.summary = j["summary"].get<std::string>();
    if (!seen_ids.insert(p.id).second)
      fail(Errc::duplicate_id,
           path.string() + ":" + std::to_string(line_no) + ": duplicate id " + p.id);
    const auto alen = textkit::tokenize(p.article).size();
    const auto slen = textkit::tokenize(p.summary).size();
    ds.stats.article_token_total += alen;
    ds.stats.summary_token_total += slen;
    ++ds.stats.article_len_hist[(alen / 32) * 32];
    ++ds.stats.summary_len_hist[(slen / 32) * 32];
    ds.pairs.push_back(std::move(p));
  }
  ds.stats.pair_count = ds.pairs.size();
  return ds;
}

// Predictions: JSON Lines {"id": ..., "summary": ...}.
inline std::map<std::string, std::string> load_predictions(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::file_not_found, "cannot open predictions " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("summary"))
      fail(Errc::malformed_line,
           path.string() + ":" + std::to_string(line_no) + ": bad prediction line");
    const auto id = j["id"].get<std::string>();
    if (!out.emplace(id, j["summary"].get<std::string>()).second)
      fail(Errc::duplicate_id,
           path.string() + ":" + std::to_string(line_no) + ": duplicate id " + id);
  }
  return out;
}

// Write-temp-then-rename so interrupted runs never leave partial files.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(Errc::io_error, "cannot write " + tmp);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::file_not_found, "cannot open " + path.string());
  std::string out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return out;
}

}  // namespace factsum::data
