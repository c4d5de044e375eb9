#pragma once

// Model/run configuration. Defaults are the desk-scale setup; the full-scale
// hyperparameter sets are available as named presets. Files are plain
// "key = value" lines with # comments; precedence is flags > file > preset >
// defaults.

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "factsum/error.hpp"

namespace factsum {

struct FasumConfig {
  // transformer
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t model_dim = 128;
  std::size_t ff_dim = 256;
  std::size_t vocab_size = 2000;
  // graph encoder
  std::size_t gat_layers = 2;
  std::size_t gat_heads = 8;
  std::size_t gat_hidden = 50;
  std::size_t bilstm_hidden = 64;
  double dropout_gat = 0.6;
  double dropout = 0.1;
  // optimizer
  double lr = 2e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 0.0;    // global-norm clip, 0 disables
  double warmup_frac = 0.0;  // linear warmup fraction of total steps
  // training
  std::size_t batch_size = 8;
  std::size_t epochs = 30;
  std::size_t val_every = 5;
  double stop_train_acc = 0.0;   // early stop at this teacher-forced accuracy, 0 = off
  double stop_train_loss = 0.0;  // early stop at or below this mean loss, 0 = off
  std::uint64_t seed = 17;
  // lengths and decoding
  std::size_t max_article_len = 400;
  std::size_t max_summary_len = 64;
  std::size_t min_summary_len = 1;
  std::size_t beam_width = 4;
  bool trigram_block = true;
  bool lowercase = false;
  bool use_kg = true;

  void validate() const {
    if (heads == 0 || model_dim == 0 || model_dim % heads != 0)
      fail(Errc::config_invalid, "model_dim must be a positive multiple of heads");
    if (min_summary_len >= max_summary_len)
      fail(Errc::config_invalid, "min_summary_len must be below max_summary_len");
    if (layers == 0 || ff_dim == 0 || vocab_size <= 5 || batch_size == 0 || beam_width == 0 ||
        gat_layers == 0 || gat_heads == 0 || gat_hidden == 0 || bilstm_hidden == 0 ||
        max_article_len == 0)
      fail(Errc::config_invalid, "all counts must be positive");
    if (dropout < 0 || dropout >= 1 || dropout_gat < 0 || dropout_gat >= 1)
      fail(Errc::config_invalid, "dropout rates must lie in [0, 1)");
  }
};

namespace config_detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(Errc::config_invalid, "bad boolean for " + key + ": " + v);
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const auto r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    fail(Errc::config_invalid, "bad integer for " + key + ": " + v);
  }
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const auto r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    fail(Errc::config_invalid, "bad number for " + key + ": " + v);
  }
}

}  // namespace config_detail

// Applies one key. Unknown keys are rejected so typos fail fast.
inline void apply_config_key(FasumConfig& c, const std::string& key, const std::string& value) {
  using namespace config_detail;
  if (key == "layers") c.layers = parse_u64(value, key);
  else if (key == "heads") c.heads = parse_u64(value, key);
  else if (key == "model_dim") c.model_dim = parse_u64(value, key);
  else if (key == "ff_dim") c.ff_dim = parse_u64(value, key);
  else if (key == "vocab_size") c.vocab_size = parse_u64(value, key);
  else if (key == "gat_layers") c.gat_layers = parse_u64(value, key);
  else if (key == "gat_heads") c.gat_heads = parse_u64(value, key);
  else if (key == "gat_hidden") c.gat_hidden = parse_u64(value, key);
  else if (key == "bilstm_hidden") c.bilstm_hidden = parse_u64(value, key);
  else if (key == "dropout_gat") c.dropout_gat = parse_double(value, key);
  else if (key == "dropout") c.dropout = parse_double(value, key);
  else if (key == "lr") c.lr = parse_double(value, key);
  else if (key == "adam_beta1") c.adam_beta1 = parse_double(value, key);
  else if (key == "adam_beta2") c.adam_beta2 = parse_double(value, key);
  else if (key == "adam_eps") c.adam_eps = parse_double(value, key);
  else if (key == "grad_clip") c.grad_clip = parse_double(value, key);
  else if (key == "warmup_frac") c.warmup_frac = parse_double(value, key);
  else if (key == "batch_size") c.batch_size = parse_u64(value, key);
  else if (key == "epochs") c.epochs = parse_u64(value, key);
  else if (key == "val_every") c.val_every = parse_u64(value, key);
  else if (key == "stop_train_acc") c.stop_train_acc = parse_double(value, key);
  else if (key == "stop_train_loss") c.stop_train_loss = parse_double(value, key);
  else if (key == "seed") c.seed = parse_u64(value, key);
  else if (key == "max_article_len") c.max_article_len = parse_u64(value, key);
  else if (key == "max_summary_len") c.max_summary_len = parse_u64(value, key);
  else if (key == "min_summary_len") c.min_summary_len = parse_u64(value, key);
  else if (key == "beam_width") c.beam_width = parse_u64(value, key);
  else if (key == "trigram_block") c.trigram_block = parse_bool(value, key);
  else if (key == "lowercase") c.lowercase = parse_bool(value, key);
  else if (key == "use_kg") c.use_kg = parse_bool(value, key);
  else fail(Errc::config_invalid, "unknown config key: " + key);
}

// Canonical key=value text, also used as the checkpoint config echo.
inline std::string serialize_config(const FasumConfig& c) {
  using namespace config_detail;
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  kv("layers", std::to_string(c.layers));
  kv("heads", std::to_string(c.heads));
  kv("model_dim", std::to_string(c.model_dim));
  kv("ff_dim", std::to_string(c.ff_dim));
  kv("vocab_size", std::to_string(c.vocab_size));
  kv("gat_layers", std::to_string(c.gat_layers));
  kv("gat_heads", std::to_string(c.gat_heads));
  kv("gat_hidden", std::to_string(c.gat_hidden));
  kv("bilstm_hidden", std::to_string(c.bilstm_hidden));
  kv("dropout_gat", fmt_double(c.dropout_gat));
  kv("dropout", fmt_double(c.dropout));
  kv("lr", fmt_double(c.lr));
  kv("adam_beta1", fmt_double(c.adam_beta1));
  kv("adam_beta2", fmt_double(c.adam_beta2));
  kv("adam_eps", fmt_double(c.adam_eps));
  kv("grad_clip", fmt_double(c.grad_clip));
  kv("warmup_frac", fmt_double(c.warmup_frac));
  kv("batch_size", std::to_string(c.batch_size));
  kv("epochs", std::to_string(c.epochs));
  kv("val_every", std::to_string(c.val_every));
  kv("stop_train_acc", fmt_double(c.stop_train_acc));
  kv("stop_train_loss", fmt_double(c.stop_train_loss));
  kv("seed", std::to_string(c.seed));
  kv("max_article_len", std::to_string(c.max_article_len));
  kv("max_summary_len", std::to_string(c.max_summary_len));
  kv("min_summary_len", std::to_string(c.min_summary_len));
  kv("beam_width", std::to_string(c.beam_width));
  kv("trigram_block", c.trigram_block ? "true" : "false");
  kv("lowercase", c.lowercase ? "true" : "false");
  kv("use_kg", c.use_kg ? "true" : "false");
  return out;
}

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::config_invalid, "config line " + std::to_string(line_no) + ": missing '='");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

inline void apply_config_map(FasumConfig& c, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) apply_config_key(c, k, v);
}

inline FasumConfig parse_config_echo(const std::string& echo) {
  FasumConfig c;
  apply_config_map(c, parse_config_text(echo));
  return c;
}

// Named presets. "desk" is the default configuration; the paper-cnndm and
// paper-xsum presets carry the full-scale reference hyperparameters.
inline const std::map<std::string, std::map<std::string, std::string>>& config_presets() {
  static const std::map<std::string, std::map<std::string, std::string>> presets = {
      {"desk", {{"lr", "0.001"}, {"batch_size", "4"}}},
      {"paper-cnndm",
       {{"layers", "10"},
        {"heads", "10"},
        {"model_dim", "720"},
        {"ff_dim", "2880"},
        {"vocab_size", "32000"},
        {"batch_size", "48"},
        {"beam_width", "4"},
        {"min_summary_len", "56"},
        {"max_summary_len", "142"},
        {"lr", "0.0002"}}},
      {"paper-xsum",
       {{"layers", "10"},
        {"heads", "10"},
        {"model_dim", "720"},
        {"ff_dim", "2880"},
        {"vocab_size", "32000"},
        {"batch_size", "48"},
        {"beam_width", "6"},
        {"min_summary_len", "11"},
        {"max_summary_len", "62"},
        {"lr", "0.0002"}}},
  };
  return presets;
}

inline void apply_preset(FasumConfig& c, const std::string& name) {
  const auto it = config_presets().find(name);
  if (it == config_presets().end()) fail(Errc::config_invalid, "unknown preset: " + name);
  apply_config_map(c, it->second);
}

}  // namespace factsum
