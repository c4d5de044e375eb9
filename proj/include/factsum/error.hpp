#pragma once

#include <stdexcept>
#include <string>

namespace factsum {

enum class Errc {
  empty_corpus,
  id_out_of_range,
  shape_mismatch,
  empty_sequence,
  probability_not_normalized,
  missing_gradient,
  empty_article,
  empty_summary,
  empty_dataset,
  single_class_dataset,
  file_not_found,
  malformed_line,
  duplicate_id,
  unknown_subcommand,
  config_invalid,
  checkpoint_mismatch,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace factsum
