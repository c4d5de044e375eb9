#pragma once

// Named parameter store with seeded initialization, plus the FASUM1
// checkpoint format: magic, a config echo string, then parameters in
// sorted-name order as (name, shape, raw 32-bit values).

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "factsum/neuro/tape.hpp"

namespace factsum::neuro {

template <typename T>
class ParameterStore {
 public:
  std::uint64_t rng_seed = 0;

  bool has(const std::string& name) const { return params_.count(name) > 0; }

  Tensor<T>& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) fail(Errc::config_invalid, "no parameter named " + name);
    return it->second;
  }
  const Tensor<T>& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) fail(Errc::config_invalid, "no parameter named " + name);
    return it->second;
  }

  // Xavier-uniform init for matrices, zeros elsewhere. Re-declaring an
  // existing name must agree on shape (idempotent model construction).
  Tensor<T>& add_xavier(const std::string& name, std::size_t r, std::size_t c, Rng& rng) {
    if (auto it = params_.find(name); it != params_.end()) return checked(it->second, r, c, name);
    const double limit = std::sqrt(6.0 / static_cast<double>(r + c));
    Tensor<T> t(r, c);
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
    return params_.emplace(name, std::move(t)).first->second;
  }

  Tensor<T>& add_zeros(const std::string& name, std::size_t r, std::size_t c) {
    if (auto it = params_.find(name); it != params_.end()) return checked(it->second, r, c, name);
    return params_.emplace(name, Tensor<T>::zeros(r, c)).first->second;
  }

  Tensor<T>& add_ones(const std::string& name, std::size_t r, std::size_t c) {
    if (auto it = params_.find(name); it != params_.end()) return checked(it->second, r, c, name);
    return params_.emplace(name, Tensor<T>::full(r, c, T(1))).first->second;
  }

  // Sorted-name iteration comes from std::map.
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }

  void zero_grads() {
    for (auto& [name, t] : params_) {
      t.ensure_grad();
      t.zero_grad();
    }
  }

  std::size_t value_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params_) n += t.size();
    return n;
  }

 private:
  static Tensor<T>& checked(Tensor<T>& t, std::size_t r, std::size_t c,
                            const std::string& name) {
    if (t.rows() != r || t.cols() != c)
      fail(Errc::shape_mismatch, "parameter " + name + " re-declared with new shape");
    return t;
  }

  std::map<std::string, Tensor<T>> params_;
};

// Binds a parameter to a fresh tape leaf; after backward, harvest_grads
// pushes the accumulated leaf gradients back into the store.
template <typename T>
Value<T> param(Tape<T>& tape, ParameterStore<T>& store, const std::string& name) {
  Value<T> v = tape.leaf(store.at(name));
  tape.node(v.idx).param_name = name;
  return v;
}

template <typename T>
void harvest_grads(Tape<T>& tape, ParameterStore<T>& store, T scale = T(1)) {
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const auto& n = tape.node(static_cast<int>(i));
    if (n.param_name.empty() || !n.val.has_grad()) continue;
    Tensor<T>& p = store.at(n.param_name);
    p.ensure_grad();
    for (std::size_t k = 0; k < p.grad.size(); ++k) p.grad[k] += scale * n.val.grad[k];
  }
}

// ---------------------------------------------------------------------------
// Checkpoint format
// ---------------------------------------------------------------------------

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  write_u32(os, static_cast<std::uint32_t>(v));
  write_u32(os, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) fail(Errc::checkpoint_mismatch, "checkpoint: truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64(std::istream& is) {
  const std::uint64_t lo = read_u32(is);
  const std::uint64_t hi = read_u32(is);
  return lo | (hi << 32);
}

inline void write_f32(std::ostream& os, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(os, bits);
}

inline float read_f32(std::istream& is) {
  const std::uint32_t bits = read_u32(is);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace detail

inline constexpr const char* checkpoint_magic = "FASUM1";

template <typename T>
void save_checkpoint_stream(std::ostream& os, const ParameterStore<T>& store,
                            const std::string& config_echo) {
  os.write(checkpoint_magic, 6);
  detail::write_u32(os, static_cast<std::uint32_t>(config_echo.size()));
  os.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));
  detail::write_u64(os, store.size());
  for (const auto& [name, t] : store) {
    detail::write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) detail::write_u64(os, d);
    for (const auto& v : t.data) detail::write_f32(os, static_cast<float>(v));
  }
}

// Loads parameters into the store. An empty store is populated; a non-empty
// store must agree on every name and shape, or loading fails loudly.
// Returns the config echo string.
template <typename T>
std::string load_checkpoint_stream(std::istream& is, ParameterStore<T>& store) {
  char magic[6];
  is.read(magic, 6);
  if (!is || std::memcmp(magic, checkpoint_magic, 6) != 0)
    fail(Errc::checkpoint_mismatch, "checkpoint: bad magic");
  const auto echo_len = detail::read_u32(is);
  std::string echo(echo_len, '\0');
  is.read(echo.data(), echo_len);
  const auto count = detail::read_u64(is);
  const bool verify = !store.empty();
  if (verify && store.size() != count)
    fail(Errc::checkpoint_mismatch, "checkpoint: parameter count mismatch");
  for (std::uint64_t p = 0; p < count; ++p) {
    const auto name_len = detail::read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = detail::read_u32(is);
    std::vector<std::size_t> shape(ndim);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = detail::read_u64(is);
      total *= d;
    }
    Tensor<T> t;
    t.shape = shape;
    t.data.resize(total);
    for (auto& v : t.data) v = static_cast<T>(detail::read_f32(is));
    if (verify) {
      if (!store.has(name))
        fail(Errc::checkpoint_mismatch, "checkpoint: unexpected parameter " + name);
      Tensor<T>& dst = store.at(name);
      if (dst.shape != shape)
        fail(Errc::checkpoint_mismatch, "checkpoint: shape mismatch for " + name);
      dst.data = std::move(t.data);
    } else {
      store.add_zeros(name, t.rows(), t.cols()).data = std::move(t.data);
    }
  }
  return echo;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ParameterStore<T>& store,
                     const std::string& config_echo) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(Errc::io_error, "cannot write " + tmp);
    save_checkpoint_stream(os, store, config_echo);
  }
  std::filesystem::rename(tmp, path);
}

template <typename T>
std::string load_checkpoint(const std::filesystem::path& path, ParameterStore<T>& store) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::file_not_found, "cannot open " + path.string());
  return load_checkpoint_stream(is, store);
}

}  // namespace factsum::neuro
