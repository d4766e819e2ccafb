#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dp/common.hpp"
#include "dp/tensor.hpp"

namespace dp {

// Flat named registry of learnable tensors, in registration order. The
// optimizer, checkpoint writer and phase-1 parameter filter all walk this.
class ParamRegistry {
 public:
  Tensor add(const std::string& name, Tensor t) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
    t.set_requires_grad(true);
    index_[name] = items_.size();
    items_.emplace_back(name, t);
    return t;
  }

  Tensor create(const std::string& name, int rows, int cols) {
    return add(name, Tensor(rows, cols));
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Tensor find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return items_[it->second].second;
  }

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }

  std::vector<std::pair<std::string, Tensor>> items_with_prefix(
      const std::vector<std::string>& prefixes) const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (const auto& [name, t] : items_)
      for (const auto& p : prefixes)
        if (name.rfind(p, 0) == 0) {
          out.emplace_back(name, t);
          break;
        }
    return out;
  }

  void zero_grad() {
    for (auto& [name, t] : items_) t.zero_grad();
  }

  size_t scalar_count() const {
    size_t n = 0;
    for (const auto& [name, t] : items_) n += t.size();
    return n;
  }

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::unordered_map<std::string, size_t> index_;
};

// ---------------------------------------------------------------------------
// Parameter record file: 4-byte magic "DPK\1", one version byte, then an
// EOF-terminated flat list of (name, rows, cols, f64 little-endian payload)
// records.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline bool get_u32(std::istream& is, uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
      (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  return true;
}

inline void put_f64(std::ostream& os, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline bool get_f64(std::istream& is, double& d) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  std::memcpy(&d, &v, 8);
  return true;
}

}  // namespace detail

inline constexpr char kParamMagic[4] = {'D', 'P', 'K', '\x01'};
inline constexpr unsigned char kParamVersion = 1;

inline void write_param_records(std::ostream& os,
                                const std::vector<std::pair<std::string, Tensor>>& records) {
  os.write(kParamMagic, 4);
  os.put(static_cast<char>(kParamVersion));
  for (const auto& [name, t] : records) {
    detail::put_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put_u32(os, static_cast<uint32_t>(t.rows()));
    detail::put_u32(os, static_cast<uint32_t>(t.cols()));
    for (size_t i = 0; i < t.size(); ++i) detail::put_f64(os, t.data()[i]);
  }
}

inline std::vector<std::pair<std::string, Tensor>> read_param_records(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kParamMagic, 4) != 0)
    throw DataError("parameter file: bad magic");
  const int version = is.get();
  if (version != kParamVersion) throw DataError("parameter file: unsupported version");
  std::vector<std::pair<std::string, Tensor>> out;
  uint32_t name_len;
  while (detail::get_u32(is, name_len)) {
    if (name_len > 4096) throw DataError("parameter file: implausible name length");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw DataError("parameter file: truncated name");
    uint32_t rows, cols;
    if (!detail::get_u32(is, rows) || !detail::get_u32(is, cols))
      throw DataError("parameter file: truncated header for " + name);
    if (rows == 0 || cols == 0 || static_cast<uint64_t>(rows) * cols > (1u << 28))
      throw DataError("parameter file: implausible shape for " + name);
    Tensor t(static_cast<int>(rows), static_cast<int>(cols));
    for (size_t i = 0; i < t.size(); ++i)
      if (!detail::get_f64(is, t.data()[i]))
        throw DataError("parameter file: truncated payload for " + name);
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

inline void save_params(const std::string& path,
                        const std::vector<std::pair<std::string, Tensor>>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  write_param_records(os, records);
  if (!os) throw DataError("write failed: " + path);
}

inline std::vector<std::pair<std::string, Tensor>> load_params(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  return read_param_records(is);
}

}  // namespace dp
