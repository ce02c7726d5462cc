#include "kfm/weights.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace kfm {

namespace {

static_assert(sizeof(float) == 4, "container assumes 32-bit floats");

void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ofstream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  }
  put_bytes(out, buf, sizeof(T));
}

template <typename T>
bool get_le(std::ifstream& in, T& v) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    acc |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  v = static_cast<T>(acc);
  return true;
}

}  // namespace

WeightMap merge(const WeightMap& pre, const WeightMap& ft, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (pre.size() != ft.size()) {
    throw SchemaMismatch("entry counts differ: " + std::to_string(pre.size()) +
                         " vs " + std::to_string(ft.size()));
  }
  WeightMap out;
  auto a = pre.begin();
  auto b = ft.begin();
  for (; a != pre.end(); ++a, ++b) {
    if (a->first != b->first) {
      throw SchemaMismatch("name mismatch: '" + a->first + "' vs '" + b->first + "'");
    }
    if (a->second.size() != b->second.size()) {
      throw SchemaMismatch("shape mismatch for '" + a->first + "'");
    }
    std::vector<float> merged(a->second.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
      float x = a->second[i];
      float y = b->second[i];
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw NonFiniteInput("non-finite value in '" + a->first + "'");
      }
      merged[i] = static_cast<float>((1.0 - alpha) * static_cast<double>(x) +
                                     alpha * static_cast<double>(y));
    }
    out.emplace(a->first, std::move(merged));
  }
  return out;
}

void save_weights(const WeightMap& w, const std::string& path) {
  if (w.empty()) throw CorruptFile("refusing to serialize an empty weight map");
  for (const auto& [name, values] : w) {
    if (name.empty()) throw CorruptFile("weight entry with empty name");
    if (name.size() > 0xffff) throw CorruptFile("weight name too long: " + name);
    (void)values;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open '" + path + "' for writing");
  put_bytes(out, "WMAP", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
  for (const auto& [name, values] : w) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    put_bytes(out, name.data(), name.size());
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(values.size()));
    for (float v : values) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      put_le<std::uint32_t>(out, bits);
    }
  }
  out.flush();
  if (!out) throw IoFailure("write to '" + path + "' failed");
}

WeightMap load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path + "' for reading");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "WMAP", 4) != 0) {
    throw CorruptFile("bad magic in '" + path + "'");
  }
  std::uint32_t count = 0;
  if (!get_le(in, count)) throw CorruptFile("truncated entry count");
  if (count == 0) throw CorruptFile("container with zero entries");
  WeightMap out;
  for (std::uint32_t e = 0; e < count; ++e) {
    std::uint16_t name_len = 0;
    if (!get_le(in, name_len)) throw CorruptFile("truncated name length");
    if (name_len == 0) throw CorruptFile("entry with empty name");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw CorruptFile("truncated name");
    std::uint64_t n = 0;
    if (!get_le(in, n)) throw CorruptFile("truncated element count");
    std::vector<float> values;
    values.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      if (!get_le(in, bits)) throw CorruptFile("truncated values in '" + name + "'");
      values.push_back(std::bit_cast<float>(bits));
    }
    if (!out.emplace(std::move(name), std::move(values)).second) {
      throw CorruptFile("duplicate entry name");
    }
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw CorruptFile("trailing bytes after last entry");
  }
  return out;
}

}  // namespace kfm
