#pragma once

// Little-endian primitives for the weight-file container format.

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "frp/error.hpp"

namespace frp::wire {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double v) {
  put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void put_f64_vec(std::ostream& os, const std::vector<double>& v) {
  put_u64(os, v.size());
  for (double x : v) put_f64(os, x);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError(std::string("weight file truncated reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& is, const char* what) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) {
    throw DataError(std::string("weight file truncated reading ") + what);
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is, const char* what) {
  return std::bit_cast<double>(get_u64(is, what));
}

inline std::vector<double> get_f64_vec(std::istream& is, const char* what,
                                       std::uint64_t max_len = (1ULL << 28)) {
  const std::uint64_t n = get_u64(is, what);
  if (n > max_len) throw DataError(std::string("implausible tensor length for ") + what);
  std::vector<double> v(n);
  for (auto& x : v) x = get_f64(is, what);
  return v;
}

inline void expect_magic(std::istream& is, const char* magic) {
  char got[4];
  if (!is.read(got, 4)) throw DataError("weight file truncated reading magic");
  if (std::string(got, 4) != magic) {
    throw DataError(std::string("bad magic, expected ") + magic);
  }
}

}  // namespace frp::wire

#include "frp/nn.hpp"

namespace frp::wire {

inline void put_layer(std::ostream& os, const nn::LayerParam& layer) {
  put_u32(os, static_cast<std::uint32_t>(layer.spec.kind));
  put_u32(os, static_cast<std::uint32_t>(layer.spec.filter_size));
  put_u32(os, static_cast<std::uint32_t>(layer.spec.stride));
  put_u32(os, static_cast<std::uint32_t>(layer.spec.in_channels));
  put_u32(os, static_cast<std::uint32_t>(layer.spec.out_channels));
  put_f64_vec(os, layer.w);
  put_f64_vec(os, layer.b);
}

inline nn::LayerParam get_layer(std::istream& is) {
  nn::LayerParam layer;
  const std::uint32_t kind = get_u32(is, "layer kind");
  if (kind > 2) throw DataError("weight file: unknown layer kind");
  layer.spec.kind = static_cast<nn::LayerKind>(kind);
  layer.spec.filter_size = static_cast<int>(get_u32(is, "filter size"));
  layer.spec.stride = static_cast<int>(get_u32(is, "stride"));
  layer.spec.in_channels = static_cast<int>(get_u32(is, "in channels"));
  layer.spec.out_channels = static_cast<int>(get_u32(is, "out channels"));
  layer.w = get_f64_vec(is, "weights");
  layer.b = get_f64_vec(is, "biases");
  return layer;
}

}  // namespace frp::wire
