#pragma once
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fedkgc {

// Dense row-major float64 matrix. Every parameter in this project is 2-D:
// the token embedding table [V, d] and relation prefixes [L_r, d].
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  std::span<double> row(int r) {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

// Named parameter collection; the unit of federation exchange. std::map
// keeps names unique and iteration lexicographic, which every checksum,
// checkpoint, and aggregation pass relies on.
using ModelWeights = std::map<std::string, Tensor, std::less<>>;

bool all_finite(const Tensor& t);
bool all_finite(const ModelWeights& w);
bool bit_equal(const ModelWeights& a, const ModelWeights& b);

// FNV-1a over names, shapes, and raw little-endian payload, in map order.
std::uint64_t weights_checksum(const ModelWeights& w);
std::string checksum_hex(std::uint64_t c);

}  // namespace fedkgc
