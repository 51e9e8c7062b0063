#pragma once

#include <cstdint>
#include <vector>

#include "pairsim/types.hpp"

namespace pairsim {

// Product of finite local spaces. Factor 0 is the slowest-varying index:
// global index = sum_k digit_k * stride_k with stride_k = prod_{m>k} dims[m].
struct TensorSpace {
  std::vector<int> dims;

  TensorSpace() = default;
  explicit TensorSpace(std::vector<int> d);

  int num_factors() const { return static_cast<int>(dims.size()); }
  std::size_t dimension() const;
  std::size_t stride(int factor) const;

  void digits_of(std::size_t index, std::vector<int>& out) const;
  std::vector<int> digits_of(std::size_t index) const;
  std::size_t index_of(const std::vector<int>& digits) const;

  bool operator==(const TensorSpace& other) const { return dims == other.dims; }
};

}  // namespace pairsim
