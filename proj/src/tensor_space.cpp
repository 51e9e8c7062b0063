#include "pairsim/tensor_space.hpp"

#include <limits>

namespace pairsim {

TensorSpace::TensorSpace(std::vector<int> d) : dims(std::move(d)) {
  if (dims.empty()) throw ValidationError("TensorSpace: no factors");
  for (int x : dims)
    if (x < 1) throw ValidationError("TensorSpace: factor dimension must be >= 1");
}

std::size_t TensorSpace::dimension() const {
  std::size_t prod = 1;
  constexpr std::size_t cap = std::numeric_limits<std::size_t>::max();
  for (int x : dims) {
    const auto d = static_cast<std::size_t>(x);
    if (prod > cap / d) throw ValidationError("TensorSpace: dimension overflows size_t");
    prod *= d;
  }
  return prod;
}

std::size_t TensorSpace::stride(int factor) const {
  std::size_t s = 1;
  for (int k = factor + 1; k < num_factors(); ++k) s *= static_cast<std::size_t>(dims[k]);
  return s;
}

void TensorSpace::digits_of(std::size_t index, std::vector<int>& out) const {
  out.resize(dims.size());
  for (int k = num_factors() - 1; k >= 0; --k) {
    const auto d = static_cast<std::size_t>(dims[k]);
    out[k] = static_cast<int>(index % d);
    index /= d;
  }
}

std::vector<int> TensorSpace::digits_of(std::size_t index) const {
  std::vector<int> out;
  digits_of(index, out);
  return out;
}

std::size_t TensorSpace::index_of(const std::vector<int>& digits) const {
  if (digits.size() != dims.size())
    throw ValidationError("TensorSpace: digit count does not match factor count");
  std::size_t idx = 0;
  for (int k = 0; k < num_factors(); ++k) {
    if (digits[k] < 0 || digits[k] >= dims[k])
      throw ValidationError("TensorSpace: digit out of range");
    idx = idx * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(digits[k]);
  }
  return idx;
}

}  // namespace pairsim
