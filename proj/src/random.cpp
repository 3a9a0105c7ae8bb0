#include "mpiso/random.hpp"

namespace mpiso {

UnitScalar CounterRng::unit_scalar(std::uint64_t index, unsigned bits) const {
  const unsigned words = (bits + 63) / 64;
  Natural m{0};
  for (unsigned w = 0; w < words; ++w) {
    m <<= 64;
    m |= at(index * words + w);
  }
  m >>= words * 64 - bits;
  return UnitScalar::make(std::move(m), bits);
}

}  // namespace mpiso
