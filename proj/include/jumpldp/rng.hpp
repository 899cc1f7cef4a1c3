#ifndef JUMPLDP_RNG_HPP
#define JUMPLDP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace jumpldp {

// splitmix64 finalizer; full-period bijective mixer.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Stream key for replicate r of an ensemble keyed by base_seed.
inline std::uint64_t derive_stream(std::uint64_t base_seed, std::uint64_t replicate) {
  return mix64(base_seed + 0x9e3779b97f4a7c15ULL * (replicate + 1));
}

// Counter-based generator: output = mix64(key + GAMMA * counter). Draws are a
// pure function of (key, counter), so streams are splittable and replayable.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key), counter_(0) {}
  CounterRng(std::uint64_t base_seed, std::uint64_t replicate)
      : CounterRng(derive_stream(base_seed, replicate)) {}

  std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  // Uniform on (0,1), never exactly 0 or 1.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_exponential(double rate) { return -std::log(next_unit()) / rate; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace jumpldp

#endif
