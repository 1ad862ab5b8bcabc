#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace acd {

// Raised for bad user input (files, configs, arguments). The CLI maps it to
// exit code 2; everything else is a runtime failure (exit 1).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// 64-bit FNV-1a. Fixed here so hashed feature vectors are reproducible
// across builds and platforms.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Derives the seed of a named substream from a base seed. Streams are
// identified by a label plus up to two indices, e.g. ("train", fold).
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t i = 0, std::uint64_t j = 0);

// Deterministic random source. mt19937_64 is fully specified by the
// standard; the sampling helpers below avoid std::*_distribution, whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // uniform integer in [lo, hi]
  int range(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo) + 1));
  }

  // index drawn from unnormalised non-negative weights
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Runs fn(0..n-1) on up to `jobs` worker threads. Tasks must be independent;
// any exception is rethrown on the calling thread.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace acd
