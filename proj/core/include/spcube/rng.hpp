#ifndef SPCUBE_RNG_HPP
#define SPCUBE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace spcube::rng {

/* Named substreams hashed into the stream id so that unrelated draws
 * (locations vs. noise vs. dropout masks, ...) never share an engine.
 */
enum class Stream : std::uint64_t {
  locations = 1,
  covariates = 2,
  field = 3,
  noise = 4,
  split = 5,
  gibbs = 6,
  net_init = 7,
  shuffle = 8,
  dropout_mask = 9,
  mc_pass = 10,
  predictive = 11,
  crps_noise = 12,
};

// Steele et al. splitmix64 step; good avalanche, cheap, stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/* Derive a child seed from a root seed and a list of integer tokens
 * (setting index, replicate, stream tag, ...).  Token order matters.
 */
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> tokens) {
  std::uint64_t s = root;
  std::uint64_t h = splitmix64(s);
  for (std::uint64_t t : tokens) {
    s ^= splitmix64(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h = splitmix64(s);
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                 std::initializer_list<std::uint64_t> tokens = {}) {
  std::uint64_t s = derive_seed(root, {static_cast<std::uint64_t>(stream)});
  return tokens.size() == 0 ? s : derive_seed(s, tokens);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace spcube::rng

#endif  // SPCUBE_RNG_HPP
