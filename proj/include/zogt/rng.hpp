#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace zogt {

/// Counter-based RNG stream (Philox4x32-10). Each stream is identified by a
/// 64-bit id derived from (purpose, agent, iteration, ...) so that every
/// draw in a run is addressable: results do not depend on the order in which
/// agents or replications are processed, only on the master seed.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : key0_(static_cast<std::uint32_t>(master_seed)),
        key1_(static_cast<std::uint32_t>(master_seed >> 32)),
        id_(stream_id) {}

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    if (cached_) {
      cached_ = false;
      return cache_;
    }
    std::uint32_t c[4] = {static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(id_),
                          static_cast<std::uint32_t>(id_ >> 32)};
    ++block_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * c[0];
      const std::uint64_t p1 = 0xCD9E8D57ULL * c[2];
      const std::uint32_t out[4] = {
          static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
          static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
          static_cast<std::uint32_t>(p0)};
      c[0] = out[0];
      c[1] = out[1];
      c[2] = out[2];
      c[3] = out[3];
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    cache_ = (static_cast<std::uint64_t>(c[2]) << 32) | c[3];
    cached_ = true;
    return (static_cast<std::uint64_t>(c[0]) << 32) | c[1];
  }

  /// Uniform double in [0,1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_normal_ = r * std::sin(theta);
    have_normal_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd gaussian(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::uint32_t key0_, key1_;
  std::uint64_t id_;
  std::uint64_t block_ = 0;
  std::uint64_t cache_ = 0;
  bool cached_ = false;
  double spare_normal_ = 0.0;
  bool have_normal_ = false;
};

/// Stream-id namespace: one purpose tag per independent randomness source.
enum class StreamPurpose : std::uint64_t {
  init_state = 0,
  direction = 1,       // v_{i,k} sphere draws
  upper_noise = 2,     // xi_{i,k}
  lower_init = 3,      // random feasible z0
  lower_noise = 4,     // SA samples inside the lower solver
  eval_noise = 5,      // objective-estimation xi draws
  eval_lower = 6,      // objective-estimation lower solves
  graph = 7,
  problem_const = 8,
  generic = 9,
};

/// Packs (purpose, side, batch, agent, iter) into a stream id.
/// Field widths: purpose 6, side 2, batch 12, agent 16, iter 28 bits.
inline std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t agent = 0,
                               std::uint64_t iter = 0, std::uint64_t batch = 0,
                               std::uint64_t side = 0) {
  return (static_cast<std::uint64_t>(purpose) << 58) | (side << 56) |
         (batch << 44) | (agent << 28) | iter;
}

inline RngStream make_stream(std::uint64_t master_seed, StreamPurpose purpose,
                             std::uint64_t agent = 0, std::uint64_t iter = 0,
                             std::uint64_t batch = 0, std::uint64_t side = 0) {
  return RngStream(master_seed, stream_id(purpose, agent, iter, batch, side));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic sub-seed for independent runs (sample paths, topologies).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt_a,
                                 std::uint64_t salt_b = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(salt_a)) + salt_b);
}

}  // namespace zogt
