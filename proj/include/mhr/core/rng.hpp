// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace mhr {

// Seeded RNG used everywhere randomness is required. A single engine type
// keeps seeded runs reproducible across the generator, the trainer and the
// samplers (same binary, same seed, same draw sequence).
class Rng {
 public:
  Rng() : engine_(0x6d687231756c6c75ULL) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }
  std::uint64_t raw() { return engine_(); }

  // Derives an independent stream; used to decouple e.g. weight init from
  // batch sampling so config edits do not shift unrelated draws.
  Rng fork(std::uint64_t stream) const {
    std::seed_seq seq{static_cast<std::uint64_t>(engine_state_hash()), stream};
    std::mt19937_64 e(seq);
    Rng r;
    r.engine_ = e;
    return r;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }
  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t engine_state_hash() const {
    std::mt19937_64 copy = engine_;
    return copy();
  }
  std::mt19937_64 engine_;
};

}  // namespace mhr
