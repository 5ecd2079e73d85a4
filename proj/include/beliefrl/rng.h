// Copyright 2026 The beliefrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BELIEFRL_RNG_H_
#define BELIEFRL_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace beliefrl {

// 64-bit avalanche (splitmix64 finalizer).
constexpr uint64_t Avalanche(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a master seed with task coordinates. Used for every derived stream so
// that parallel cells and sweep instances never share randomness.
constexpr uint64_t DeriveSeed(uint64_t master, uint64_t a, uint64_t b = 0) {
  return Avalanche(Avalanche(Avalanche(master) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

// Random stream with platform-independent sampling. The standard
// distributions are implementation-defined, so we only rely on the engine.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on [0, n). n must be positive.
  size_t UniformInt(size_t n) {
    // Lemire's multiply-shift with rejection; unbiased.
    uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < n) {
      const uint64_t threshold = -static_cast<uint64_t>(n) % n;
      while (low < threshold) {
        x = engine_();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<size_t>(m >> 64);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Samples an index from unnormalized non-negative weights.
  size_t Categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = Uniform() * total;
    double acc = 0.0;
    size_t last_positive = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;
  }

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = UniformInt(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace beliefrl

#endif  // BELIEFRL_RNG_H_
