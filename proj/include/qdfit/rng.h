// Copyright 2026 The qdfit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QDFIT_RNG_H_
#define QDFIT_RNG_H_

#include <array>
#include <cstdint>
#include <limits>

namespace qdfit {

/// Portable seeded generator (xoshiro256**, seeded through SplitMix64).
///
/// Every derived quantity (uniforms, normals, integers) is computed here
/// rather than through <random> distributions, whose output differs across
/// standard library implementations. `split` derives an independent child
/// stream from the seed material without advancing the parent, so a single
/// top-level seed determines every artifact regardless of call order.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng split(std::uint64_t stream) const { return Rng(key_, stream + 1); }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Box-Muller; consumes two uniforms per call.
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace qdfit

#endif  // QDFIT_RNG_H_
