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

#ifndef QDFIT_NUMERIC_H_
#define QDFIT_NUMERIC_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qdfit {

using TokenId = std::int32_t;
using Sentence = std::vector<TokenId>;

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// 17 significant digits; parsing the result reproduces the binary value.
std::string format_double(double value);

/// Parses a full decimal string; throws kInvalidArgument on trailing junk.
double parse_double(std::string_view text);

/// Integrates fn over [a, b] by adaptive Gauss-Kronrod (7/15). Integrable
/// endpoint singularities such as log(x) at 0 are handled because nodes never
/// touch the interval ends. Throws kUnsupported when the estimate is not
/// finite or the tolerance cannot be reached.
double integrate(const std::function<double(double)>& fn, double a, double b,
                 double tolerance = 1e-10);

/// FNV-1a over raw bytes; used for input-content fingerprints in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qdfit

#endif  // QDFIT_NUMERIC_H_
