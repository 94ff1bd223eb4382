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

#include "qdfit/numeric.h"

#include <array>
#include <charconv>
#include <cstdio>
#include <limits>
#include <queue>

#include "qdfit/error.h"

namespace qdfit {

double compensated_sum(std::span<const double> values) {
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  return sum.value();
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 40> buffer{};
  const int n = std::snprintf(buffer.data(), buffer.size(), "%.17g", value);
  return std::string(buffer.data(), static_cast<std::size_t>(n));
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    fail(ErrorCode::kInvalidArgument,
         "not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

// Kronrod 15-point abscissae (positive half) and weights; the Gauss 7-point
// rule uses the odd-indexed abscissae.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double estimate;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& fn, double a,
                      double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = fn(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = fn(center - dx) + fn(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

double integrate(const std::function<double(double)>& fn, double a, double b,
                 double tolerance) {
  if (a == b) return 0.0;
  constexpr int kMaxSegments = 4000;
  std::priority_queue<Segment> segments;
  double total = 0.0;
  double total_error = 0.0;
  auto push = [&](const Segment& s) {
    if (!std::isfinite(s.estimate) || !std::isfinite(s.error)) {
      fail(ErrorCode::kUnsupported, "integrand is not integrable on the range");
    }
    segments.push(s);
    total += s.estimate;
    total_error += s.error;
  };
  push(gauss_kronrod(fn, a, b));
  int count = 1;
  while (total_error > tolerance) {
    if (count >= kMaxSegments) {
      fail(ErrorCode::kUnsupported,
           "adaptive quadrature did not reach the requested tolerance");
    }
    const Segment worst = segments.top();
    segments.pop();
    total -= worst.estimate;
    total_error -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    push(gauss_kronrod(fn, worst.a, mid));
    push(gauss_kronrod(fn, mid, worst.b));
    ++count;
    // Running sums drift; recompute occasionally.
    if (count % 256 == 0) {
      auto copy = segments;
      total = 0.0;
      total_error = 0.0;
      while (!copy.empty()) {
        total += copy.top().estimate;
        total_error += copy.top().error;
        copy.pop();
      }
    }
  }
  return total;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace qdfit
