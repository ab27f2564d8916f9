// Copyright 2026 The Pivotrank Authors.
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

#include "pivotrank/gaussian.h"

#include <cmath>
#include <numbers>

namespace pivotrank::gaussian {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;
constexpr int kContinuedFractionTerms = 200;

// Tail of the Laplace continued fraction for the Mills ratio,
//   cdf(-x) / pdf(x) = 1 / (x + 1 / (x + 2 / (x + 3 / (x + ...)))),
// returning K = 1 / (x + 2 / (x + 3 / ...)) so that 1 / millsratio = x + K.
// Converges quickly for x >= 6.
double MillsTail(double x) {
  double acc = x;
  for (int k = kContinuedFractionTerms; k >= 2; --k) {
    acc = x + k / acc;
  }
  return 1.0 / acc;
}

}  // namespace

double Pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double Cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double V(double t) {
  if (t < kTailThreshold) {
    // pdf(t)/cdf(t) with x = -t equals 1 / millsratio(x) = x + K(x).
    const double x = -t;
    return x + MillsTail(x);
  }
  return Pdf(t) / Cdf(t);
}

double W(double t) {
  if (t < kTailThreshold) {
    // V(t) + t = K(x) exactly, so there is no cancellation.
    const double x = -t;
    const double tail = MillsTail(x);
    return (x + tail) * tail;
  }
  const double v = V(t);
  return v * (v + t);
}

}  // namespace pivotrank::gaussian
