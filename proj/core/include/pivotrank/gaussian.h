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

#ifndef PIVOTRANK_GAUSSIAN_H_
#define PIVOTRANK_GAUSSIAN_H_

namespace pivotrank::gaussian {

// Standard normal density and distribution function.
double Pdf(double t);
double Cdf(double t);

// Truncated-Gaussian correction factors used by the 1v1 TrueSkill update:
//   V(t) = pdf(t) / cdf(t)
//   W(t) = V(t) * (V(t) + t)
// Both are evaluated without 0/0 for t far in the left tail; below
// kTailThreshold a Laplace continued fraction for the Mills ratio is used.
// W(t) lies in [0, 1) for every finite t; it underflows to 0 only for
// t above about 38.
double V(double t);
double W(double t);

inline constexpr double kTailThreshold = -6.0;

}  // namespace pivotrank::gaussian

#endif  // PIVOTRANK_GAUSSIAN_H_
