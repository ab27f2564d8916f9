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

#ifndef PIVOTRANK_BELIEF_H_
#define PIVOTRANK_BELIEF_H_

#include <stdexcept>
#include <string>

namespace pivotrank {

// Raised when a belief or configuration violates its invariants.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Natural-parameter view of a Gaussian: precision = 1/sigma^2 and
// precision_mean = mu/sigma^2. Fractional updates interpolate linearly here.
struct NaturalParams {
  double precision = 0.0;
  double precision_mean = 0.0;
};

// Gaussian relevance belief N(mu, sigma^2) in rating units.
class RelevanceBelief {
 public:
  // Throws InvalidArgument unless sigma > 0 and both values are finite.
  RelevanceBelief(double mu, double sigma);

  // Throws InvalidArgument unless precision > 0.
  static RelevanceBelief FromNatural(const NaturalParams& natural);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double variance() const { return sigma_ * sigma_; }

  NaturalParams natural() const;

  bool operator==(const RelevanceBelief&) const = default;

 private:
  double mu_;
  double sigma_;
};

std::string ToString(const RelevanceBelief& belief);

// Smallest sigma any update may produce; results below are clamped.
inline constexpr double kSigmaFloor = 1e-6;

struct RatingConfig {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 3.0;  // mu0 / 3
  double temperature = 4.0;
  double kappa = 1.0;

  // Throws InvalidArgument on sigma0 <= 0, beta <= 0, temperature <= 0 or
  // kappa < 0.
  void Validate() const;
};

}  // namespace pivotrank

#endif  // PIVOTRANK_BELIEF_H_
