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

#include "pivotrank/belief.h"

#include <cmath>

#include <fmt/format.h>

namespace pivotrank {

RelevanceBelief::RelevanceBelief(double mu, double sigma)
    : mu_(mu), sigma_(sigma) {
  if (!std::isfinite(mu) || !std::isfinite(sigma)) {
    throw InvalidArgument(
        fmt::format("belief must be finite, got mu={} sigma={}", mu, sigma));
  }
  if (sigma <= 0.0) {
    throw InvalidArgument(fmt::format("belief sigma must be > 0, got {}", sigma));
  }
}

RelevanceBelief RelevanceBelief::FromNatural(const NaturalParams& natural) {
  if (!(natural.precision > 0.0) || !std::isfinite(natural.precision)) {
    throw InvalidArgument(
        fmt::format("precision must be finite and > 0, got {}", natural.precision));
  }
  return RelevanceBelief(natural.precision_mean / natural.precision,
                         1.0 / std::sqrt(natural.precision));
}

NaturalParams RelevanceBelief::natural() const {
  const double precision = 1.0 / (sigma_ * sigma_);
  return {precision, mu_ * precision};
}

std::string ToString(const RelevanceBelief& belief) {
  return fmt::format("N({:.6g}, {:.6g}^2)", belief.mu(), belief.sigma());
}

void RatingConfig::Validate() const {
  if (!std::isfinite(mu0)) throw InvalidArgument("rating.mu0 must be finite");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
    throw InvalidArgument(fmt::format("rating.sigma0 must be > 0, got {}", sigma0));
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument(fmt::format("rating.beta must be > 0, got {}", beta));
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidArgument(
        fmt::format("rating.temperature must be > 0, got {}", temperature));
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument(fmt::format("rating.kappa must be >= 0, got {}", kappa));
  }
}

}  // namespace pivotrank
