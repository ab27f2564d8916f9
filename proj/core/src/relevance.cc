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

#include "pivotrank/relevance.h"

#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "pivotrank/gaussian.h"

namespace pivotrank {
namespace {

// Builds a belief from a variance produced by an update, enforcing the
// sigma floor. Non-positive variance is a hard error.
RelevanceBelief FromUpdatedVariance(double mu, double variance,
                                    const char* what) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidArgument(
        fmt::format("{} produced non-positive variance {}", what, variance));
  }
  double sigma = std::sqrt(variance);
  if (sigma < kSigmaFloor) {
    spdlog::debug("{}: clamping sigma {} to floor {}", what, sigma, kSigmaFloor);
    sigma = kSigmaFloor;
  }
  return RelevanceBelief(mu, sigma);
}

}  // namespace

RelevanceBelief InitialBelief(std::optional<double> retrieval_score,
                              std::optional<ScoreRange> score_range,
                              const RatingConfig& config) {
  if (score_range && score_range->max < score_range->min) {
    throw InvalidArgument(fmt::format("inverted score range [{}, {}]",
                                      score_range->min, score_range->max));
  }
  if (!retrieval_score) return RelevanceBelief(config.mu0, config.sigma0);
  if (!score_range) {
    throw InvalidArgument("retrieval score given without the pool score range");
  }
  const double width = score_range->max - score_range->min;
  if (width == 0.0) return RelevanceBelief(config.mu0, config.sigma0);
  const double unit = 2.0 * (*retrieval_score - score_range->min) / width - 1.0;
  return RelevanceBelief(config.mu0 + config.sigma0 * unit, config.sigma0);
}

double PreferenceProbability(double logit_i, double logit_j,
                             double temperature) {
  if (!std::isfinite(logit_i) || !std::isfinite(logit_j)) {
    throw InvalidArgument(
        fmt::format("non-finite logits ({}, {})", logit_i, logit_j));
  }
  if (!(temperature > 0.0)) {
    throw InvalidArgument(fmt::format("temperature must be > 0, got {}", temperature));
  }
  const double x = (logit_i - logit_j) / temperature;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

OutcomePosteriors TrueSkillOutcomePosteriors(const RelevanceBelief& self,
                                             const RelevanceBelief& opponent,
                                             const RatingConfig& config) {
  if (!(config.beta > 0.0)) {
    throw InvalidArgument(fmt::format("beta must be > 0, got {}", config.beta));
  }
  const double var_i = self.variance();
  const double c2 =
      var_i + opponent.variance() + 2.0 * config.beta * config.beta;
  const double c = std::sqrt(c2);
  const double t = (self.mu() - opponent.mu()) / c;

  const double mean_step = var_i / c;
  const double var_ratio = var_i / c2;

  const double mu_win = self.mu() + mean_step * gaussian::V(t);
  const double var_win = var_i * (1.0 - var_ratio * gaussian::W(t));
  const double mu_loss = self.mu() - mean_step * gaussian::V(-t);
  const double var_loss = var_i * (1.0 - var_ratio * gaussian::W(-t));

  return {FromUpdatedVariance(mu_win, var_win, "win posterior"),
          FromUpdatedVariance(mu_loss, var_loss, "loss posterior")};
}

NaturalParams FractionalUpdateNatural(const RelevanceBelief& prior,
                                      const OutcomePosteriors& posteriors,
                                      double p_win) {
  if (!(p_win >= 0.0 && p_win <= 1.0)) {
    throw InvalidArgument(fmt::format("p_win must lie in [0, 1], got {}", p_win));
  }
  const NaturalParams base = prior.natural();
  const NaturalParams win = posteriors.win.natural();
  const NaturalParams loss = posteriors.loss.natural();
  const double q = 1.0 - p_win;
  return {
      base.precision + p_win * (win.precision - base.precision) +
          q * (loss.precision - base.precision),
      base.precision_mean + p_win * (win.precision_mean - base.precision_mean) +
          q * (loss.precision_mean - base.precision_mean),
  };
}

RelevanceBelief FractionalUpdate(const RelevanceBelief& prior,
                                 const OutcomePosteriors& posteriors,
                                 double p_win) {
  const NaturalParams updated =
      FractionalUpdateNatural(prior, posteriors, p_win);
  // The interpolation endpoints are the posteriors themselves.
  if (p_win == 1.0) return posteriors.win;
  if (p_win == 0.0) return posteriors.loss;
  if (!(updated.precision > 0.0)) {
    throw InvalidArgument(
        fmt::format("fractional update produced precision {}", updated.precision));
  }
  return FromUpdatedVariance(updated.precision_mean / updated.precision,
                             1.0 / updated.precision, "fractional update");
}

RelevanceBelief SoftCompare(const RelevanceBelief& self,
                            const RelevanceBelief& opponent, double p_win,
                            const RatingConfig& config) {
  return FractionalUpdate(
      self, TrueSkillOutcomePosteriors(self, opponent, config), p_win);
}

RelevanceBelief AggregatePivot(std::span<const RelevanceBelief> copies,
                               int count) {
  if (copies.empty()) throw InvalidArgument("cannot aggregate zero pivot copies");
  if (count <= 0) {
    throw InvalidArgument(fmt::format("aggregation count must be > 0, got {}", count));
  }
  double total_precision = 0.0;
  double weighted_mean = 0.0;
  for (const RelevanceBelief& copy : copies) {
    const double precision = 1.0 / copy.variance();
    total_precision += precision;
    weighted_mean += copy.mu() * precision;
  }
  return RelevanceBelief(weighted_mean / total_precision,
                         1.0 / std::sqrt(total_precision / count));
}

RelevanceBelief AggregatePivot(std::span<const RelevanceBelief> copies) {
  return AggregatePivot(copies, static_cast<int>(copies.size()));
}

double ConservativeScore(const RelevanceBelief& belief, double kappa) {
  if (!(kappa >= 0.0)) {
    throw InvalidArgument(fmt::format("kappa must be >= 0, got {}", kappa));
  }
  return belief.mu() - kappa * belief.sigma();
}

}  // namespace pivotrank
