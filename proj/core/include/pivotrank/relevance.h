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

#ifndef PIVOTRANK_RELEVANCE_H_
#define PIVOTRANK_RELEVANCE_H_

#include <optional>
#include <span>
#include <utility>

#include "pivotrank/belief.h"

namespace pivotrank {

// Inclusive (min, max) range of retrieval scores across a candidate pool.
struct ScoreRange {
  double min = 0.0;
  double max = 0.0;
};

// Prior belief for a candidate. Without a retrieval score the mean is mu0;
// with one, the pool's score range maps affinely onto
// [mu0 - sigma0, mu0 + sigma0]. Sigma is always sigma0.
RelevanceBelief InitialBelief(std::optional<double> retrieval_score,
                              std::optional<ScoreRange> score_range,
                              const RatingConfig& config);

// P(i preferred over j) = sigmoid((logit_i - logit_j) / temperature).
double PreferenceProbability(double logit_i, double logit_j,
                             double temperature);

// Posteriors of `self` after a decisive 1v1 comparison against `opponent`.
struct OutcomePosteriors {
  RelevanceBelief win;
  RelevanceBelief loss;
};

// Classic moment-form TrueSkill 1v1 update without draws:
//   c^2 = sigma_i^2 + sigma_j^2 + 2 beta^2,  t = (mu_i - mu_j) / c
//   win:  mu + (sigma_i^2 / c) V(t),  sigma_i^2 (1 - sigma_i^2 / c^2 W(t))
//   loss: mu - (sigma_i^2 / c) V(-t), sigma_i^2 (1 - sigma_i^2 / c^2 W(-t))
OutcomePosteriors TrueSkillOutcomePosteriors(const RelevanceBelief& self,
                                             const RelevanceBelief& opponent,
                                             const RatingConfig& config);

// Probability-weighted interpolation between the win and loss posteriors in
// natural-parameter space. `p_win` must lie in [0, 1].
NaturalParams FractionalUpdateNatural(const RelevanceBelief& prior,
                                      const OutcomePosteriors& posteriors,
                                      double p_win);
RelevanceBelief FractionalUpdate(const RelevanceBelief& prior,
                                 const OutcomePosteriors& posteriors,
                                 double p_win);

// Convenience: posteriors against `opponent`, then the fractional update.
RelevanceBelief SoftCompare(const RelevanceBelief& self,
                            const RelevanceBelief& opponent, double p_win,
                            const RatingConfig& config);

// Precision-weighted merge of the pivot's per-subset copies:
//   tau = sum 1/sigma_i^2, mu = sum mu_i/sigma_i^2 / tau,
//   sigma = (tau / count)^(-1/2).
RelevanceBelief AggregatePivot(std::span<const RelevanceBelief> copies,
                               int count);
RelevanceBelief AggregatePivot(std::span<const RelevanceBelief> copies);

// Lower-confidence score mu - kappa * sigma.
double ConservativeScore(const RelevanceBelief& belief, double kappa);

}  // namespace pivotrank

#endif  // PIVOTRANK_RELEVANCE_H_
