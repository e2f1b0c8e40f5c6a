//
// Copyright 2026 The Salad Authors
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
//

#ifndef SALAD_LOSSES_H_
#define SALAD_LOSSES_H_

#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace salad {

enum class Distance { kEuclidean, kCosine };
// kBatchMeanHinge: max(0, mean_i[d(a_i,p_i) - d(a_i,n_i)] + margin).
// kPerExampleHinge: mean_i max(0, d(a_i,p_i) - d(a_i,n_i) + margin).
enum class TripletMode { kBatchMeanHinge, kPerExampleHinge };

std::string_view DistanceName(Distance d);
Distance DistanceFromName(std::string_view name);
std::string_view TripletModeName(TripletMode m);
TripletMode TripletModeFromName(std::string_view name);

struct LossConfig {
  double lambda = 0.5;  // weight of the triplet term
  double margin = 1.0;
  Distance distance = Distance::kEuclidean;
  TripletMode triplet_mode = TripletMode::kBatchMeanHinge;

  void Validate() const;
};

// Rows are examples throughout.
using Matrix = Eigen::MatrixXd;

// Mean negative log-likelihood of the gold class under softmax(logits).
double CrossEntropy(const Matrix& logits, std::span<const int> labels);

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};
LossAndGrad CrossEntropyWithGrad(const Matrix& logits,
                                 std::span<const int> labels);

double PairDistance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b,
                    Distance distance);

double TripletLoss(const Matrix& anchors, const Matrix& positives,
                   const Matrix& negatives, const LossConfig& cfg);

struct TripletLossAndGrad {
  double loss = 0.0;
  Matrix grad_anchor;
  Matrix grad_positive;
  Matrix grad_negative;
};
TripletLossAndGrad TripletLossWithGrad(const Matrix& anchors,
                                       const Matrix& positives,
                                       const Matrix& negatives,
                                       const LossConfig& cfg);

// (1 - lambda) * ce + lambda * cl.
double CombinedLoss(double ce, double cl, double lambda);

}  // namespace salad

#endif  // SALAD_LOSSES_H_
