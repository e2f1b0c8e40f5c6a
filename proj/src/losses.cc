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

#include "salad/losses.h"

#include <cmath>
#include <string>
#include <vector>

#include "salad/common.h"

namespace salad {
namespace {

constexpr double kNormEpsilon = 1e-12;

void CheckTriplet(const Matrix& a, const Matrix& p, const Matrix& n) {
  if (a.rows() < 1) throw ContractViolation("triplet loss needs m >= 1");
  if (a.rows() != p.rows() || a.rows() != n.rows() || a.cols() != p.cols() ||
      a.cols() != n.cols()) {
    throw ContractViolation("triplet loss: representation shapes differ");
  }
}

// Gradient of d(a, b) with respect to a; the gradient with respect to b is
// its negation for Euclidean distance only.
struct DistanceGrad {
  double value;
  Eigen::RowVectorXd d_a;
  Eigen::RowVectorXd d_b;
};

DistanceGrad DistanceWithGrad(const Eigen::RowVectorXd& a,
                              const Eigen::RowVectorXd& b, Distance distance) {
  DistanceGrad g{0.0, Eigen::RowVectorXd::Zero(a.size()),
                 Eigen::RowVectorXd::Zero(a.size())};
  if (distance == Distance::kEuclidean) {
    const Eigen::RowVectorXd diff = a - b;
    g.value = diff.norm();
    // Non-differentiable at a == b; use the zero subgradient.
    if (g.value > kNormEpsilon) {
      g.d_a = diff / g.value;
      g.d_b = -g.d_a;
    }
    return g;
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kNormEpsilon || nb < kNormEpsilon) {
    g.value = 1.0;
    return g;
  }
  const double dot = a.dot(b);
  const double cos = dot / (na * nb);
  g.value = 1.0 - cos;
  g.d_a = -(b / (na * nb) - a * (cos / (na * na)));
  g.d_b = -(a / (na * nb) - b * (cos / (nb * nb)));
  return g;
}

}  // namespace

std::string_view DistanceName(Distance d) {
  return d == Distance::kEuclidean ? "euclidean" : "cosine";
}

Distance DistanceFromName(std::string_view name) {
  const std::string lower = ToLowerAscii(name);
  if (lower == "euclidean") return Distance::kEuclidean;
  if (lower == "cosine" || lower == "cosine_distance") return Distance::kCosine;
  throw ConfigError("unknown distance '" + std::string(name) + "'");
}

std::string_view TripletModeName(TripletMode m) {
  return m == TripletMode::kBatchMeanHinge ? "batch_mean_hinge"
                                           : "per_example_hinge";
}

TripletMode TripletModeFromName(std::string_view name) {
  const std::string lower = ToLowerAscii(name);
  if (lower == "batch_mean_hinge") return TripletMode::kBatchMeanHinge;
  if (lower == "per_example_hinge") return TripletMode::kPerExampleHinge;
  throw ConfigError("unknown triplet mode '" + std::string(name) + "'");
}

void LossConfig::Validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  if (!(margin >= 0.0)) throw ConfigError("margin must be non-negative");
}

LossAndGrad CrossEntropyWithGrad(const Matrix& logits,
                                 std::span<const int> labels) {
  const auto n = logits.rows();
  const auto c = logits.cols();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) {
    throw ContractViolation("cross entropy: logits rows must match labels");
  }
  if (!logits.allFinite()) {
    throw ContractViolation("cross entropy: non-finite logits");
  }
  LossAndGrad out{0.0, Matrix(n, c)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= c) {
      throw ContractViolation("cross entropy: label " + std::to_string(y) +
                              " out of range for " + std::to_string(c) +
                              " classes");
    }
    const double max = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - max;
    const double log_sum = std::log(shifted.array().exp().sum());
    out.loss += log_sum - shifted(y);
    out.grad.row(i) = (shifted.array() - log_sum).exp();
    out.grad(i, y) -= 1.0;
  }
  out.loss /= static_cast<double>(n);
  out.grad /= static_cast<double>(n);
  return out;
}

double CrossEntropy(const Matrix& logits, std::span<const int> labels) {
  return CrossEntropyWithGrad(logits, labels).loss;
}

double PairDistance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b,
                    Distance distance) {
  return DistanceWithGrad(a, b, distance).value;
}

TripletLossAndGrad TripletLossWithGrad(const Matrix& anchors,
                                       const Matrix& positives,
                                       const Matrix& negatives,
                                       const LossConfig& cfg) {
  CheckTriplet(anchors, positives, negatives);
  const auto m = anchors.rows();
  const double inv_m = 1.0 / static_cast<double>(m);
  TripletLossAndGrad out{0.0, Matrix::Zero(m, anchors.cols()),
                         Matrix::Zero(m, anchors.cols()),
                         Matrix::Zero(m, anchors.cols())};
  std::vector<DistanceGrad> dp;
  std::vector<DistanceGrad> dn;
  dp.reserve(static_cast<std::size_t>(m));
  dn.reserve(static_cast<std::size_t>(m));
  double mean_gap = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    dp.push_back(DistanceWithGrad(anchors.row(i), positives.row(i), cfg.distance));
    dn.push_back(DistanceWithGrad(anchors.row(i), negatives.row(i), cfg.distance));
    mean_gap += dp.back().value - dn.back().value;
  }
  mean_gap *= inv_m;

  auto accumulate = [&](Eigen::Index i, double weight) {
    const auto k = static_cast<std::size_t>(i);
    out.grad_anchor.row(i) += weight * (dp[k].d_a - dn[k].d_a);
    out.grad_positive.row(i) += weight * dp[k].d_b;
    out.grad_negative.row(i) -= weight * dn[k].d_b;
  };

  if (cfg.triplet_mode == TripletMode::kBatchMeanHinge) {
    const double inner = mean_gap + cfg.margin;
    if (inner > 0.0) {
      out.loss = inner;
      for (Eigen::Index i = 0; i < m; ++i) accumulate(i, inv_m);
    }
  } else {
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double inner = dp[k].value - dn[k].value + cfg.margin;
      if (inner > 0.0) {
        out.loss += inner * inv_m;
        accumulate(i, inv_m);
      }
    }
  }
  return out;
}

double TripletLoss(const Matrix& anchors, const Matrix& positives,
                   const Matrix& negatives, const LossConfig& cfg) {
  return TripletLossWithGrad(anchors, positives, negatives, cfg).loss;
}

double CombinedLoss(double ce, double cl, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ContractViolation("lambda must lie in [0, 1]");
  }
  if (lambda == 0.0) return ce;
  if (lambda == 1.0) return cl;
  return (1.0 - lambda) * ce + lambda * cl;
}

}  // namespace salad
