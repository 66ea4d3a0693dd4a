// Copyright 2026 The cvxreg Authors
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

#include "cvxreg/types.hpp"

#include <cmath>
#include <string>

namespace cvxreg {

FunctionClass::FunctionClass(double mu, double L) : FunctionClass(mu, L, true) {
  if (!std::isfinite(L)) {
    throw InvalidClassError(
        "finite-L constructor given a non-finite L; use with_infinite_L");
  }
}

FunctionClass FunctionClass::with_infinite_L(double mu) {
  return FunctionClass(mu, 0.0, false);
}

FunctionClass::FunctionClass(double mu, double L, bool finite)
    : mu_(mu), L_(L), finite_L_(finite) {
  if (!std::isfinite(mu) || mu < 0.0) {
    throw InvalidClassError("mu must be finite and nonnegative, got " +
                            std::to_string(mu));
  }
  if (finite_L_ && !(mu < L)) {
    // L = mu admits only pure quadratics and is excluded from the class.
    throw InvalidClassError("class requires mu < L, got mu = " +
                            std::to_string(mu) + ", L = " + std::to_string(L));
  }
}

double FunctionClass::L() const {
  if (!finite_L_) {
    throw InfiniteLError("L() requested on a class with L = inf");
  }
  return L_;
}

FunctionClass::PairCoefficients FunctionClass::pair_coefficients() const {
  if (!finite_L_) {
    return {0.0, mu_ / 2.0, 0.0};
  }
  const double gap = L_ - mu_;
  return {1.0 / (2.0 * gap), mu_ * L_ / (2.0 * gap), -mu_ / gap};
}

bool FunctionClass::operator==(const FunctionClass& other) const {
  if (finite_L_ != other.finite_L_) return false;
  if (mu_ != other.mu_) return false;
  return !finite_L_ || L_ == other.L_;
}

namespace {

void check_no_duplicate_sites(const SiteMatrix& points) {
  const Eigen::Index n = points.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist =
          (points.col(i) - points.col(j)).lpNorm<Eigen::Infinity>();
      if (dist <= kDuplicateSiteTol) {
        throw DuplicateSiteError(
            static_cast<int>(i), static_cast<int>(j),
            "duplicate sites at indices " + std::to_string(i) + " and " +
                std::to_string(j));
      }
    }
  }
}

}  // namespace

ObservationSet::ObservationSet(SiteMatrix points, Eigen::VectorXd values)
    : points_(std::move(points)), values_(std::move(values)) {
  if (points_.cols() != values_.size()) {
    throw DimensionMismatchError(
        "points and values disagree on n: " + std::to_string(points_.cols()) +
        " vs " + std::to_string(values_.size()));
  }
  if (points_.cols() < 2) {
    throw TooFewPointsError("need at least 2 observations, got " +
                            std::to_string(points_.cols()));
  }
  if (points_.rows() < 1) {
    throw DimensionMismatchError("sites must have dimension >= 1");
  }
  check_no_duplicate_sites(points_);
}

ObservationSet validate_observations(const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& values) {
  if (points.size() != values.size()) {
    throw DimensionMismatchError(
        "points and values disagree on n: " + std::to_string(points.size()) +
        " vs " + std::to_string(values.size()));
  }
  if (points.size() < 2) {
    throw TooFewPointsError("need at least 2 observations, got " +
                            std::to_string(points.size()));
  }
  const std::size_t d = points.front().size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw DimensionMismatchError("site " + std::to_string(i) + " has dimension " +
                                   std::to_string(points[i].size()) +
                                   ", expected " + std::to_string(d));
    }
  }
  SiteMatrix sites(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(points.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      sites(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = points[i][k];
    }
    y[static_cast<Eigen::Index>(i)] = values[i];
  }
  return ObservationSet(std::move(sites), std::move(y));
}

CertifiedModel::CertifiedModel(SiteMatrix sites, Eigen::VectorXd values,
                               SiteMatrix gradients, FunctionClass function_class)
    : sites_(std::move(sites)),
      values_(std::move(values)),
      gradients_(std::move(gradients)),
      class_(function_class) {
  if (sites_.cols() != values_.size() || sites_.cols() != gradients_.cols() ||
      sites_.rows() != gradients_.rows()) {
    throw DimensionMismatchError("sites/values/gradients shapes disagree");
  }
  if (sites_.cols() < 1) {
    throw TooFewPointsError("model needs at least one triplet");
  }
}

void conjugate_triplet(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double f,
                       double mu, Eigen::VectorXd& tilde_x, Eigen::VectorXd& tilde_g,
                       double& tilde_f) {
  if (x.size() != g.size()) {
    throw DimensionMismatchError("point and gradient dimensions disagree");
  }
  tilde_x = g - mu * x;
  tilde_g = x;
  tilde_f = x.dot(g) - f - 0.5 * mu * x.squaredNorm();
}

ConjugateTriplets to_conjugate_coordinates(const CertifiedModel& model) {
  if (!model.function_class().has_finite_L()) {
    throw InfiniteLError("conjugate coordinates are defined for finite L only");
  }
  const double mu = model.function_class().mu();
  ConjugateTriplets out;
  out.tilde_points = model.gradients() - mu * model.sites();
  out.tilde_gradients = model.sites();
  out.tilde_values.resize(model.n());
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    out.tilde_values[i] = model.site(i).dot(model.gradient(i)) - model.value(i) -
                          0.5 * mu * model.site(i).squaredNorm();
  }
  return out;
}

}  // namespace cvxreg
