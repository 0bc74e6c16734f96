/*
 * Copyright 2026 The prefopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef PREFOPT_SIGMOID_HPP_
#define PREFOPT_SIGMOID_HPP_

#include <cmath>

namespace prefopt {

/// Logistic link s(a) = 1 / (1 + exp(-a)), evaluated without overflow.
template <typename Scalar>
inline Scalar sigmoid(Scalar a) {
  using std::exp;
  if (a >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + exp(-a));
  }
  const Scalar e = exp(a);
  return e / (Scalar(1) + e);
}

/// s'(a) = s(a)(1 - s(a)); maximal (1/4) at a = 0.
template <typename Scalar>
inline Scalar sigmoid_derivative(Scalar a) {
  const Scalar p = sigmoid(a);
  return p * (Scalar(1) - p);
}

/// log(1 + exp(a)).
template <typename Scalar>
inline Scalar softplus(Scalar a) {
  using std::exp;
  using std::log1p;
  if (a > Scalar(0)) {
    return a + log1p(exp(-a));
  }
  return log1p(exp(a));
}

/// log s(a) = -softplus(-a); finite for every finite a.
template <typename Scalar>
inline Scalar log_sigmoid(Scalar a) {
  return -softplus(-a);
}

}  // namespace prefopt

#endif  // PREFOPT_SIGMOID_HPP_
