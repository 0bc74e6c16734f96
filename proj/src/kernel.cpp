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

#include "prefopt/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prefopt {

void KernelSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("kernel variance must be positive and finite");
  }
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("kernel lengthscale must be positive and finite");
  }
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kRbf: return "rbf";
    case KernelFamily::kMatern12: return "matern12";
    case KernelFamily::kMatern32: return "matern32";
    case KernelFamily::kMatern52: return "matern52";
    case KernelFamily::kLinear: return "linear";
  }
  throw std::logic_error("unhandled kernel family");
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "rbf") return KernelFamily::kRbf;
  if (name == "matern12") return KernelFamily::kMatern12;
  if (name == "matern32") return KernelFamily::kMatern32;
  if (name == "matern52") return KernelFamily::kMatern52;
  if (name == "linear") return KernelFamily::kLinear;
  throw std::invalid_argument("unknown kernel family: " + std::string(name));
}

}  // namespace prefopt
