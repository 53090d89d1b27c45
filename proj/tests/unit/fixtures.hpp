// Copyright 2026 The pathgibbs Authors
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


#pragma once

#include "pathgibbs/spectral.hpp"

namespace pathgibbs::testing {

// d = 3, omega = r, rho2 = 1 on [1, 2].
inline SpectralDensity test_density(double amplitude = 1.0, int quad_nodes = 16) {
  FormFactor f;
  f.amplitude = amplitude;
  return SpectralDensity(3, PowerLaw{1.0}, f, 1.0, 2.0, quad_nodes);
}

inline SpectralDensity zero_density(int d = 3) {
  FormFactor f;
  f.amplitude = 0.0;
  return SpectralDensity(d, PowerLaw{1.0}, f, 1.0, 2.0);
}

}  // namespace pathgibbs::testing
