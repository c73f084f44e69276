/*
 * Copyright 2026 The KIS Engine Authors
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
 */

#pragma once

#include <cstdint>

#include "kis/corpus.hpp"

namespace kis {

/// CIELAB color. L in [0,100]; a and b roughly in [-128,128].
struct LabColor {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const LabColor&, const LabColor&) = default;
};

/// sRGB (8-bit, gamma-companded) to CIELAB under D65 / 2 degree observer.
LabColor rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);
inline LabColor rgb_to_lab(Rgb c) { return rgb_to_lab(c.r, c.g, c.b); }

/// Inverse of rgb_to_lab, clamped to the sRGB gamut and rounded.
Rgb lab_to_rgb(const LabColor& lab);

/// CIE76 color difference (Euclidean distance in Lab).
double delta_e76(const LabColor& x, const LabColor& y);

}  // namespace kis
