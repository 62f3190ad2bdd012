// Copyright 2026 The MVDR Authors
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


#ifndef MVDR_METRICS_H_
#define MVDR_METRICS_H_

#include "mvdr/frame.h"

namespace mvdr {

// Reported for identical frames instead of +inf.
inline constexpr double kPsnrCap = 99.0;

double Psnr(const Frame& a, const Frame& b);

// Mean SSIM over all valid 11x11 Gaussian (sigma 1.5) windows,
// K1 = 0.01, K2 = 0.03, dynamic range 255.
double Ssim(const Frame& a, const Frame& b);

}  // namespace mvdr

#endif  // MVDR_METRICS_H_
