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


#include "mvdr/metrics.h"

#include <array>
#include <cmath>

#include "mvdr/error.h"

namespace mvdr {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void CheckSameDims(const Frame& a, const Frame& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    ThrowInvalid("metric inputs differ in dimensions");
  }
}

std::array<double, kWindow> GaussianTaps() {
  std::array<double, kWindow> taps{};
  double sum = 0;
  for (int i = 0; i < kWindow; ++i) {
    double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2 * kSigma * kSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" Gaussian filtering: output is (w-10) x (h-10).
std::vector<double> FilterValid(const std::vector<double>& img, int w, int h,
                                const std::array<double, kWindow>& taps) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * img[y * w + x + k];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double Psnr(const Frame& a, const Frame& b) {
  CheckSameDims(a, b);
  auto sa = a.samples();
  auto sb = b.samples();
  double sse = 0;
  for (size_t i = 0; i < sa.size(); ++i) {
    double d = static_cast<double>(sa[i]) - sb[i];
    sse += d * d;
  }
  if (sse == 0) return kPsnrCap;
  double mse = sse / static_cast<double>(sa.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double Ssim(const Frame& a, const Frame& b) {
  CheckSameDims(a, b);
  const int w = a.width();
  const int h = a.height();
  if (w < kWindow || h < kWindow) {
    ThrowInvalid("frame smaller than the 11x11 SSIM window");
  }
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  auto sa = a.samples();
  auto sb = b.samples();
  for (size_t i = 0; i < n; ++i) {
    x[i] = sa[i];
    y[i] = sb[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto taps = GaussianTaps();
  auto mx = FilterValid(x, w, h, taps);
  auto my = FilterValid(y, w, h, taps);
  auto mxx = FilterValid(xx, w, h, taps);
  auto myy = FilterValid(yy, w, h, taps);
  auto mxy = FilterValid(xy, w, h, taps);
  double total = 0;
  for (size_t i = 0; i < mx.size(); ++i) {
    double vx = mxx[i] - mx[i] * mx[i];
    double vy = myy[i] - my[i] * my[i];
    double cov = mxy[i] - mx[i] * my[i];
    double num = (2 * mx[i] * my[i] + c1) * (2 * cov + c2);
    double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace mvdr
