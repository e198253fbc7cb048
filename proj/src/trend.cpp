/*
 * Copyright 2026 The Semifax Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "semifax/trend.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "semifax/common.hpp"

namespace semifax {

TrendResult mann_kendall(std::span<const double> seq) {
  const std::size_t n = seq.size();
  if (n < 3) throw ValidationError("mann_kendall: need at least 3 values");
  for (double v : seq) {
    if (!std::isfinite(v)) throw ValidationError("mann_kendall: non-finite value");
  }
  long s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      s += (seq[j] > seq[i]) - (seq[j] < seq[i]);
    }
  }
  // Tie groups in the values; the index side has none.
  std::vector<double> sorted(seq.begin(), seq.end());
  std::sort(sorted.begin(), sorted.end());
  double tied_pairs = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t e = i;
    while (e < n && sorted[e] == sorted[i]) ++e;
    const auto t = static_cast<double>(e - i);
    tied_pairs += t * (t - 1.0) / 2.0;
    i = e;
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double denom = std::sqrt(pairs * (pairs - tied_pairs));

  TrendResult r;
  r.n = n;
  r.s_statistic = s;
  r.tau = denom > 0 ? static_cast<double>(s) / denom : 0.0;
  r.tau = std::clamp(r.tau, -1.0, 1.0);
  r.direction = r.tau > 0 ? TrendDirection::increasing
                          : (r.tau < 0 ? TrendDirection::decreasing : TrendDirection::none);
  r.net_change = seq[n - 1] - seq[0];
  return r;
}

bool passes_weakening(const TrendResult& t, double epsilon) {
  if (!(epsilon < 0)) throw ValidationError("passes_weakening: epsilon must be negative");
  return t.tau < epsilon;
}

const char* to_string(TrendDirection d) {
  switch (d) {
    case TrendDirection::increasing: return "increasing";
    case TrendDirection::decreasing: return "decreasing";
    case TrendDirection::none: return "none";
  }
  return "none";
}

}  // namespace semifax
