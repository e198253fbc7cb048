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

#ifndef SEMIFAX_TREND_HPP
#define SEMIFAX_TREND_HPP

#include <span>

namespace semifax {

enum class TrendDirection { increasing, decreasing, none };

struct TrendResult {
  double tau = 0.0;         // Kendall tau-b against the time index
  long s_statistic = 0;     // Mann-Kendall S
  std::size_t n = 0;
  TrendDirection direction = TrendDirection::none;
  double net_change = 0.0;  // last - first
};

// Mann-Kendall S and tie-corrected tau-b of a sequence against its index.
// A sequence with every value tied has tau = 0.
TrendResult mann_kendall(std::span<const double> seq);

// tau < epsilon (strict); epsilon must be negative.
bool passes_weakening(const TrendResult& t, double epsilon);

const char* to_string(TrendDirection d);

}  // namespace semifax

#endif  // SEMIFAX_TREND_HPP
