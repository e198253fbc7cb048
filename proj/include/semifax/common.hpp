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

#ifndef SEMIFAX_COMMON_HPP
#define SEMIFAX_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semifax {

// Base of every error the library throws on bad input or violated contracts.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that fails validation (malformed files, schema mismatches, bad flags).
class ValidationError : public Error {
 public:
  using Error::Error;
};

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void push_row(std::span<const double> values);

  [[nodiscard]] const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double euclidean(std::span<const double> a, std::span<const double> b);

// 64-bit FNV-1a over a byte string; stable across platforms.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Runs fn(i) for i in [0, n) on up to `threads` workers with static chunking.
// Results must be written to index-addressed slots so output is independent of
// scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn);

// Worker count from SEMIFAX_THREADS (default 1).
std::size_t threads_from_env();

}  // namespace semifax

#include "semifax/detail/parallel.hpp"

#endif  // SEMIFAX_COMMON_HPP
