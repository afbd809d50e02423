// Copyright 2026 The privbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact discrete-probability primitives. Every information quantity is in
// nats; 0 ln 0 is taken as 0 and entries below kZeroProb count as zero.

#ifndef PRIVBOUND_PROBCORE_H_
#define PRIVBOUND_PROBCORE_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace privbound {

inline constexpr double kZeroProb = 1e-15;
// Mass deviations up to this are renormalized away, larger ones rejected.
inline constexpr double kMassTolerance = 1e-6;
inline constexpr std::size_t kDefaultSizeCap = 10'000'000;

// Dense tensor cap; PRIVBOUND_SIZE_CAP overrides the default of 10^7.
std::size_t size_cap();

// -p ln p, with p < kZeroProb treated as 0.
double neg_xlogx(double p);

// Entropy of a nonnegative vector, no validation.
double entropy_of(std::span<const double> probs);

// Validates nonnegativity and unit mass, then renormalizes. `what` names the
// object in the error message.
std::vector<double> normalize_checked(std::vector<double> probs,
                                      const std::string& what);

class Dist {
 public:
  explicit Dist(std::vector<double> probs,
                std::vector<std::string> labels = {});

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<double> probs_;
  std::vector<std::string> labels_;
};

enum class Axis { kRows, kCols };

// |A| x |B| joint law, rows index the first variable. Row-major storage.
class Joint2 {
 public:
  Joint2(std::size_t rows, std::size_t cols, std::vector<double> table);
  static Joint2 from_rows(const std::vector<std::vector<double>>& rows);
  static Joint2 outer(const Dist& a, const Dist& b);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return table_[r * cols_ + c];
  }
  std::span<const double> table() const { return table_; }

  Dist row_marginal() const;
  Dist col_marginal() const;
  Joint2 transposed() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> table_;
};

// Dense joint over an ordered list of axes; the last axis varies fastest.
class JointN {
 public:
  JointN(std::vector<std::size_t> axes, std::vector<double> table);
  static JointN from_joint2(const Joint2& j);

  const std::vector<std::size_t>& axes() const { return axes_; }
  std::size_t rank() const { return axes_.size(); }
  std::span<const double> table() const { return table_; }

  // Marginal over `keep`, with axes in the order given.
  JointN marginal(std::span<const std::size_t> keep) const;
  // Flattens the marginal over `a` (rows) and `b` (cols) into a Joint2.
  Joint2 flatten(std::span<const std::size_t> a,
                 std::span<const std::size_t> b) const;

 private:
  std::vector<std::size_t> axes_;
  std::vector<double> table_;
};

double entropy(const Dist& d);
double entropy(const Joint2& j);
double entropy(const JointN& j);

// H(other axis | given axis).
double conditional_entropy(const Joint2& j, Axis given);

// I(A;B) = H(A) + H(B) - H(A,B), clamped at 0 for float noise.
double mutual_information(const Joint2& j);

// I between two disjoint, nonempty axis groups of a JointN.
double mi_between(const JointN& j, std::span<const std::size_t> a,
                  std::span<const std::size_t> b);

// I(A;B|C) for disjoint axis groups; C may be empty.
double conditional_mi(const JointN& j, std::span<const std::size_t> a,
                      std::span<const std::size_t> b,
                      std::span<const std::size_t> given);

// Tensor product of independent parts; axes are concatenated in order.
JointN product_join(std::span<const JointN> parts);
JointN product_join(std::span<const JointN> parts, std::size_t cap);

}  // namespace privbound

#endif  // PRIVBOUND_PROBCORE_H_
