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

#include "privbound/probcore.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "privbound/errors.h"

namespace privbound {
namespace {

constexpr double kNegativeSlack = 1e-12;

std::size_t product_of(std::span<const std::size_t> sizes) {
  std::size_t n = 1;
  for (std::size_t s : sizes) n *= s;
  return n;
}

void check_disjoint(std::span<const std::size_t> a,
                    std::span<const std::size_t> b, std::size_t rank) {
  for (std::size_t x : a) {
    if (x >= rank) throw Error(ErrorCode::kInvalidArgument, "axis out of range");
    if (std::find(b.begin(), b.end(), x) != b.end()) {
      throw Error(ErrorCode::kInvalidArgument, "overlapping axis sets");
    }
  }
  for (std::size_t x : b) {
    if (x >= rank) throw Error(ErrorCode::kInvalidArgument, "axis out of range");
  }
}

std::vector<std::size_t> concat(std::span<const std::size_t> a,
                                std::span<const std::size_t> b) {
  std::vector<std::size_t> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double marginal_entropy(const JointN& j, std::span<const std::size_t> axes) {
  if (axes.empty()) return 0.0;
  return entropy(j.marginal(axes));
}

}  // namespace

std::size_t size_cap() {
  if (const char* env = std::getenv("PRIVBOUND_SIZE_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultSizeCap;
}

double neg_xlogx(double p) { return p < kZeroProb ? 0.0 : -p * std::log(p); }

double entropy_of(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) h += neg_xlogx(p);
  return std::max(h, 0.0);
}

std::vector<double> normalize_checked(std::vector<double> probs,
                                      const std::string& what) {
  if (probs.empty()) {
    throw Error(ErrorCode::kInvariant, what + ": empty distribution");
  }
  double total = 0.0;
  for (double& p : probs) {
    if (!std::isfinite(p) || p < -kNegativeSlack) {
      std::ostringstream msg;
      msg << what << ": invalid probability " << p;
      throw Error(ErrorCode::kInvariant, msg.str());
    }
    if (p < 0.0) p = 0.0;
    total += p;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg << what << ": total mass " << total << " is not 1";
    throw Error(ErrorCode::kInvariant, msg.str());
  }
  for (double& p : probs) p /= total;
  return probs;
}

Dist::Dist(std::vector<double> probs, std::vector<std::string> labels)
    : probs_(normalize_checked(std::move(probs), "distribution")),
      labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != probs_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label count does not match");
  }
}

Joint2::Joint2(std::size_t rows, std::size_t cols, std::vector<double> table)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0 || table.size() != rows * cols) {
    throw Error(ErrorCode::kInvalidArgument, "joint table shape mismatch");
  }
  table_ = normalize_checked(std::move(table), "joint");
}

Joint2 Joint2::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "no rows");
  const std::size_t cols = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) {
      throw Error(ErrorCode::kInvalidArgument, "ragged joint matrix");
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Joint2(rows.size(), cols, std::move(flat));
}

Joint2 Joint2::outer(const Dist& a, const Dist& b) {
  std::vector<double> t(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) t[i * b.size() + k] = a[i] * b[k];
  }
  return Joint2(a.size(), b.size(), std::move(t));
}

Dist Joint2::row_marginal() const {
  std::vector<double> m(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) m[r] += (*this)(r, c);
  }
  return Dist(std::move(m));
}

Dist Joint2::col_marginal() const {
  std::vector<double> m(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) m[c] += (*this)(r, c);
  }
  return Dist(std::move(m));
}

Joint2 Joint2::transposed() const {
  std::vector<double> t(table_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t[c * rows_ + r] = (*this)(r, c);
  }
  return Joint2(cols_, rows_, std::move(t));
}

JointN::JointN(std::vector<std::size_t> axes, std::vector<double> table)
    : axes_(std::move(axes)) {
  if (axes_.empty() || std::find(axes_.begin(), axes_.end(), 0u) != axes_.end() ||
      product_of(axes_) != table.size()) {
    throw Error(ErrorCode::kInvalidArgument, "tensor shape mismatch");
  }
  table_ = normalize_checked(std::move(table), "tensor");
}

JointN JointN::from_joint2(const Joint2& j) {
  return JointN({j.rows(), j.cols()},
                std::vector<double>(j.table().begin(), j.table().end()));
}

JointN JointN::marginal(std::span<const std::size_t> keep) const {
  if (keep.empty()) throw Error(ErrorCode::kInvalidArgument, "empty marginal");
  std::vector<std::size_t> out_axes;
  std::vector<std::size_t> contrib(rank(), 0);
  std::size_t stride = 1;
  for (std::size_t k = keep.size(); k-- > 0;) {
    const std::size_t a = keep[k];
    if (a >= rank() || contrib[a] != 0) {
      throw Error(ErrorCode::kInvalidArgument, "bad marginal axis set");
    }
    contrib[a] = stride;
    stride *= axes_[a];
  }
  for (std::size_t a : keep) out_axes.push_back(axes_[a]);

  std::vector<double> out(stride, 0.0);
  std::vector<std::size_t> idx(rank(), 0);
  std::size_t out_idx = 0;
  for (double p : table_) {
    out[out_idx] += p;
    // Odometer increment, keeping out_idx in sync.
    for (std::size_t a = rank(); a-- > 0;) {
      if (++idx[a] < axes_[a]) {
        out_idx += contrib[a];
        break;
      }
      out_idx -= contrib[a] * (axes_[a] - 1);
      idx[a] = 0;
    }
  }
  return JointN(std::move(out_axes), std::move(out));
}

Joint2 JointN::flatten(std::span<const std::size_t> a,
                       std::span<const std::size_t> b) const {
  check_disjoint(a, b, rank());
  const auto keep = concat(a, b);
  JointN m = marginal(keep);
  std::size_t rows = 1;
  for (std::size_t x : a) rows *= axes_[x];
  const std::size_t cols = m.table().size() / rows;
  return Joint2(rows, cols,
                std::vector<double>(m.table().begin(), m.table().end()));
}

double entropy(const Dist& d) { return entropy_of(d.probs()); }
double entropy(const Joint2& j) { return entropy_of(j.table()); }
double entropy(const JointN& j) { return entropy_of(j.table()); }

double conditional_entropy(const Joint2& j, Axis given) {
  const double hg = given == Axis::kRows ? entropy(j.row_marginal())
                                         : entropy(j.col_marginal());
  return std::max(entropy(j) - hg, 0.0);
}

double mutual_information(const Joint2& j) {
  const double i = entropy(j.row_marginal()) + entropy(j.col_marginal()) -
                   entropy(j);
  return std::max(i, 0.0);
}

double mi_between(const JointN& j, std::span<const std::size_t> a,
                  std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty axis group");
  }
  return mutual_information(j.flatten(a, b));
}

double conditional_mi(const JointN& j, std::span<const std::size_t> a,
                      std::span<const std::size_t> b,
                      std::span<const std::size_t> given) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty axis group");
  }
  check_disjoint(a, b, j.rank());
  check_disjoint(a, given, j.rank());
  check_disjoint(b, given, j.rank());
  const auto ac = concat(a, given);
  const auto bc = concat(b, given);
  const auto abc = concat(ac, b);
  const double v = marginal_entropy(j, ac) + marginal_entropy(j, bc) -
                   marginal_entropy(j, abc) - marginal_entropy(j, given);
  return std::max(v, 0.0);
}

JointN product_join(std::span<const JointN> parts) {
  return product_join(parts, size_cap());
}

JointN product_join(std::span<const JointN> parts, std::size_t cap) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "no parts");
  std::vector<std::size_t> axes;
  std::size_t total = 1;
  for (const auto& p : parts) {
    axes.insert(axes.end(), p.axes().begin(), p.axes().end());
    total *= p.table().size();
    if (total > cap) {
      throw Error(ErrorCode::kSizeCap, "product tensor exceeds size cap");
    }
  }
  std::vector<double> table{1.0};
  for (const auto& p : parts) {
    std::vector<double> next;
    next.reserve(table.size() * p.table().size());
    for (double a : table) {
      for (double b : p.table()) next.push_back(a * b);
    }
    table = std::move(next);
  }
  return JointN(std::move(axes), std::move(table));
}

}  // namespace privbound
