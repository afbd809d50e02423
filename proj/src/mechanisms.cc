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

#include "privbound/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "privbound/errors.h"

namespace privbound {
namespace {

constexpr double kRenormalizeSlack = 1e-14;

std::vector<std::size_t> x_sizes(const Problem& p) {
  std::vector<std::size_t> s;
  for (const auto& c : p.components) s.push_back(c.x_size());
  return s;
}

std::vector<std::size_t> y_sizes(const Problem& p) {
  std::vector<std::size_t> s;
  for (const auto& c : p.components) s.push_back(c.y_size());
  return s;
}

// Mixed-radix digits of `flat`, first size most significant.
void decode(std::size_t flat, std::span<const std::size_t> sizes,
            std::vector<std::size_t>& digits) {
  digits.resize(sizes.size());
  for (std::size_t k = sizes.size(); k-- > 0;) {
    digits[k] = flat % sizes[k];
    flat /= sizes[k];
  }
}

void check_size(double n, const char* what) {
  if (n > static_cast<double>(size_cap())) {
    throw Error(ErrorCode::kSizeCap, std::string(what) + " exceeds size cap");
  }
}

std::vector<std::size_t> iota_axes(std::size_t from, std::size_t count) {
  std::vector<std::size_t> a(count);
  for (std::size_t k = 0; k < count; ++k) a[k] = from + k;
  return a;
}

// (x, y, u) joint of one component under kernel k.
JointN component_joint(const Joint2& j, const Kernel& k) {
  std::vector<double> t(j.rows() * j.cols() * k.u_size());
  for (std::size_t x = 0; x < j.rows(); ++x) {
    for (std::size_t y = 0; y < j.cols(); ++y) {
      const auto col = k.column(x, y);
      for (std::size_t u = 0; u < k.u_size(); ++u) {
        t[(x * j.cols() + y) * k.u_size() + u] = j(x, y) * col[u];
      }
    }
  }
  return JointN({j.rows(), j.cols(), k.u_size()}, std::move(t));
}

std::size_t nearest_cut(const std::vector<double>& cuts, double v) {
  auto it = std::lower_bound(cuts.begin(), cuts.end(), v);
  if (it == cuts.end()) return cuts.size() - 1;
  std::size_t k = static_cast<std::size_t>(it - cuts.begin());
  if (k > 0 && v - cuts[k - 1] < cuts[k] - v) --k;
  return k;
}

}  // namespace

Kernel::Kernel(std::size_t x_size, std::size_t y_size, std::size_t u_size,
               std::vector<double> table)
    : x_size_(x_size), y_size_(y_size), u_size_(u_size), table_(std::move(table)) {
  if (x_size == 0 || y_size == 0 || u_size == 0 ||
      table_.size() != x_size * y_size * u_size) {
    throw Error(ErrorCode::kInvalidArgument, "kernel shape mismatch");
  }
  for (std::size_t s = 0; s < x_size * y_size; ++s) {
    double sum = 0.0;
    for (std::size_t u = 0; u < u_size; ++u) {
      double& v = table_[s * u_size + u];
      if (!std::isfinite(v) || v < -1e-12) {
        throw Error(ErrorCode::kInvalidArgument, "kernel entry is not a probability");
      }
      v = std::max(v, 0.0);
      sum += v;
    }
    if (std::abs(sum - 1.0) > kKernelTolerance) {
      std::ostringstream msg;
      msg << "kernel slice " << s << " sums to " << sum;
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
    // Slices already within rounding of 1 are kept as is so that a
    // serialized kernel reloads bit for bit.
    if (std::abs(sum - 1.0) > kRenormalizeSlack) {
      for (std::size_t u = 0; u < u_size; ++u) table_[s * u_size + u] /= sum;
    }
  }
}

Kernel frl_kernel(const Joint2& j) {
  const std::size_t nx = j.rows();
  const std::size_t ny = j.cols();
  std::vector<double> px(nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) px[x] += j(x, y);
  }

  // cum[x][y] is the left end of piece (x, y); cum[x][ny] = 1.
  std::vector<std::vector<double>> cum(nx, std::vector<double>(ny + 1, 0.0));
  std::vector<double> points{0.0, 1.0};
  for (std::size_t x = 0; x < nx; ++x) {
    if (px[x] < kZeroProb) continue;
    double acc = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      cum[x][y] = std::min(acc, 1.0);
      acc += j(x, y) / px[x];
      if (y + 1 < ny) points.push_back(std::min(acc, 1.0));
    }
    cum[x][ny] = 1.0;
  }
  std::sort(points.begin(), points.end());
  std::vector<double> cuts{0.0};
  for (double v : points) {
    if (v - cuts.back() > kEndpointMerge) cuts.push_back(v);
  }
  if (1.0 - cuts.back() <= kEndpointMerge && cuts.size() > 1) {
    cuts.back() = 1.0;
  } else if (cuts.back() != 1.0) {
    cuts.push_back(1.0);
  }
  const std::size_t cells = cuts.size() - 1;

  std::vector<double> t(nx * ny * cells, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      double* col = &t[(x * ny + y) * cells];
      if (px[x] < kZeroProb) {
        col[0] = 1.0;
        continue;
      }
      const std::size_t a = nearest_cut(cuts, cum[x][y]);
      const std::size_t b = nearest_cut(cuts, cum[x][y + 1]);
      if (b <= a) {
        // Zero-length piece: the slice is never reached.
        col[std::min(a, cells - 1)] = 1.0;
        continue;
      }
      const double len = cuts[b] - cuts[a];
      for (std::size_t u = a; u < b; ++u) col[u] = (cuts[u + 1] - cuts[u]) / len;
    }
  }
  return Kernel(nx, ny, cells, std::move(t));
}

Kernel frl_construct(const Component& c) { return frl_kernel(c.joint); }

Kernel efrl_construct(const Component& c, double eps_i) {
  const Joint2& j = c.joint;
  const double hx = entropy(j.row_marginal());
  const double ixy = mutual_information(j);
  if (!std::isfinite(eps_i) || eps_i < 0) {
    throw Error(ErrorCode::kInvalidArgument, "eps_i must be >= 0");
  }
  if (eps_i > 0 && hx <= kZeroProb) {
    throw Error(ErrorCode::kInvalidArgument,
                "positive eps_i on a component with constant X");
  }
  if (eps_i > 0 && eps_i >= ixy) {
    throw Error(ErrorCode::kInvalidArgument, "eps_i must be below I(X;Y)");
  }
  const double alpha = eps_i > 0 ? eps_i / hx : 0.0;
  const Kernel base = frl_kernel(j);
  const std::size_t nx = j.rows();
  const std::size_t ny = j.cols();
  const std::size_t nw = nx + 1;  // symbol nx is the "nothing released" marker
  const std::size_t nu = base.u_size() * nw;
  std::vector<double> t(nx * ny * nu, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      double* col = &t[(x * ny + y) * nu];
      for (std::size_t v = 0; v < base.u_size(); ++v) {
        const double q = base(x, y, v);
        col[v * nw + x] += alpha * q;
        col[v * nw + nx] += (1.0 - alpha) * q;
      }
    }
  }
  return Kernel(nx, ny, nu, std::move(t));
}

Kernel identity_kernel(std::size_t x_size, std::size_t y_size) {
  std::vector<double> t(x_size * y_size * y_size, 0.0);
  for (std::size_t x = 0; x < x_size; ++x) {
    for (std::size_t y = 0; y < y_size; ++y) t[(x * y_size + y) * y_size + y] = 1.0;
  }
  return Kernel(x_size, y_size, y_size, std::move(t));
}

Kernel constant_kernel(std::size_t x_size, std::size_t y_size) {
  return Kernel(x_size, y_size, 1, std::vector<double>(x_size * y_size, 1.0));
}

std::string_view construction_name(Construction c) {
  switch (c) {
    case Construction::kFrl: return "frl";
    case Construction::kEfrl: return "efrl";
    case Construction::kIdentity: return "identity";
    case Construction::kConstant: return "constant";
    case Construction::kTransformed: return "transformed";
  }
  return "frl";
}

Construction construction_from_name(std::string_view name) {
  for (Construction c : {Construction::kFrl, Construction::kEfrl,
                         Construction::kIdentity, Construction::kConstant,
                         Construction::kTransformed}) {
    if (construction_name(c) == name) return c;
  }
  throw Error(ErrorCode::kSchema, "unknown construction tag '" + std::string(name) + "'");
}

ComposedMechanism compose_multiuser(const Problem& p, const Allocation& alloc) {
  if (alloc.eps_per_component.size() != p.components.size()) {
    throw Error(ErrorCode::kAlphabetMismatch,
                "allocation length does not match the component count");
  }
  ComposedMechanism m;
  m.allocation = alloc;
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const double e = alloc.eps_per_component[i];
    if (e < 0) throw Error(ErrorCode::kInvalidArgument, "negative allocation");
    if (e > 0) {
      m.parts.push_back({Construction::kEfrl, e, efrl_construct(p.components[i], e)});
    } else {
      m.parts.push_back({Construction::kFrl, 0.0, frl_construct(p.components[i])});
    }
  }
  return m;
}

std::size_t joint_x_size(const Problem& p) {
  std::size_t n = 1;
  for (const auto& c : p.components) n *= c.x_size();
  return n;
}

std::size_t joint_y_size(const Problem& p) {
  std::size_t n = 1;
  for (const auto& c : p.components) n *= c.y_size();
  return n;
}

std::vector<double> source_law(const Problem& p) {
  const auto xs = x_sizes(p);
  const auto ys = y_sizes(p);
  const std::size_t nx = joint_x_size(p);
  const std::size_t ny = joint_y_size(p);
  check_size(static_cast<double>(nx) * static_cast<double>(ny), "source law");
  std::vector<double> law(nx * ny);
  std::vector<std::size_t> xd, yd;
  for (std::size_t x = 0; x < nx; ++x) {
    decode(x, xs, xd);
    for (std::size_t y = 0; y < ny; ++y) {
      decode(y, ys, yd);
      double v = 1.0;
      for (std::size_t i = 0; i < xs.size(); ++i) v *= p.components[i].joint(xd[i], yd[i]);
      law[x * ny + y] = v;
    }
  }
  return law;
}

void check_alphabets(const Problem& p, const Kernel& m) {
  if (m.x_size() != joint_x_size(p) || m.y_size() != joint_y_size(p)) {
    throw Error(ErrorCode::kAlphabetMismatch,
                "kernel alphabets do not match the problem");
  }
}

void check_alphabets(const Problem& p, const ComposedMechanism& m) {
  if (m.parts.size() != p.components.size()) {
    throw Error(ErrorCode::kAlphabetMismatch,
                "mechanism has a different number of components");
  }
  for (std::size_t i = 0; i < m.parts.size(); ++i) {
    const auto& k = m.parts[i].kernel;
    if (k.x_size() != p.components[i].x_size() ||
        k.y_size() != p.components[i].y_size()) {
      throw Error(ErrorCode::kAlphabetMismatch,
                  "component " + std::to_string(i) + " alphabets do not match");
    }
  }
}

JointN full_joint(const Problem& p, const Kernel& m) {
  check_alphabets(p, m);
  const std::size_t nx = m.x_size();
  const std::size_t ny = m.y_size();
  const std::size_t nu = m.u_size();
  check_size(static_cast<double>(nx) * ny * nu, "full joint");
  const auto law = source_law(p);
  std::vector<double> t(nx * ny * nu);
  for (std::size_t s = 0; s < nx * ny; ++s) {
    const auto col = m.column(s / ny, s % ny);
    for (std::size_t u = 0; u < nu; ++u) t[s * nu + u] = law[s] * col[u];
  }
  std::vector<std::size_t> axes = x_sizes(p);
  const auto ys = y_sizes(p);
  axes.insert(axes.end(), ys.begin(), ys.end());
  axes.push_back(nu);
  return JointN(std::move(axes), std::move(t));
}

Kernel materialize(const Problem& p, const ComposedMechanism& m) {
  check_alphabets(p, m);
  const auto xs = x_sizes(p);
  const auto ys = y_sizes(p);
  std::vector<std::size_t> us;
  double nu_d = 1.0;
  for (const auto& part : m.parts) {
    us.push_back(part.kernel.u_size());
    nu_d *= static_cast<double>(part.kernel.u_size());
  }
  const std::size_t nx = joint_x_size(p);
  const std::size_t ny = joint_y_size(p);
  check_size(nu_d * static_cast<double>(nx * ny), "materialized kernel");
  const std::size_t nu = static_cast<std::size_t>(nu_d);
  std::vector<double> t(nx * ny * nu);
  std::vector<std::size_t> xd, yd, ud;
  for (std::size_t x = 0; x < nx; ++x) {
    decode(x, xs, xd);
    for (std::size_t y = 0; y < ny; ++y) {
      decode(y, ys, yd);
      for (std::size_t u = 0; u < nu; ++u) {
        decode(u, us, ud);
        double v = 1.0;
        for (std::size_t i = 0; i < m.parts.size() && v > 0; ++i) {
          v *= m.parts[i].kernel(xd[i], yd[i], ud[i]);
        }
        t[(x * ny + y) * nu + u] = v;
      }
    }
  }
  return Kernel(nx, ny, nu, std::move(t));
}

MechanismReport evaluate(const Problem& p, const ComposedMechanism& m) {
  check_alphabets(p, m);
  MechanismReport r;
  r.cardinality = 1.0;
  std::vector<double> uy;
  for (std::size_t i = 0; i < m.parts.size(); ++i) {
    const JointN j = component_joint(p.components[i].joint, m.parts[i].kernel);
    const std::size_t ax[] = {0}, ay[] = {1}, au[] = {2};
    const std::size_t axu[] = {0, 2};
    const double leak = mi_between(j, ax, au);
    const double util = mi_between(j, ay, au);
    r.component_leakage.push_back(leak);
    r.component_utility.push_back(util);
    r.leakage += leak;
    r.residual_y_given_xu += std::max(entropy(j) - entropy(j.marginal(axu)), 0.0);
    r.cardinality *= static_cast<double>(m.parts[i].kernel.u_size());
  }
  for (const auto& user : p.users) {
    double v = 0.0;
    for (std::size_t i : user.demands) v += r.component_utility[i];
    r.utilities.push_back(v);
    r.objective += user.weight * v;
  }
  return r;
}

MechanismReport evaluate(const Problem& p, const Kernel& m) {
  const JointN j = full_joint(p, m);
  const std::size_t n = p.components.size();
  const auto xa = iota_axes(0, n);
  const std::size_t ua[] = {2 * n};
  MechanismReport r;
  r.cardinality = static_cast<double>(m.u_size());
  r.leakage = mi_between(j, xa, ua);
  auto xu = xa;
  xu.push_back(2 * n);
  r.residual_y_given_xu = std::max(entropy(j) - entropy(j.marginal(xu)), 0.0);
  for (const auto& user : p.users) {
    std::vector<std::size_t> ca;
    for (std::size_t i : user.demands) ca.push_back(n + i);
    const double v = mi_between(j, ca, ua);
    r.utilities.push_back(v);
    r.objective += user.weight * v;
  }
  return r;
}

Decomposition decompose_transform(const Problem& p, const Kernel& m) {
  const JointN j = full_joint(p, m);
  const std::size_t n = p.components.size();
  const std::size_t u_axis = 2 * n;
  Decomposition d;

  // P(ubar_i | x_i) from the marginal over (X_i, X_1..X_{i-1}, U).
  double total = static_cast<double>(j.table().size());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> keep{i};
    for (std::size_t k = 0; k < i; ++k) keep.push_back(k);
    keep.push_back(u_axis);
    const JointN mg = j.marginal(keep);
    const std::size_t rows = p.components[i].x_size();
    const std::size_t cols = mg.table().size() / rows;
    Channel ch{rows, cols, std::vector<double>(rows * cols, 0.0)};
    for (std::size_t x = 0; x < rows; ++x) {
      double px = 0.0;
      for (std::size_t c = 0; c < cols; ++c) px += mg.table()[x * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        ch.table[x * cols + c] = px > 0 ? mg.table()[x * cols + c] / px
                                        : (c == 0 ? 1.0 : 0.0);
      }
    }
    total *= static_cast<double>(cols);
    d.ubar.push_back(std::move(ch));
  }
  check_size(total, "decomposition joint");

  // Joint over (X, Y, U, Ubar_1..Ubar_N).
  std::vector<std::size_t> ub_sizes;
  std::size_t ub_total = 1;
  for (const auto& ch : d.ubar) {
    ub_sizes.push_back(ch.cols);
    ub_total *= ch.cols;
  }
  std::vector<std::size_t> x_axes_sizes(j.axes().begin(), j.axes().begin() + n);
  std::vector<double> t;
  t.reserve(j.table().size() * ub_total);
  const std::size_t xyu_inner = j.table().size() / joint_x_size(p);
  std::vector<std::size_t> xd, bd;
  for (std::size_t s = 0; s < j.table().size(); ++s) {
    decode(s / xyu_inner, x_axes_sizes, xd);
    const double base = j.table()[s];
    for (std::size_t b = 0; b < ub_total; ++b) {
      if (base == 0.0) {
        t.push_back(0.0);
        continue;
      }
      decode(b, ub_sizes, bd);
      double v = base;
      for (std::size_t i = 0; i < n && v > 0; ++i) v *= d.ubar[i](xd[i], bd[i]);
      t.push_back(v);
    }
  }
  std::vector<std::size_t> axes = j.axes();
  axes.insert(axes.end(), ub_sizes.begin(), ub_sizes.end());
  const JointN big(std::move(axes), std::move(t));

  const auto xa = iota_axes(0, n);
  const auto ya = iota_axes(n, n);
  const auto ba = iota_axes(2 * n + 1, n);
  const std::size_t ua[] = {u_axis};
  d.leakage_u = mi_between(big, xa, ua);
  d.leakage_ubar = mi_between(big, xa, ba);
  auto yu = ya;
  yu.push_back(u_axis);
  d.markov_residual = conditional_mi(big, ba, yu, xa);

  double sum_parts = 0.0;
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::size_t> g{2 * n + 1 + i, n + i, i};
    sum_parts += entropy(big.marginal(g));
    all.insert(all.end(), g.begin(), g.end());
  }
  d.independence_residual = std::max(sum_parts - entropy(big.marginal(all)), 0.0);
  return d;
}

TransformCheck theorem1_transform(const Problem& p, const Kernel& m) {
  const ProblemStats stats = validate(p);
  TransformCheck out;
  out.decomposition = decompose_transform(p, m);
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const Joint2& src = p.components[i].joint;
    const Channel& ch = out.decomposition.ubar[i];
    const std::size_t nx = src.rows();
    const std::size_t ny = src.cols();
    const std::size_t nb = ch.cols;
    // Augmented pair ((ubar, x), y), row index ubar * |X_i| + x.
    std::vector<double> aug(nb * nx * ny);
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t x = 0; x < nx; ++x) {
        for (std::size_t y = 0; y < ny; ++y) {
          aug[(b * nx + x) * ny + y] = src(x, y) * ch(x, b);
        }
      }
    }
    const Kernel tilde = frl_kernel(Joint2(nb * nx, ny, std::move(aug)));
    const std::size_t nt = tilde.u_size();
    std::vector<double> t(nx * ny * nt * nb, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        double* col = &t[(x * ny + y) * nt * nb];
        for (std::size_t b = 0; b < nb; ++b) {
          const double pb = ch(x, b);
          if (pb == 0.0) continue;
          for (std::size_t v = 0; v < nt; ++v) {
            col[v * nb + b] = pb * tilde(b * nx + x, y, v);
          }
        }
      }
    }
    out.ustar.parts.push_back(
        {Construction::kTransformed, 0.0, Kernel(nx, ny, nt * nb, std::move(t))});
  }

  const MechanismReport before = evaluate(p, m);
  const MechanismReport after = evaluate(p, out.ustar);
  out.leakage_u = before.leakage;
  out.leakage_ustar = after.leakage;
  out.utility_u = before.utilities;
  out.utility_ustar = after.utilities;
  out.leakage_preserved = std::abs(out.leakage_u - out.leakage_ustar) <= 1e-9;
  out.utility_bounded = true;
  for (std::size_t jdx = 0; jdx < p.users.size(); ++jdx) {
    double s = 0.0;
    for (std::size_t i : p.users[jdx].demands) s += stats.components[i].s1;
    out.slack.push_back(s);
    out.utility_bounded = out.utility_bounded &&
                          out.utility_u[jdx] <= out.utility_ustar[jdx] + s + 1e-9;
  }
  return out;
}

}  // namespace privbound
