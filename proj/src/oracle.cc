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

#include "privbound/oracle.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "privbound/errors.h"

namespace privbound {
namespace {

double phi(double a) { return a > 0 ? a * std::log(a) : 0.0; }

// Uniform double in [0, 1) from the top 53 bits.
double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform(rng) * static_cast<double>(n)) % n;
}

std::vector<double> dirichlet_one(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  double s = 0;
  for (auto& e : v) {
    e = -std::log1p(-uniform(rng));
    s += e;
  }
  for (auto& e : v) e /= s;
  return v;
}

// Flattened problem data shared by all restarts.
struct Instance {
  std::size_t nx = 0, ny = 0;
  std::vector<double> law;  // P(x, y) at x * ny + y
  std::vector<double> px;
  double phi_x = 0;  // sum_x phi(P(x))
  struct UserView {
    double weight = 0;
    std::size_t nc = 1;
    std::vector<std::size_t> c_of_y;
    double phi_c = 0;
    std::vector<double> pc;
  };
  std::vector<UserView> users;
  std::vector<std::size_t> columns;  // (x, y) with P(x, y) > 0
};

Instance make_instance(const Problem& p) {
  Instance in;
  in.nx = joint_x_size(p);
  in.ny = joint_y_size(p);
  in.law = source_law(p);
  in.px.assign(in.nx, 0.0);
  for (std::size_t s = 0; s < in.law.size(); ++s) {
    in.px[s / in.ny] += in.law[s];
    if (in.law[s] > 0) in.columns.push_back(s);
  }
  for (double v : in.px) in.phi_x += phi(v);

  std::vector<std::size_t> ys;
  for (const auto& c : p.components) ys.push_back(c.y_size());
  for (const auto& u : p.users) {
    Instance::UserView v;
    v.weight = u.weight;
    v.c_of_y.assign(in.ny, 0);
    std::vector<std::size_t> demands = u.demands;
    std::sort(demands.begin(), demands.end());
    for (std::size_t i : demands) v.nc *= ys[i];
    std::vector<std::size_t> digits(ys.size());
    for (std::size_t y = 0; y < in.ny; ++y) {
      std::size_t rest = y;
      for (std::size_t k = ys.size(); k-- > 0;) {
        digits[k] = rest % ys[k];
        rest /= ys[k];
      }
      std::size_t c = 0;
      for (std::size_t i : demands) c = c * ys[i] + digits[i];
      v.c_of_y[y] = c;
    }
    std::vector<double> pc(v.nc, 0.0);
    for (std::size_t s = 0; s < in.law.size(); ++s) pc[v.c_of_y[s % in.ny]] += in.law[s];
    for (double q : pc) v.phi_c += phi(q);
    v.pc = std::move(pc);
    in.users.push_back(std::move(v));
  }
  return in;
}

// Mass m moved from symbol `from` to `to` in column `col` (joint units).
struct Transfer {
  std::size_t col;
  std::size_t from, to;
  double mass;
};

class State {
 public:
  State(const Instance& in, std::vector<double> kernel, std::size_t nu)
      : in_(in), nu_(nu), k_(std::move(kernel)) {
    rebuild();
  }

  void rebuild() {
    a_.assign(in_.nx * nu_, 0.0);
    pu_.assign(nu_, 0.0);
    b_.assign(in_.users.size(), {});
    for (std::size_t j = 0; j < in_.users.size(); ++j) {
      b_[j].assign(in_.users[j].nc * nu_, 0.0);
    }
    for (std::size_t s : in_.columns) {
      const std::size_t x = s / in_.ny, y = s % in_.ny;
      for (std::size_t u = 0; u < nu_; ++u) {
        const double m = in_.law[s] * k_[s * nu_ + u];
        a_[x * nu_ + u] += m;
        pu_[u] += m;
        for (std::size_t j = 0; j < in_.users.size(); ++j) {
          b_[j][in_.users[j].c_of_y[y] * nu_ + u] += m;
        }
      }
    }
    sa_ = 0;
    for (double v : a_) sa_ += phi(v);
    su_ = 0;
    for (double v : pu_) su_ += phi(v);
    sb_.assign(in_.users.size(), 0.0);
    for (std::size_t j = 0; j < in_.users.size(); ++j) {
      for (double v : b_[j]) sb_[j] += phi(v);
    }
  }

  double leakage() const { return std::max(sa_ - in_.phi_x - su_, 0.0); }
  double objective() const {
    double o = 0;
    for (std::size_t j = 0; j < in_.users.size(); ++j) {
      o += in_.users[j].weight * (sb_[j] - in_.users[j].phi_c - su_);
    }
    return o;
  }

  std::size_t nu() const { return nu_; }
  double k(std::size_t col, std::size_t u) const { return k_[col * nu_ + u]; }
  const std::vector<double>& kernel() const { return k_; }
  double a(std::size_t x, std::size_t u) const { return a_[x * nu_ + u]; }
  double a_total(std::size_t u) const { return pu_[u]; }
  std::size_t dense_cells() const {
    std::size_t n = in_.nx;
    for (const auto& u : in_.users) n += u.nc;
    return n * nu_;
  }
  double joint(std::size_t col, std::size_t u) const {
    return in_.law[col] * k_[col * nu_ + u];
  }

  // Collapses the transfers into per-cell deltas of A, B_j and P(U).
  void prepare(const std::vector<Transfer>& moves) {
    cells_.clear();
    for (const auto& t : moves) {
      const std::size_t x = t.col / in_.ny, y = t.col % in_.ny;
      add_cell(0, x * nu_ + t.from, -t.mass);
      add_cell(0, x * nu_ + t.to, t.mass);
      add_cell(1, t.from, -t.mass);
      add_cell(1, t.to, t.mass);
      for (std::size_t j = 0; j < in_.users.size(); ++j) {
        const std::size_t c = in_.users[j].c_of_y[y];
        add_cell(2 + j, c * nu_ + t.from, -t.mass);
        add_cell(2 + j, c * nu_ + t.to, t.mass);
      }
    }
    std::sort(cells_.begin(), cells_.end(), [](const Cell& l, const Cell& r) {
      return l.kind != r.kind ? l.kind < r.kind : l.index < r.index;
    });
    std::size_t w = 0;
    for (std::size_t r = 0; r < cells_.size(); ++r) {
      if (w > 0 && cells_[w - 1].kind == cells_[r].kind &&
          cells_[w - 1].index == cells_[r].index) {
        cells_[w - 1].delta += cells_[r].delta;
      } else {
        cells_[w++] = cells_[r];
      }
    }
    cells_.resize(w);
  }

  // Leakage and objective after scaling the prepared move by t.
  std::pair<double, double> probe(double t) const {
    double da = 0, du = 0;
    db_.assign(in_.users.size(), 0.0);
    for (const auto& c : cells_) {
      const double v = value(c.kind, c.index);
      const double d = phi(std::max(v + t * c.delta, 0.0)) - phi(v);
      if (c.kind == 0) {
        da += d;
      } else if (c.kind == 1) {
        du += d;
      } else {
        db_[c.kind - 2] += d;
      }
    }
    const double leak = sa_ + da - in_.phi_x - su_ - du;
    double obj = 0;
    for (std::size_t j = 0; j < in_.users.size(); ++j) {
      obj += in_.users[j].weight * (sb_[j] + db_[j] - in_.users[j].phi_c - su_ - du);
    }
    return {leak, obj};
  }

  // The prepared move at t = 1 followed by mixing with weight s toward an
  // independent draw from the resulting P(U). Returns leakage and objective
  // as functions of s.
  void prepare_mix() {
    a2_ = a_;
    pu2_ = pu_;
    b2_ = b_;
    for (const auto& c : cells_) {
      double& v = c.kind == 0 ? a2_[c.index]
                  : c.kind == 1 ? pu2_[c.index]
                                : b2_[c.kind - 2][c.index];
      v = std::max(v + c.delta, 0.0);
    }
    su2_ = 0;
    for (double v : pu2_) su2_ += phi(v);
  }

  std::pair<double, double> probe_mix(double s) const {
    double sa = 0;
    for (std::size_t x = 0; x < in_.nx; ++x) {
      for (std::size_t u = 0; u < nu_; ++u) {
        sa += phi((1 - s) * a2_[x * nu_ + u] + s * in_.px[x] * pu2_[u]);
      }
    }
    double obj = 0;
    for (std::size_t j = 0; j < in_.users.size(); ++j) {
      const auto& uv = in_.users[j];
      double sb = 0;
      for (std::size_t c = 0; c < uv.nc; ++c) {
        for (std::size_t u = 0; u < nu_; ++u) {
          sb += phi((1 - s) * b2_[j][c * nu_ + u] + s * uv.pc[c] * pu2_[u]);
        }
      }
      obj += uv.weight * (sb - uv.phi_c - su2_);
    }
    return {sa - in_.phi_x - su2_, obj};
  }

  void apply_mix(const std::vector<Transfer>& moves, double s) {
    for (const auto& m : moves) {
      const double dk = m.mass / in_.law[m.col];
      k_[m.col * nu_ + m.from] = std::max(k_[m.col * nu_ + m.from] - dk, 0.0);
      k_[m.col * nu_ + m.to] += dk;
    }
    for (std::size_t col = 0; col < in_.nx * in_.ny; ++col) {
      double sum = 0;
      for (std::size_t u = 0; u < nu_; ++u) {
        double& v = k_[col * nu_ + u];
        v = (1 - s) * v + s * pu2_[u];
        sum += v;
      }
      for (std::size_t u = 0; u < nu_; ++u) k_[col * nu_ + u] /= sum;
    }
    rebuild();
  }

  void apply(const std::vector<Transfer>& moves, double t) {
    for (const auto& c : cells_) {
      double& v = ref(c.kind, c.index);
      const double nv = std::max(v + t * c.delta, 0.0);
      const double d = phi(nv) - phi(v);
      v = nv;
      if (c.kind == 0) {
        sa_ += d;
      } else if (c.kind == 1) {
        su_ += d;
      } else {
        sb_[c.kind - 2] += d;
      }
    }
    for (const auto& m : moves) {
      const double dk = t * m.mass / in_.law[m.col];
      double& from = k_[m.col * nu_ + m.from];
      double& to = k_[m.col * nu_ + m.to];
      from -= dk;
      to += dk;
      if (from < 1e-14) {
        to += std::max(from, 0.0);
        from = 0.0;
      }
    }
  }

 private:
  struct Cell {
    std::size_t kind;  // 0: A, 1: P(U), 2 + j: B_j
    std::size_t index;
    double delta;
  };

  void add_cell(std::size_t kind, std::size_t index, double delta) {
    cells_.push_back({kind, index, delta});
  }
  double value(std::size_t kind, std::size_t index) const {
    return kind == 0 ? a_[index] : kind == 1 ? pu_[index] : b_[kind - 2][index];
  }
  double& ref(std::size_t kind, std::size_t index) {
    return kind == 0 ? a_[index] : kind == 1 ? pu_[index] : b_[kind - 2][index];
  }

  const Instance& in_;
  std::size_t nu_;
  std::vector<double> k_;
  std::vector<double> a_, pu_;
  std::vector<std::vector<double>> b_;
  double sa_ = 0, su_ = 0;
  std::vector<double> sb_;
  std::vector<Cell> cells_;
  mutable std::vector<double> db_;
  std::vector<double> a2_, pu2_;
  std::vector<std::vector<double>> b2_;
  double su2_ = 0;
};

// Repair probes touch every (x, u) and (c, u) cell; skip them beyond this.
inline constexpr std::size_t kRepairMaxCells = 1024;

// Objective and leakage are both convex along any line in kernel space, so
// the best feasible point of a move is its far end or, when that leaks too
// much, the point where the line crosses the constraint.
bool try_move(State& st, const std::vector<Transfer>& moves, double eps) {
  if (moves.empty()) return false;
  st.prepare(moves);
  const double obj0 = st.objective();
  const double gain = 1e-13;
  auto [leak_full, obj_full] = st.probe(1.0);
  if (obj_full <= obj0 + gain) return false;
  const double limit = eps + kSearchFeasibility;
  if (leak_full <= limit) {
    st.apply(moves, 1.0);
    return true;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (st.probe(mid).first <= limit) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double line_obj = lo > 0.0 ? st.probe(lo).second : obj0;

  // Repair instead: take the whole move, then blend toward independence.
  // Each probe touches every (x, u) cell, so large alphabets skip it.
  if (st.dense_cells() > kRepairMaxCells) {
    if (lo <= 0.0 || line_obj <= obj0 + gain) return false;
    st.apply(moves, lo);
    return true;
  }
  st.prepare_mix();
  double s_lo = 0.0, s_hi = 1.0;
  for (int it = 0; it < 60 && s_hi - s_lo > 1e-13; ++it) {
    const double mid = 0.5 * (s_lo + s_hi);
    if (st.probe_mix(mid).first <= limit) {
      s_hi = mid;
    } else {
      s_lo = mid;
    }
  }
  const double mix_obj = st.probe_mix(s_hi).second;
  if (mix_obj > line_obj && mix_obj > obj0 + gain) {
    st.apply_mix(moves, s_hi);
    return true;
  }
  if (lo <= 0.0 || line_obj <= obj0 + gain) return false;
  st.apply(moves, lo);
  return true;
}

struct Restart {
  double objective = -1;
  Kernel kernel;
  double leakage = 0;
};

class Searcher {
 public:
  Searcher(const Problem& p, const Instance& in, const OracleConfig& cfg)
      : p_(p), in_(in), cfg_(cfg) {}

  Restart run(Kernel start, std::size_t sweeps, std::mt19937_64& rng) const {
    const std::size_t nu = start.u_size();
    std::vector<double> k(start.table().begin(), start.table().end());
    State st(in_, std::move(k), nu);
    double prev = st.objective();
    int quiet = 0;
    std::vector<std::size_t> order = in_.columns;
    std::vector<Transfer> mv;
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[pick(rng, i)]);
      }
      for (std::size_t col : order) column_moves(st, col, rng, mv);
      coordinated_moves(st, rng, mv);
      st.rebuild();
      if (st.leakage() > p_.epsilon + kSearchFeasibility) break;
      const double now = st.objective();
      quiet = now - prev < cfg_.tolerance ? quiet + 1 : 0;
      prev = now;
      if (quiet >= 2) break;
    }
    Restart r;
    r.kernel = Kernel(in_.nx, in_.ny, nu, st.kernel());
    if (evaluate(p_, r.kernel).leakage > p_.epsilon + kFeasibilityTolerance) {
      r.kernel = leakage_project(r.kernel, p_, p_.epsilon);
    }
    const MechanismReport rep = evaluate(p_, r.kernel);
    r.objective = rep.objective;
    r.leakage = rep.leakage;
    return r;
  }

 private:
  std::vector<std::size_t> candidates(std::size_t nu, std::size_t skip,
                                      std::mt19937_64& rng) const {
    std::vector<std::size_t> c;
    if (nu <= 24) {
      for (std::size_t u = 0; u < nu; ++u) {
        if (u != skip) c.push_back(u);
      }
    } else {
      for (int k = 0; k < 16; ++k) {
        const std::size_t u = pick(rng, nu);
        if (u != skip) c.push_back(u);
      }
    }
    return c;
  }

  std::size_t support_pick(const State& st, std::size_t col,
                           std::mt19937_64& rng) const {
    const std::size_t nu = st.nu();
    std::size_t count = 0;
    for (std::size_t u = 0; u < nu; ++u) count += st.k(col, u) > 0;
    std::size_t target = pick(rng, std::max<std::size_t>(count, 1));
    for (std::size_t u = 0; u < nu; ++u) {
      if (st.k(col, u) > 0 && target-- == 0) return u;
    }
    return 0;
  }

  void column_moves(State& st, std::size_t col, std::mt19937_64& rng,
                    std::vector<Transfer>& mv) const {
    const double eps = p_.epsilon;
    const std::size_t nu = st.nu();
    const std::size_t u1 = support_pick(st, col, rng);
    for (std::size_t u2 : candidates(nu, u1, rng)) {
      const double m = st.joint(col, u1);
      if (m <= 0) break;
      mv.assign(1, {col, u1, u2, m});
      try_move(st, mv, eps);
    }
    // Exchange with another y of the same x; keeps P(x, u) fixed.
    const std::size_t x = col / in_.ny;
    const std::size_t y2 = pick(rng, in_.ny);
    const std::size_t col2 = x * in_.ny + y2;
    if (col2 == col || in_.law[col2] <= 0) return;
    const std::size_t v1 = support_pick(st, col, rng);
    const std::size_t v2 = support_pick(st, col2, rng);
    if (v1 == v2) return;
    const double m = std::min(st.joint(col, v1), st.joint(col2, v2));
    if (m <= 0) return;
    mv = {{col, v1, v2, m}, {col2, v2, v1, m}};
    try_move(st, mv, eps);
  }

  // Shifts the same share of P(x) from u1 to u2 for every x, taking it from
  // one chosen y per x or from all y in proportion; preserves independence
  // of X and U when it already holds. Small instances enumerate every
  // choice of y per x, larger ones sample.
  void coordinated_moves(State& st, std::mt19937_64& rng,
                         std::vector<Transfer>& mv) const {
    const std::size_t nu = st.nu();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t u1 = 0; u1 < nu; ++u1) {
      for (std::size_t u2 = 0; u2 < nu; ++u2) {
        if (u1 != u2 && st.a_total(u1) > 0) pairs.emplace_back(u1, u2);
      }
    }
    if (pairs.size() > kMaxPairs) {
      for (std::size_t i = 0; i < kMaxPairs; ++i) {
        std::swap(pairs[i], pairs[i + pick(rng, pairs.size() - i)]);
      }
      pairs.resize(kMaxPairs);
    }
    std::vector<std::vector<std::size_t>> options(in_.nx);
    std::vector<std::size_t> chosen(in_.nx);
    for (const auto& [u1, u2] : pairs) {
      // Proportional variant.
      double share = 1.0;
      for (std::size_t x = 0; x < in_.nx; ++x) {
        if (in_.px[x] > 0) share = std::min(share, st.a(x, u1) / in_.px[x]);
      }
      if (share > 0) {
        mv.clear();
        for (std::size_t x = 0; x < in_.nx; ++x) {
          const double ax = st.a(x, u1);
          if (in_.px[x] <= 0 || ax <= 0) continue;
          for (std::size_t y = 0; y < in_.ny; ++y) {
            const double m = st.joint(x * in_.ny + y, u1);
            if (m > 0) mv.push_back({x * in_.ny + y, u1, u2, share * in_.px[x] * m / ax});
          }
        }
        try_move(st, mv, p_.epsilon);
      }
      // One y per x.
      double combos = 1.0;
      bool ok = true;
      for (std::size_t x = 0; x < in_.nx; ++x) {
        options[x].clear();
        if (in_.px[x] <= 0) continue;
        for (std::size_t y = 0; y < in_.ny; ++y) {
          if (st.joint(x * in_.ny + y, u1) > 0) options[x].push_back(y);
        }
        if (options[x].empty()) ok = false;
        combos *= static_cast<double>(std::max<std::size_t>(options[x].size(), 1));
      }
      if (!ok) continue;
      const bool enumerate = combos <= static_cast<double>(kMaxCombos);
      const std::size_t count = enumerate ? static_cast<std::size_t>(combos) : kMaxCombos;
      for (std::size_t c = 0; c < count; ++c) {
        std::size_t rest = c;
        double share1 = 1.0;
        for (std::size_t x = 0; x < in_.nx; ++x) {
          if (in_.px[x] <= 0) continue;
          const std::size_t n = options[x].size();
          std::size_t k;
          if (enumerate) {
            k = rest % n;
            rest /= n;
          } else {
            k = pick(rng, n);
          }
          chosen[x] = options[x][k];
          share1 = std::min(share1, st.joint(x * in_.ny + chosen[x], u1) / in_.px[x]);
        }
        if (share1 <= 0) continue;
        mv.clear();
        for (std::size_t x = 0; x < in_.nx; ++x) {
          if (in_.px[x] > 0) mv.push_back({x * in_.ny + chosen[x], u1, u2, share1 * in_.px[x]});
        }
        if (try_move(st, mv, p_.epsilon)) break;  // supports changed
      }
    }
  }

  static constexpr std::size_t kMaxPairs = 64;
  static constexpr std::size_t kMaxCombos = 32;

  const Problem& p_;
  const Instance& in_;
  const OracleConfig& cfg_;
};

Kernel project_toward(const Kernel& m, const Kernel& anchor, const Problem& p,
                      double eps) {
  const double leak = evaluate(p, m).leakage;
  if (leak <= eps) return m;
  const auto mix = [&](double t) {
    std::vector<double> tab(m.table().size());
    for (std::size_t s = 0; s < tab.size(); ++s) {
      tab[s] = (1 - t) * m.table()[s] + t * anchor.table()[s];
    }
    return Kernel(m.x_size(), m.y_size(), m.u_size(), std::move(tab));
  };
  double lo = 0.0, hi = 1.0;
  Kernel best = mix(1.0);
  double best_leak = evaluate(p, best).leakage;
  if (eps <= kFeasibilityTolerance || best_leak >= eps - kFeasibilityTolerance) {
    return best;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    Kernel k = mix(mid);
    const double l = evaluate(p, k).leakage;
    if (l <= eps) {
      hi = mid;
      best = std::move(k);
      best_leak = l;
      if (l >= eps - kFeasibilityTolerance) break;
    } else {
      lo = mid;
    }
  }
  return best;
}

Kernel product_kernel(std::size_t nx, std::size_t ny, const std::vector<double>& q) {
  std::vector<double> t;
  t.reserve(nx * ny * q.size());
  for (std::size_t s = 0; s < nx * ny; ++s) t.insert(t.end(), q.begin(), q.end());
  return Kernel(nx, ny, q.size(), std::move(t));
}

Kernel random_start(const Instance& in, const Problem& p, std::size_t nu,
                    std::size_t index, std::mt19937_64& rng) {
  const auto q = dirichlet_one(rng, nu);
  const Kernel anchor = product_kernel(in.nx, in.ny, q);
  switch (index % 3) {
    case 0:
      return anchor;
    case 1: {
      std::vector<double> t;
      t.reserve(in.nx * in.ny * nu);
      for (std::size_t s = 0; s < in.nx * in.ny; ++s) {
        const auto col = dirichlet_one(rng, nu);
        t.insert(t.end(), col.begin(), col.end());
      }
      return project_toward(Kernel(in.nx, in.ny, nu, std::move(t)), anchor, p,
                            p.epsilon);
    }
    default: {
      std::vector<double> t(in.nx * in.ny * nu, 0.0);
      for (std::size_t s = 0; s < in.nx * in.ny; ++s) t[s * nu + pick(rng, nu)] = 1.0;
      return project_toward(Kernel(in.nx, in.ny, nu, std::move(t)), anchor, p,
                            p.epsilon);
    }
  }
}

// U constant at symbol 0, on m's alphabets.
Kernel constant_kernel_like(const Kernel& m) {
  std::vector<double> t(m.table().size(), 0.0);
  for (std::size_t s = 0; s < m.x_size() * m.y_size(); ++s) t[s * m.u_size()] = 1.0;
  return Kernel(m.x_size(), m.y_size(), m.u_size(), std::move(t));
}

void check_kernel_size(std::size_t nx, std::size_t ny, std::size_t nu) {
  if (static_cast<double>(nx) * static_cast<double>(ny) * static_cast<double>(nu) >
      static_cast<double>(size_cap())) {
    throw Error(ErrorCode::kSizeCap, "oracle kernel exceeds size cap");
  }
}

}  // namespace

std::size_t default_card_u(const Problem& p) {
  return joint_x_size(p) * (joint_y_size(p) - 1) + 2;
}

Kernel leakage_project(const Kernel& m, const Problem& p, double eps) {
  return project_toward(m, constant_kernel_like(m), p, eps);
}

OracleResult search(const Problem& p, const OracleConfig& cfg) {
  if (!(p.epsilon >= 0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
  if (cfg.restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  validate(p);
  const std::size_t card_u = cfg.card_u == 0 ? default_card_u(p) : cfg.card_u;
  const Instance in = make_instance(p);
  check_kernel_size(in.nx, in.ny, card_u);

  // Start list: warm starts, U = Y, then the random restarts.
  struct Job {
    std::optional<Kernel> start;
    std::size_t sweeps;
  };
  std::vector<Job> jobs;
  for (const auto& w : cfg.warm_starts) {
    check_alphabets(p, w);
    jobs.push_back({leakage_project(w, p, p.epsilon), cfg.warm_iters.value_or(cfg.iters)});
  }
  if (cfg.identity_start) {
    check_kernel_size(in.nx, in.ny, in.ny);
    jobs.push_back({leakage_project(identity_kernel(in.nx, in.ny), p, p.epsilon), cfg.iters});
  }
  const std::size_t fixed = jobs.size();
  for (std::size_t r = 0; r < cfg.restarts; ++r) jobs.push_back({std::nullopt, cfg.iters});

  const Searcher searcher(p, in, cfg);
  const auto run_job = [&](std::size_t idx) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(idx)};
    std::mt19937_64 rng(seq);
    Kernel start = jobs[idx].start ? *jobs[idx].start
                                   : random_start(in, p, card_u, idx - fixed, rng);
    return searcher.run(std::move(start), jobs[idx].sweeps, rng);
  };

  std::vector<Restart> results(jobs.size());
  const std::size_t threads = std::max<std::size_t>(cfg.threads, 1);
  for (std::size_t base = 0; base < jobs.size(); base += threads) {
    std::vector<std::future<Restart>> pending;
    const std::size_t end = std::min(jobs.size(), base + threads);
    for (std::size_t i = base; i < end; ++i) {
      pending.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                   run_job, i));
    }
    for (std::size_t i = base; i < end; ++i) results[i] = pending[i - base].get();
  }

  OracleResult out;
  out.best_objective = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.trace.push_back(results[i].objective);
    if (results[i].objective > out.best_objective) {
      out.best_objective = results[i].objective;
      out.best_restart = i;
    }
  }
  out.best_kernel = results[out.best_restart].kernel;
  out.leakage_at_best = results[out.best_restart].leakage;
  return out;
}

SandwichReport sandwich_check(const Problem& p, const OracleConfig& cfg) {
  const ProblemStats stats = validate(p);
  const BoundsReport b = compute_bounds(p, stats);
  SandwichReport r;
  r.trivial = b.trivial;
  r.deterministic = b.deterministic;
  OracleConfig oc = cfg;
  if (b.trivial) {
    const double v = *b.trivial_value;
    r.lower = r.lower_frl = r.lower_sfrl = r.upper = v;
    r.exact = v;
    const Kernel id = identity_kernel(joint_x_size(p), joint_y_size(p));
    const MechanismReport m = evaluate(p, id);
    r.mechanism = m.objective;
    r.mechanism_leakage = m.leakage;
    oc.identity_start = true;
  } else {
    r.lower = b.lower;
    r.lower_frl = b.lower_frl;
    r.lower_sfrl = b.lower_sfrl;
    r.upper = b.upper;
    if (b.deterministic_value) r.exact = b.deterministic_value;
    const ComposedMechanism mech =
        compose_multiuser(p, allocate_epsilon(p, stats, AllocationVariant::kFrl));
    const MechanismReport m = evaluate(p, mech);
    r.mechanism = m.objective;
    r.mechanism_leakage = m.leakage;
    double cells = static_cast<double>(joint_x_size(p) * joint_y_size(p)) * m.cardinality;
    if (cells <= static_cast<double>(size_cap())) {
      oc.warm_starts.push_back(materialize(p, mech));
    }
  }
  r.search = search(p, oc);
  r.oracle = r.search.best_objective;
  r.oracle_leakage = r.search.leakage_at_best;
  const double tol = 1e-9;
  r.lower_le_mechanism = r.lower - tol <= r.mechanism;
  r.mechanism_le_upper = r.mechanism <= r.upper + tol;
  r.mechanism_le_oracle = r.mechanism <= r.oracle + kSandwichSlack;
  r.oracle_le_upper = r.oracle <= r.upper + tol;
  return r;
}

}  // namespace privbound
