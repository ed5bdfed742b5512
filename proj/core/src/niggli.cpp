#include "atombench/niggli.hpp"

#include <cmath>
#include <vector>

namespace atombench {
namespace {

// Gruber's characteristic: A=a.a B=b.b C=c.c xi=2b.c eta=2a.c zeta=2a.b
struct G6 {
  double A, B, C, xi, eta, zeta;
};

G6 g6_of(const Mat3& r) {
  return {dot(r[0], r[0]),     dot(r[1], r[1]),     dot(r[2], r[2]),
          2 * dot(r[1], r[2]), 2 * dot(r[0], r[2]), 2 * dot(r[0], r[1])};
}

int sign_eps(double x, double eps) { return x < -eps ? -1 : (x > eps ? 1 : 0); }

class Reducer {
 public:
  Reducer(const Mat3& original, double eps) : original_(original), eps_(eps) {}

  // Returns true once no step applies.
  bool iterate() {
    G6 g = g6_of(current_);
    const double e = eps_;
    // 1: order A <= B
    if (g.A > g.B + e || (std::abs(g.A - g.B) <= e && std::abs(g.xi) > std::abs(g.eta) + e)) {
      apply({{{0, -1, 0}, {-1, 0, 0}, {0, 0, -1}}});
      g = g6_of(current_);
    }
    // 2: order B <= C, then restart
    if (g.B > g.C + e || (std::abs(g.B - g.C) <= e && std::abs(g.eta) > std::abs(g.zeta) + e)) {
      apply({{{-1, 0, 0}, {0, 0, -1}, {0, -1, 0}}});
      return false;
    }
    // 3 and 4: make xi, eta, zeta uniformly positive or uniformly non-positive.
    const int l = sign_eps(g.xi, e), m = sign_eps(g.eta, e), n = sign_eps(g.zeta, e);
    if (l * m * n == 1) {
      apply({{{l, 0, 0}, {0, m, 0}, {0, 0, n}}});
      g = g6_of(current_);
    } else if (!(l == -1 && m == -1 && n == -1)) {
      std::int64_t s[3] = {1, 1, 1};
      int zero_at = -1;
      const int signs[3] = {l, m, n};
      for (int i = 0; i < 3; ++i) {
        if (signs[i] == 1)
          s[i] = -1;
        else if (signs[i] == 0)
          zero_at = i;
      }
      if (s[0] * s[1] * s[2] == -1 && zero_at >= 0) s[zero_at] = -1;
      apply({{{s[0], 0, 0}, {0, s[1], 0}, {0, 0, s[2]}}});
      g = g6_of(current_);
    }
    // 5
    if (std::abs(g.xi) > g.B + e || (std::abs(g.xi - g.B) <= e && 2 * g.eta < g.zeta - e) ||
        (std::abs(g.xi + g.B) <= e && g.zeta < -e)) {
      const std::int64_t sx = g.xi > 0 ? 1 : -1;
      apply({{{1, 0, 0}, {0, 1, 0}, {0, -sx, 1}}});
      return false;
    }
    // 6
    if (std::abs(g.eta) > g.A + e || (std::abs(g.eta - g.A) <= e && 2 * g.xi < g.zeta - e) ||
        (std::abs(g.eta + g.A) <= e && g.zeta < -e)) {
      const std::int64_t se = g.eta > 0 ? 1 : -1;
      apply({{{1, 0, 0}, {0, 1, 0}, {-se, 0, 1}}});
      return false;
    }
    // 7
    if (std::abs(g.zeta) > g.A + e || (std::abs(g.zeta - g.A) <= e && 2 * g.xi < g.eta - e) ||
        (std::abs(g.zeta + g.A) <= e && g.eta < -e)) {
      const std::int64_t sz = g.zeta > 0 ? 1 : -1;
      apply({{{1, 0, 0}, {-sz, 1, 0}, {0, 0, 1}}});
      return false;
    }
    // 8
    const double sum = g.xi + g.eta + g.zeta + g.A + g.B;
    if (sum < -e || (std::abs(sum) <= e && 2 * (g.A + g.eta) + g.zeta > e)) {
      apply({{{1, 0, 0}, {0, 1, 0}, {1, 1, 1}}});
      return false;
    }
    return true;
  }

  const IMat3& transform() const { return transform_; }

 private:
  void apply(const IMat3& step) {
    transform_ = matmul(step, transform_);
    current_ = matmul(transform_, original_);
  }

  Mat3 original_;
  Mat3 current_ = original_;
  IMat3 transform_ = kIdentity3;
  double eps_;
};

double scaled_eps(double tol, double volume) { return tol * std::cbrt(volume * volume); }

}  // namespace

ReductionResult niggli_reduce(const LatticeMatrix& m, double tol, int max_iter) {
  Reducer reducer(m.rows(), scaled_eps(tol, cell_volume(m)));
  int iterations = 0;
  bool converged = false;
  while (iterations < max_iter) {
    ++iterations;
    if (reducer.iterate()) {
      converged = true;
      break;
    }
  }
  return {LatticeMatrix(matmul(reducer.transform(), m.rows())), reducer.transform(),
          iterations, converged};
}

bool is_niggli_reduced(const LatticeParams& p, double tol) {
  validate(p);
  const double ca = std::cos(deg2rad(p.alpha));
  const double cb = std::cos(deg2rad(p.beta));
  const double cg = std::cos(deg2rad(p.gamma));
  const double volume =
      p.a * p.b * p.c * std::sqrt(1 - ca * ca - cb * cb - cg * cg + 2 * ca * cb * cg);
  const double e = scaled_eps(tol, volume);
  const G6 g{p.a * p.a,         p.b * p.b,         p.c * p.c,
             2 * p.b * p.c * ca, 2 * p.a * p.c * cb, 2 * p.a * p.b * cg};
  if (g.A > g.B + e || g.B > g.C + e) return false;
  if (std::abs(g.xi) > g.B + e || std::abs(g.eta) > g.A + e || std::abs(g.zeta) > g.A + e)
    return false;
  if (g.xi + g.eta + g.zeta + g.A + g.B < -e) return false;
  const bool type1 = g.xi > -e && g.eta > -e && g.zeta > -e;
  const bool type2 = g.xi <= e && g.eta <= e && g.zeta <= e;
  return type1 || type2;
}

ReducedCrystal reduce_crystal(const Crystal& c, double tol, int max_iter) {
  ReductionResult r = niggli_reduce(c.lattice(), tol, max_iter);
  const IMat3 inv = unimodular_inverse(r.transform);
  std::vector<Vec3> frac;
  frac.reserve(c.size());
  for (const auto& f : c.frac_coords()) frac.push_back(vecmat(f, inv));
  Crystal reduced(c.species(), std::move(frac), r.reduced, c.provenance());
  return {std::move(reduced), std::move(r)};
}

}  // namespace atombench
