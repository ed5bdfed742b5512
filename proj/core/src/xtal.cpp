#include "atombench/xtal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "atombench/elements.hpp"
#include "atombench/error.hpp"

namespace atombench {
namespace {

// cos/sin in degrees, exact at right angles so that orthogonal cells come
// out with literal zeros.
double cos_deg(double deg) { return deg == 90.0 ? 0.0 : std::cos(deg2rad(deg)); }
double sin_deg(double deg) { return deg == 90.0 ? 1.0 : std::sin(deg2rad(deg)); }

double angle_between(const Vec3& u, const Vec3& v) {
  double c = dot(u, v) / (norm(u) * norm(v));
  return rad2deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

bool all_finite(const Mat3& m) {
  for (const auto& row : m)
    for (double x : row)
      if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

double get(const LatticeParams& p, LatticeParam which) {
  switch (which) {
    case LatticeParam::a: return p.a;
    case LatticeParam::b: return p.b;
    case LatticeParam::c: return p.c;
    case LatticeParam::alpha: return p.alpha;
    case LatticeParam::beta: return p.beta;
    case LatticeParam::gamma: return p.gamma;
  }
  return 0;
}

const char* name(LatticeParam which) {
  switch (which) {
    case LatticeParam::a: return "a";
    case LatticeParam::b: return "b";
    case LatticeParam::c: return "c";
    case LatticeParam::alpha: return "alpha";
    case LatticeParam::beta: return "beta";
    case LatticeParam::gamma: return "gamma";
  }
  return "";
}

bool is_angle(LatticeParam which) {
  return which == LatticeParam::alpha || which == LatticeParam::beta ||
         which == LatticeParam::gamma;
}

void validate(const LatticeParams& p) {
  for (double len : {p.a, p.b, p.c})
    if (!(len > 0) || !std::isfinite(len))
      throw DegenerateCell(fmt::format("lattice length {} is not positive", len));
  for (double ang : {p.alpha, p.beta, p.gamma})
    if (!(ang > 0 && ang < 180))
      throw DegenerateCell(fmt::format("lattice angle {} outside (0, 180)", ang));
  const double ca = cos_deg(p.alpha), cb = cos_deg(p.beta), cg = cos_deg(p.gamma);
  const double gram = 1 - ca * ca - cb * cb - cg * cg + 2 * ca * cb * cg;
  if (!(gram > 1e-12))
    throw DegenerateCell(fmt::format(
        "angles ({}, {}, {}) do not form a parallelepiped", p.alpha, p.beta, p.gamma));
}

LatticeMatrix::LatticeMatrix(const Mat3& rows) : rows_(rows) {
  if (!all_finite(rows_)) throw DegenerateCell("lattice contains non-finite entries");
  for (const auto& row : rows_)
    if (norm(row) < 1e-12) throw DegenerateCell("lattice vector of zero length");
  const double d = det(rows_);
  if (std::abs(d) < 1e-12)
    throw DegenerateCell(fmt::format("lattice volume {} is zero", d));
  if (d < 0) {
    for (auto& row : rows_) row[0] = -row[0];
    flipped_ = true;
  }
}

LatticeMatrix params_to_matrix(const LatticeParams& p) {
  validate(p);
  const double ca = cos_deg(p.alpha), cb = cos_deg(p.beta);
  const double cg = cos_deg(p.gamma), sg = sin_deg(p.gamma);
  const double cx = p.c * cb;
  const double cy = p.c * (ca - cb * cg) / sg;
  const double cz2 = p.c * p.c - cx * cx - cy * cy;
  if (!(cz2 > 0)) throw DegenerateCell("cell has no extent along z");
  return LatticeMatrix(Mat3{Vec3{p.a, 0.0, 0.0}, Vec3{p.b * cg, p.b * sg, 0.0},
                            Vec3{cx, cy, std::sqrt(cz2)}});
}

LatticeParams matrix_to_params(const LatticeMatrix& m) {
  const auto& r = m.rows();
  return {norm(r[0]),
          norm(r[1]),
          norm(r[2]),
          angle_between(r[1], r[2]),
          angle_between(r[0], r[2]),
          angle_between(r[0], r[1])};
}

Mat3 metric_tensor(const LatticeMatrix& m) {
  const auto& r = m.rows();
  Mat3 g{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[i][j] = dot(r[i], r[j]);
  return g;
}

double cell_volume(const LatticeMatrix& m) { return std::abs(det(m.rows())); }

Vec3 wrap_frac(const Vec3& f) {
  Vec3 w{};
  for (int i = 0; i < 3; ++i) {
    w[i] = f[i] - std::floor(f[i]);
    // x - floor(x) can round up to exactly 1 for tiny negative x.
    if (w[i] >= 1.0) w[i] = 0.0;
  }
  return w;
}

MinImage min_image_delta(const Vec3& f1, const Vec3& f2, const LatticeMatrix& m) {
  Vec3 d = f2 - f1;
  for (double& x : d) x -= std::floor(x + 0.5);
  Vec3 best = vecmat(d, m.rows());
  double best2 = dot(best, best);
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        const Vec3 cand = vecmat(Vec3{d[0] + i, d[1] + j, d[2] + k}, m.rows());
        const double c2 = dot(cand, cand);
        if (c2 < best2) {
          best2 = c2;
          best = cand;
        }
      }
  return {best, std::sqrt(best2)};
}

Crystal::Crystal(std::vector<std::string> species, std::vector<Vec3> frac_coords,
                 LatticeMatrix lattice, std::string provenance)
    : species_(std::move(species)),
      frac_(std::move(frac_coords)),
      lattice_(std::move(lattice)),
      provenance_(std::move(provenance)) {
  if (species_.empty()) throw InvalidCrystal("crystal has no sites");
  if (species_.size() != frac_.size())
    throw InvalidCrystal(fmt::format("{} species but {} coordinates", species_.size(),
                                     frac_.size()));
  for (const auto& s : species_)
    if (!is_element(s)) throw InvalidCrystal(fmt::format("unknown element '{}'", s));
  for (auto& f : frac_) {
    for (double x : f)
      if (!std::isfinite(x)) throw InvalidCrystal("non-finite fractional coordinate");
    f = wrap_frac(f);
  }
}

Vec3 Crystal::cartesian(std::size_t site) const {
  return vecmat(frac_.at(site), lattice_.rows());
}

std::map<std::string, long> element_counts(const std::vector<std::string>& species) {
  std::map<std::string, long> counts;
  for (const auto& s : species) ++counts[s];
  return counts;
}

std::string reduced_formula(const std::vector<std::string>& species) {
  const auto counts = element_counts(species);
  long g = 0;
  for (const auto& [el, n] : counts) g = std::gcd(g, n);
  std::string out;
  for (const auto& [el, n] : counts) {
    out += el;
    if (n / g != 1) out += std::to_string(n / g);
  }
  return out;
}

std::map<std::string, long> parse_formula(const std::string& formula) {
  std::map<std::string, long> counts;
  std::size_t i = 0;
  while (i < formula.size()) {
    const unsigned char ch = static_cast<unsigned char>(formula[i]);
    if (!std::isupper(ch))
      throw ParseError(0, fmt::format("bad formula '{}' at offset {}", formula, i));
    std::string el(1, formula[i++]);
    while (i < formula.size() && std::islower(static_cast<unsigned char>(formula[i])))
      el += formula[i++];
    if (!is_element(el))
      throw ParseError(0, fmt::format("unknown element '{}' in formula '{}'", el, formula));
    long n = 0;
    bool has_digits = false;
    while (i < formula.size() && std::isdigit(static_cast<unsigned char>(formula[i]))) {
      n = n * 10 + (formula[i++] - '0');
      has_digits = true;
      if (n > std::numeric_limits<int>::max())
        throw ParseError(0, fmt::format("count overflow in formula '{}'", formula));
    }
    if (has_digits && n == 0)
      throw ParseError(0, fmt::format("zero count in formula '{}'", formula));
    counts[el] += has_digits ? n : 1;
  }
  if (counts.empty()) throw ParseError(0, "empty formula");
  return counts;
}

bool same_composition(const std::map<std::string, long>& lhs,
                      const std::map<std::string, long>& rhs) {
  if (lhs.size() != rhs.size() || lhs.empty()) return false;
  long gl = 0, gr = 0;
  for (const auto& [el, n] : lhs) gl = std::gcd(gl, n);
  for (const auto& [el, n] : rhs) gr = std::gcd(gr, n);
  auto it = rhs.begin();
  for (const auto& [el, n] : lhs) {
    if (el != it->first || n / gl != it->second / gr) return false;
    ++it;
  }
  return true;
}

}  // namespace atombench
