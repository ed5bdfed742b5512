#pragma once

// Core crystallographic types: lattice parameters, lattice basis matrices and
// periodic crystals with fractional coordinates.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "atombench/linalg.hpp"

namespace atombench {

// Lengths in angstrom, angles in degrees.
struct LatticeParams {
  double a = 0, b = 0, c = 0;
  double alpha = 0, beta = 0, gamma = 0;

  friend bool operator==(const LatticeParams&, const LatticeParams&) = default;
};

// Indexes into LatticeParams in the order a, b, c, alpha, beta, gamma.
enum class LatticeParam { a = 0, b, c, alpha, beta, gamma };
inline constexpr LatticeParam kAllLatticeParams[] = {
    LatticeParam::a,     LatticeParam::b,    LatticeParam::c,
    LatticeParam::alpha, LatticeParam::beta, LatticeParam::gamma};

double get(const LatticeParams& p, LatticeParam which);
const char* name(LatticeParam which);
bool is_angle(LatticeParam which);

// Throws DegenerateCell if p does not describe a real parallelepiped
// (non-positive length, angle outside (0, 180), or a non positive-definite
// Gram matrix).
void validate(const LatticeParams& p);

// Real-space basis, one lattice vector per row. The stored basis is always
// right-handed: a left-handed input is mirrored through the yz-plane (the
// x component of every row is negated), which keeps every length, angle
// and fractional coordinate unchanged. handedness_flipped() records it.
class LatticeMatrix {
 public:
  explicit LatticeMatrix(const Mat3& rows);

  const Mat3& rows() const noexcept { return rows_; }
  const Vec3& operator[](std::size_t i) const { return rows_[i]; }
  bool handedness_flipped() const noexcept { return flipped_; }

 private:
  Mat3 rows_;
  bool flipped_ = false;
};

// a along +x, b in the xy-plane, c completing a right-handed basis.
LatticeMatrix params_to_matrix(const LatticeParams& p);
LatticeParams matrix_to_params(const LatticeMatrix& m);

// G = M * M^T.
Mat3 metric_tensor(const LatticeMatrix& m);
double cell_volume(const LatticeMatrix& m);

struct MinImage {
  Vec3 cartesian;  // displacement from f1 to the nearest image of f2, in Å
  double distance;
};

// Displacement from site f1 to the closest periodic image of f2. The
// fractional difference is first wrapped into [-0.5, 0.5) per component;
// the 26 neighbouring images of that candidate are then scanned so that the
// result is the true minimum image for any cell whose nearest image lies
// within one cell of the wrapped one (always the case for reduced cells).
MinImage min_image_delta(const Vec3& f1, const Vec3& f2, const LatticeMatrix& m);

// Maps every component into [0, 1).
Vec3 wrap_frac(const Vec3& f);

class Crystal {
 public:
  // Throws InvalidCrystal on empty or mismatched site lists, unknown element
  // symbols or non-finite coordinates. Coordinates are stored wrapped.
  Crystal(std::vector<std::string> species, std::vector<Vec3> frac_coords,
          LatticeMatrix lattice, std::string provenance = {});

  const std::vector<std::string>& species() const noexcept { return species_; }
  const std::vector<Vec3>& frac_coords() const noexcept { return frac_; }
  const LatticeMatrix& lattice() const noexcept { return lattice_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return species_.size(); }

  LatticeParams params() const { return matrix_to_params(lattice_); }
  Vec3 cartesian(std::size_t site) const;

 private:
  std::vector<std::string> species_;
  std::vector<Vec3> frac_;
  LatticeMatrix lattice_;
  std::string provenance_;
};

// Element -> site count.
std::map<std::string, long> element_counts(const std::vector<std::string>& species);

// Reduced (lowest integer ratio) formula, elements in alphabetical order,
// unit counts omitted: {Sn, Nb, Nb, Nb} -> "Nb3Sn".
std::string reduced_formula(const std::vector<std::string>& species);

// Parses "Nb3Sn", "H2O", "Ba1Cu3" style formulas (no parentheses or
// fractional counts) into element counts. Throws ParseError.
std::map<std::string, long> parse_formula(const std::string& formula);

// True when both count maps have the same elements in the same ratio.
bool same_composition(const std::map<std::string, long>& lhs,
                      const std::map<std::string, long>& rhs);

}  // namespace atombench
