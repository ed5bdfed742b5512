#pragma once

// Niggli cell reduction (Krivy & Gruber 1976) with the epsilon-stabilised
// comparisons of Grosse-Kunstleve, Sauter & Adams (2004).

#include "atombench/linalg.hpp"
#include "atombench/xtal.hpp"

namespace atombench {

inline constexpr double kDefaultNiggliTol = 1e-5;
inline constexpr int kDefaultNiggliMaxIter = 100;

struct ReductionResult {
  LatticeMatrix reduced;
  // Unimodular change of basis: reduced.rows() == transform * original.rows().
  IMat3 transform;
  int iterations = 0;
  // False when max_iter was hit; reduced then holds the best-effort cell.
  bool converged = true;
};

// tol is relative; comparisons use eps = tol * volume^(2/3).
ReductionResult niggli_reduce(const LatticeMatrix& m, double tol = kDefaultNiggliTol,
                              int max_iter = kDefaultNiggliMaxIter);

// Checks A <= B <= C, |xi| <= B, |eta| <= A, |zeta| <= A,
// xi + eta + zeta + A + B >= 0, and that xi, eta, zeta are uniformly
// positive (type I) or uniformly non-positive (type II), all within
// eps = tol * volume^(2/3).
bool is_niggli_reduced(const LatticeParams& p, double tol = kDefaultNiggliTol);

struct ReducedCrystal {
  Crystal crystal;
  ReductionResult reduction;
};

// Reduces the lattice of c and re-expresses the fractional coordinates in
// the new basis.
ReducedCrystal reduce_crystal(const Crystal& c, double tol = kDefaultNiggliTol,
                              int max_iter = kDefaultNiggliMaxIter);

}  // namespace atombench
