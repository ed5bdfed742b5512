#pragma once

// Structure text formats: VASP POSCAR (direct coordinates only) and the
// AtomGPT plain-text block:
//
//   5.32 5.32 5.32        lattice lengths, angstrom
//   90 90 90              lattice angles, degrees
//   Sn 0.000 0.000 0.000  element + fractional coordinates, one site per line
//
// Tokens are whitespace separated and blank lines are ignored.

#include <string>
#include <string_view>

#include "atombench/xtal.hpp"

namespace atombench {

// Throws ParseError (with line number), UnsupportedFormat for Cartesian
// POSCARs and for files without an element-symbol line, DegenerateCell.
Crystal parse_poscar(std::string_view text, std::string provenance = {});

// Direct-coordinate POSCAR with 6-decimal fixed-point numbers and species
// grouped in order of first appearance.
std::string write_poscar(const Crystal& c);

// Throws ParseError, DegenerateCell.
Crystal parse_atomgpt_block(std::string_view text, std::string provenance = {});

std::string write_atomgpt_block(const Crystal& c);

// "%.6f" with negative zero printed as zero.
std::string fixed6(double x);

}  // namespace atombench
