#pragma once

#include <string_view>

namespace atombench {

// Atomic number for an element symbol (H..Og), or 0 when unknown.
// Matching is case-sensitive: "Fe" is valid, "FE" and "fe" are not.
int atomic_number(std::string_view symbol) noexcept;

inline bool is_element(std::string_view symbol) noexcept {
  return atomic_number(symbol) != 0;
}

// Symbol for atomic number z in [1, 118]; empty view otherwise.
std::string_view element_symbol(int z) noexcept;

}  // namespace atombench
