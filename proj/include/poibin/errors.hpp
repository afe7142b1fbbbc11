#pragma once

#include <stdexcept>
#include <string>

namespace poibin {

/// A stated applicability condition does not hold, so the quantity
/// (typically a bound certificate) cannot be issued.
class inapplicable_error : public std::domain_error {
 public:
  explicit inapplicable_error(const std::string& what) : std::domain_error(what) {}
};

/// A computation failed its internal accuracy check (e.g. excessive
/// imaginary residue in the contour inversion).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poibin
