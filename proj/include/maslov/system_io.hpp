#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maslov/dynamics.hpp"
#include "maslov/gaussian_state.hpp"
#include "maslov/symplectic.hpp"

namespace maslov {

/// One system per JSON file.  Complex numbers are [re, im] pairs and phase
/// vectors are rows of length 2n in (P, Q) order.
struct SystemDefinition {
  int n = 0;
  RMat constraints;  // k x 2n, one constraint vector per row
  double measure_scale = 1.0;
  RMat gamma;        // 2n x 2n
  double epsilon = 0.0;
  std::optional<GaussianState> gaussian;
  std::optional<RMat> gauge;  // k x 2n
  double gauge_measure_scale = 1.0;

  int k() const { return static_cast<int>(constraints.rows()); }
  /// Plane spanned by the rows.  Throws on dependent or non-isotropic rows.
  ConstraintPlane plane() const;
  QuadraticHamiltonian hamiltonian() const;
  /// The declared gauge surface, or the derived one when none is given.
  GaugeSurface gauge_surface() const;
};

/// Reads a system.  Syntax errors carry "line L, column C"; shape and value
/// errors carry the JSON path with matrix row and column indices.  Throws a
/// validation Error with code "parse" or "schema".
SystemDefinition parse_system(const std::string& text);
SystemDefinition load_system(const std::string& path);

struct CheckItem {
  std::string name;
  bool ok = true;
  std::string detail;
};

/// Isotropy (naming the failing pair), independence, gauge duality,
/// Hamiltonian compatibility (naming the violating block) and Gaussian
/// validity.  Never throws on semantically invalid input.
std::vector<CheckItem> check_system(const SystemDefinition& sys);

}  // namespace maslov
