#pragma once

#include <cstdint>

#include "rdch/grid.hpp"

namespace rdch {

/// The pair (n, phi) at one time instant; phi is always the relaxation
/// solution for n.
struct State {
  double t = 0.0;
  Field n;
  Field phi;
  double dt = 0.0;
  std::int64_t step_index = 0;
};

}  // namespace rdch
