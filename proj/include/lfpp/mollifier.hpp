#pragma once

#include <Eigen/Dense>

#include "lfpp/grid.hpp"

namespace lfpp {

// h*_eps = h convolved with the heat kernel p_{eps^2/2}, on the grid of the
// base field. Values are stored as an ordinary FieldGrid so every grid-level
// routine (interpolation, circle averages, I/O) applies.
struct MollifiedField {
  FieldGrid field;
  double epsilon = 0.0;

  const GridSpec& spec() const { return field.spec; }
  std::uint64_t seed() const { return field.seed; }
};

// Truncation radius of the kernel in units of epsilon.
inline constexpr double kKernelTruncation = 5.0;

// Heat-kernel weights p_{eps^2/2}(offset * spacing) for lattice offsets with
// |offset| * spacing <= 5 eps, renormalized to unit sum. Entry (R + dy, R + dx)
// holds offset (dx, dy), R = floor(5 eps / spacing).
Eigen::ArrayXXd kernel_table(double epsilon, double spacing);

// Zero-padded linear convolution of the field with kernel_table (FFT).
MollifiedField mollify(const FieldGrid& field, double epsilon);

}  // namespace lfpp
