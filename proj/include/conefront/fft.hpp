#pragma once

#include "conefront/core.hpp"

namespace conefront::fft {

/// Centered discrete transform along one axis of a row-major array.
///
/// Forward maps samples v_m at positions origin + m*h onto
///   V(xi_n) = (2*pi)^{-1/2} * h * sum_m v_m exp(-i x_m xi_n),
/// with xi_n = (n - N/2) * 2*pi/(N*h); the output index n is already in
/// centered order. Inverse is the exact two-sided inverse.
void transform_axis(ArrayXc& data, const std::array<Index, 2>& shape, int ndim, int axis,
                    double spacing, double origin, bool forward);

/// All axes of a grid at once (the dft/idft core).
ArrayXc forward_grid(const Grid& g, const ArrayXc& values);
ArrayXc inverse_grid(const Grid& g, const ArrayXc& values);

/// Unnormalized 1D helpers used by spectral differentiation.
/// fwd: out_k = sum_m in_m exp(-2*pi*i*m*k/N); inv undoes fwd exactly.
void raw_fft(ArrayXc& line, bool forward);

/// Centered transform along one dimension of a row-major rank-4 tensor
/// (degenerate dims have extent 1). Same conventions as transform_axis.
void transform_dim4(ArrayXc& v, const std::array<Index, 4>& shape, int dim, double spacing,
                    double origin, bool forward);

}  // namespace conefront::fft
