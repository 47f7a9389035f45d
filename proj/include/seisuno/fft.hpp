#pragma once

#include <array>
#include <span>

#include "seisuno/tensor.hpp"

namespace seisuno::fft {

/// In-place 1D transform, any length. sign = -1 forward, +1 inverse.
/// Unnormalized in both directions (inverse must be scaled by 1/n by the caller).
void transform(cdouble* data, std::size_t n, int sign);

/// Unnormalized complex DFT along the given axes (deduplicated, each applied once).
void transform_axes(CTensor& t, std::span<const int> axes, int sign);

/// Full complex forward DFT of a real tensor over the given axes; other axes
/// are treated as batch dimensions.
CTensor fftn(const Tensor& x, std::span<const int> axes);
CTensor fftn(const CTensor& x, std::span<const int> axes);

/// Standard 1/N-scaled complex inverse over the given axes.
CTensor ifftn(const CTensor& x, std::span<const int> axes);

/// Forward DFT over exactly three axes.
CTensor fft3(const Tensor& x, std::array<int, 3> axes);

/// Inverse DFT over three axes evaluated on a grid of out_extents: retained
/// modes are zero-padded (upsampling) or truncated with Nyquist folding
/// (downsampling), then the inverse transform is scaled by 1/prod(input
/// extents) so band-limited function values are preserved across resolutions.
/// The imaginary residue is checked against `imag_tol` (relative to the
/// largest output magnitude) and discarded.
Tensor ifft3(const CTensor& spectrum, std::array<int, 3> axes, std::array<std::size_t, 3> out_extents,
             double imag_tol = 1e-8);

/// Complex variant of ifft3 without the realness check (used by backward passes).
CTensor ifft3_complex(const CTensor& spectrum, std::array<int, 3> axes, std::array<std::size_t, 3> out_extents);

/// Map one spectrum axis from extent n to extent m (trigonometric
/// interpolation / decimation with Nyquist split / fold).
CTensor resample_spectrum_axis(const CTensor& t, int axis, std::size_t m);

/// Adjoint of resample_spectrum_axis (transposed index/weight map).
CTensor resample_spectrum_axis_adjoint(const CTensor& t, int axis, std::size_t n_in);

/// Spectrum resampling over several axes.
CTensor resample_spectrum(const CTensor& t, std::span<const int> axes, std::span<const std::size_t> out_extents);

/// Band-limited resampling of a real field over three axes (fft3 + ifft3).
Tensor spectral_resample(const Tensor& x, std::array<int, 3> axes, std::array<std::size_t, 3> out_extents);

/// Largest residual |imag| / max |value| of the last ifft3 call on this thread.
double last_imag_residue();

}  // namespace seisuno::fft
