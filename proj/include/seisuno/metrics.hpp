#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "seisuno/tensor.hpp"

namespace seisuno::metrics {

/// Mean |pred - ref| over sensors and time, one value per component in record
/// order (east, north, vertical). The three values sum to the training loss.
std::array<double, 3> mae_per_component(const Tensor& pred, const Tensor& ref);

/// Peak |velocity| over time, per sensor and component: (3, nx, ny, nt) -> (3, nx, ny).
Tensor pgv_per_component(const Tensor& record);

/// Peak 3-component Euclidean velocity over time, per sensor: (3, nx, ny, nt) -> (nx, ny).
Tensor pgv_euclidean(const Tensor& record);

/// count >= 2 logarithmically spaced frequencies from f_lo to f_hi, endpoints exact.
std::vector<double> log_spaced_freqs(double f_lo_hz, double f_hi_hz, std::size_t count);

/// Continuous wavelet transform with the analytic Morlet wavelet (center
/// frequency parameter omega0 = 6, zero response at non-positive frequencies),
/// evaluated by FFT at scales a = omega0 / (2 pi f) with L2 normalization
/// sqrt(a) psi_hat(a w). Returns (freqs.size(), signal.size()) complex.
CTensor cwt_morlet(std::span<const double> signal, double sample_rate_hz, std::span<const double> freqs_hz);

struct GofScores {
    double envelope = 0.0;
    double phase = 0.0;
    bool defined = false;  // false when the reference trace is identically zero
};

/// Single-valued envelope / phase goodness-of-fit on the 0-10 scale, from the
/// time-frequency plane over log-spaced frequencies in [band_lo, band_hi]:
///   EM = sum ||W_pred| - |W_ref|| / sum |W_ref|
///   PM = sum (|W_ref| |Arg(W_pred conj(W_ref))| / pi) / sum |W_ref|
///   score = 10 exp(-|misfit|)
/// The phase sum is weighted by the reference envelope, so the envelope score
/// is direction-dependent (pred = 2 ref scores 10/e, the swap 10/sqrt(e)).
GofScores gof_envelope_phase(std::span<const double> pred, std::span<const double> ref, double sample_rate_hz,
                             double band_lo_hz, double band_hi_hz, std::size_t n_freqs = 24);

struct GofReport {
    Tensor envelope;  // (3, nx, ny)
    Tensor phase;     // (3, nx, ny)
    std::size_t undefined_traces = 0;
    double frac_envelope_good = 0.0;    // envelope > 6 among defined traces
    double frac_phase_very_good = 0.0;  // phase > 8 among defined traces
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
};

/// Per-sensor, per-component scores for two (3, nx, ny, nt) records. Undefined
/// traces (zero reference) are stored as 0 and excluded from the fractions.
GofReport gof_report(const Tensor& pred, const Tensor& ref, double sample_rate_hz, double band_lo_hz,
                     double band_hi_hz, std::size_t n_freqs = 24, int workers = 0);

struct Spectrum {
    std::vector<double> freq_hz;
    std::vector<double> amplitude;  // raw one-sided |DFT|: a bin-aligned tone of amplitude A gives A*N/2
    bool tapered = false;
};

/// One-sided amplitude spectrum of a trace, unnormalized by design. The
/// optional Hann taper is recorded in the result.
Spectrum fourier_amplitude_spectrum(std::span<const double> trace, double sample_rate_hz, bool taper = false);

}  // namespace seisuno::metrics
