#include "seisuno/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "seisuno/fft.hpp"
#include "seisuno/threads.hpp"

namespace seisuno::metrics {

namespace {

constexpr double kOmega0 = 6.0;
const double kMorletNorm = std::pow(std::numbers::pi, -0.25);

void check_record(const Tensor& record, const char* what) {
    check(record.rank() == 4 && record.extent(0) == 3 && record.numel() > 0,
          std::string(what) + ": expected a non-empty (3, nx, ny, nt) record");
}

}  // namespace

std::array<double, 3> mae_per_component(const Tensor& pred, const Tensor& ref) {
    check(pred.same_shape(ref), "mae_per_component: shape mismatch");
    check(pred.rank() >= 1 && pred.extent(0) == 3 && pred.numel() > 0,
          "mae_per_component: expected 3 leading components");
    const std::size_t per = pred.numel() / 3;
    std::array<double, 3> out{};
    for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < per; ++i) acc += std::abs(pred[c * per + i] - ref[c * per + i]);
        out[c] = acc / static_cast<double>(per);
    }
    return out;
}

Tensor pgv_per_component(const Tensor& record) {
    check_record(record, "pgv_per_component");
    const std::size_t nx = record.extent(1), ny = record.extent(2), nt = record.extent(3);
    Tensor out({3, nx, ny});
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) {
                const double* trace = record.data() + ((c * nx + i) * ny + j) * nt;
                double peak = 0.0;
                for (std::size_t t = 0; t < nt; ++t) peak = std::max(peak, std::abs(trace[t]));
                out.at({c, i, j}) = peak;
            }
    return out;
}

Tensor pgv_euclidean(const Tensor& record) {
    check_record(record, "pgv_euclidean");
    const std::size_t nx = record.extent(1), ny = record.extent(2), nt = record.extent(3);
    const std::size_t comp = nx * ny * nt;
    Tensor out({nx, ny});
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            const double* base = record.data() + (i * ny + j) * nt;
            double peak = 0.0;
            for (std::size_t t = 0; t < nt; ++t) {
                const double e = base[t], n = base[comp + t], z = base[2 * comp + t];
                peak = std::max(peak, std::sqrt(e * e + n * n + z * z));
            }
            out.at({i, j}) = peak;
        }
    return out;
}

std::vector<double> log_spaced_freqs(double f_lo_hz, double f_hi_hz, std::size_t count) {
    check(count >= 2, "log_spaced_freqs: need at least two frequencies");
    check(f_lo_hz > 0.0 && f_hi_hz > f_lo_hz, "log_spaced_freqs: need 0 < f_lo < f_hi");
    std::vector<double> out(count);
    const double log_ratio = std::log(f_hi_hz / f_lo_hz);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = f_lo_hz * std::exp(log_ratio * static_cast<double>(i) / static_cast<double>(count - 1));
    out.front() = f_lo_hz;
    out.back() = f_hi_hz;
    return out;
}

CTensor cwt_morlet(std::span<const double> signal, double sample_rate_hz, std::span<const double> freqs_hz) {
    const std::size_t n = signal.size();
    check(n > 0, "cwt_morlet: empty signal");
    check(sample_rate_hz > 0.0, "cwt_morlet: sample rate must be positive");
    const double nyquist = sample_rate_hz / 2.0;
    for (const double f : freqs_hz)
        check(f > 0.0 && f < nyquist, "cwt_morlet: frequency outside (0, Nyquist)");

    Tensor x({n});
    std::copy(signal.begin(), signal.end(), x.data());
    const std::array<int, 1> ax{0};
    const CTensor spectrum = fft::fftn(x, ax);

    CTensor out({freqs_hz.size(), n});
    CTensor row({n});
    for (std::size_t fi = 0; fi < freqs_hz.size(); ++fi) {
        const double a = kOmega0 / (2.0 * std::numbers::pi * freqs_hz[fi]);
        const double gain = std::sqrt(a) * kMorletNorm;
        for (std::size_t k = 0; k < n; ++k) {
            // Analytic wavelet: response only at strictly positive frequencies
            // (DC, the Nyquist bin, and negative bins are zeroed).
            if (k == 0 || 2 * k >= n) {
                row[k] = 0.0;
                continue;
            }
            const double w = 2.0 * std::numbers::pi * static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
            const double d = a * w - kOmega0;
            row[k] = spectrum[k] * (gain * std::exp(-0.5 * d * d));
        }
        const CTensor wrow = fft::ifftn(row, ax);
        std::copy(wrow.data(), wrow.data() + n, out.data() + fi * n);
    }
    return out;
}

GofScores gof_envelope_phase(std::span<const double> pred, std::span<const double> ref, double sample_rate_hz,
                             double band_lo_hz, double band_hi_hz, std::size_t n_freqs) {
    check(pred.size() == ref.size() && !ref.empty(), "gof_envelope_phase: traces must match and be non-empty");
    check(band_hi_hz < sample_rate_hz / 2.0, "gof_envelope_phase: band exceeds Nyquist");
    const std::vector<double> freqs = log_spaced_freqs(band_lo_hz, band_hi_hz, n_freqs);

    bool all_zero = true;
    for (const double v : ref)
        if (v != 0.0) {
            all_zero = false;
            break;
        }
    if (all_zero) return {};

    const CTensor wp = cwt_morlet(pred, sample_rate_hz, freqs);
    const CTensor wr = cwt_morlet(ref, sample_rate_hz, freqs);

    double ref_sum = 0.0, em_num = 0.0, pm_num = 0.0;
    for (std::size_t i = 0; i < wr.numel(); ++i) {
        const double ar = std::abs(wr[i]);
        const double ap = std::abs(wp[i]);
        ref_sum += ar;
        em_num += std::abs(ap - ar);
        pm_num += ar * std::abs(std::arg(wp[i] * std::conj(wr[i]))) / std::numbers::pi;
    }
    if (ref_sum == 0.0) return {};
    return {10.0 * std::exp(-std::abs(em_num / ref_sum)), 10.0 * std::exp(-std::abs(pm_num / ref_sum)), true};
}

GofReport gof_report(const Tensor& pred, const Tensor& ref, double sample_rate_hz, double band_lo_hz,
                     double band_hi_hz, std::size_t n_freqs, int workers) {
    check_record(pred, "gof_report");
    check(pred.same_shape(ref), "gof_report: shape mismatch");
    const std::size_t nx = pred.extent(1), ny = pred.extent(2), nt = pred.extent(3);
    const std::size_t n_traces = 3 * nx * ny;

    GofReport report;
    report.envelope = Tensor({3, nx, ny});
    report.phase = Tensor({3, nx, ny});
    report.band_lo_hz = band_lo_hz;
    report.band_hi_hz = band_hi_hz;

    std::vector<unsigned char> defined(n_traces, 0);
    threads::parallel_for(
        n_traces,
        [&](std::size_t tr) {
            const threads::ScopedSerial serial;
            const std::span<const double> p(pred.data() + tr * nt, nt);
            const std::span<const double> r(ref.data() + tr * nt, nt);
            const GofScores s = gof_envelope_phase(p, r, sample_rate_hz, band_lo_hz, band_hi_hz, n_freqs);
            report.envelope[tr] = s.envelope;
            report.phase[tr] = s.phase;
            defined[tr] = s.defined ? 1 : 0;
        },
        workers);

    std::size_t n_defined = 0, env_good = 0, phase_very_good = 0;
    for (std::size_t tr = 0; tr < n_traces; ++tr) {
        if (!defined[tr]) continue;
        ++n_defined;
        if (report.envelope[tr] > 6.0) ++env_good;
        if (report.phase[tr] > 8.0) ++phase_very_good;
    }
    report.undefined_traces = n_traces - n_defined;
    if (n_defined > 0) {
        report.frac_envelope_good = static_cast<double>(env_good) / static_cast<double>(n_defined);
        report.frac_phase_very_good = static_cast<double>(phase_very_good) / static_cast<double>(n_defined);
    }
    return report;
}

Spectrum fourier_amplitude_spectrum(std::span<const double> trace, double sample_rate_hz, bool taper) {
    const std::size_t n = trace.size();
    check(n > 0, "fourier_amplitude_spectrum: empty trace");
    check(sample_rate_hz > 0.0, "fourier_amplitude_spectrum: sample rate must be positive");

    Tensor x({n});
    std::copy(trace.begin(), trace.end(), x.data());
    if (taper && n > 1)
        for (std::size_t i = 0; i < n; ++i)
            x[i] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(n - 1)));

    const std::array<int, 1> ax{0};
    const CTensor spectrum = fft::fftn(x, ax);

    Spectrum out;
    out.tapered = taper;
    const std::size_t bins = n / 2 + 1;
    out.freq_hz.resize(bins);
    out.amplitude.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        out.freq_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
        out.amplitude[k] = std::abs(spectrum[k]);
    }
    return out;
}

}  // namespace seisuno::metrics
