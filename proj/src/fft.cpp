#include "seisuno/fft.hpp"

#include <bit>
#include <numbers>

namespace seisuno::fft {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey, n a power of two.
void fft_pow2(cdouble* a, std::size_t n, int sign) {
    if (n <= 1) return;
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        // twiddles from std::polar directly; precision matters more than speed here
        std::vector<cdouble> w(half);
        for (std::size_t k = 0; k < half; ++k) w[k] = std::polar(1.0, ang * static_cast<double>(k));
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + half] * w[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

// Bluestein's algorithm for arbitrary n, built on power-of-two FFTs.
void fft_bluestein(cdouble* a, std::size_t n, int sign) {
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cdouble> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // angle uses k^2 mod 2n to keep the argument small
        const std::size_t k2 = (static_cast<unsigned long long>(k) * k) % (2 * n);
        chirp[k] = std::polar(1.0, sign * kPi * static_cast<double>(k2) / static_cast<double>(n));
    }
    std::vector<cdouble> fa(m, cdouble{}), fb(m, cdouble{});
    for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);
    fft_pow2(fa.data(), m, -1);
    fft_pow2(fb.data(), m, -1);
    for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    fft_pow2(fa.data(), m, +1);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * inv_m * chirp[k];
}

thread_local double g_last_imag_residue = 0.0;

std::vector<int> canonical_axes(std::span<const int> axes, std::size_t rank) {
    std::vector<int> out;
    for (int ax : axes) {
        check(ax >= 0 && static_cast<std::size_t>(ax) < rank, "fft: axis index out of range");
        if (std::find(out.begin(), out.end(), ax) == out.end()) out.push_back(ax);
    }
    return out;
}

// (out index, in index, weight) triples describing one axis resampling.
struct AxisMap {
    std::vector<std::array<std::size_t, 2>> idx;  // {out, in}
    std::vector<double> w;
};

long signed_freq(std::size_t k, std::size_t n) {
    return (k <= n / 2) ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

AxisMap make_axis_map(std::size_t n, std::size_t m) {
    AxisMap map;
    if (m == n) {
        for (std::size_t k = 0; k < n; ++k) {
            map.idx.push_back({k, k});
            map.w.push_back(1.0);
        }
        return map;
    }
    if (m > n) {
        for (std::size_t k = 0; k < n; ++k) {
            const long ks = signed_freq(k, n);
            if (n % 2 == 0 && k == n / 2) {
                // Nyquist coefficient split across +n/2 and -n/2 of the finer grid
                map.idx.push_back({n / 2, k});
                map.w.push_back(0.5);
                map.idx.push_back({m - n / 2, k});
                map.w.push_back(0.5);
            } else {
                const std::size_t ko = ks >= 0 ? static_cast<std::size_t>(ks) : m + ks;
                map.idx.push_back({ko, k});
                map.w.push_back(1.0);
            }
        }
        return map;
    }
    // m < n: truncate, folding the pair +-m/2 into the coarse Nyquist bin
    for (std::size_t k = 0; k < m; ++k) {
        const long ks = signed_freq(k, m);
        if (m % 2 == 0 && k == m / 2) {
            map.idx.push_back({k, m / 2});
            map.w.push_back(1.0);
            map.idx.push_back({k, n - m / 2});
            map.w.push_back(1.0);
        } else {
            const std::size_t ki = ks >= 0 ? static_cast<std::size_t>(ks) : n + ks;
            map.idx.push_back({k, ki});
            map.w.push_back(1.0);
        }
    }
    return map;
}

CTensor apply_axis_map(const CTensor& t, int axis, std::size_t m, const AxisMap& map, bool transpose) {
    const auto& shape = t.shape();
    std::vector<std::size_t> out_shape = shape;
    out_shape[axis] = m;
    CTensor out(out_shape, cdouble{});

    const auto in_strides = t.strides();
    const std::size_t axis_stride = in_strides[axis];
    const std::size_t n_in = shape[axis];

    // iterate over all lines along `axis`
    const std::size_t lines = t.numel() / n_in;
    const auto out_strides = out.strides();
    const std::size_t out_axis_stride = out_strides[axis];

    for (std::size_t line = 0; line < lines; ++line) {
        // decompose line id into the base offsets of input and output
        std::size_t rem = line, in_base = 0, out_base = 0;
        for (std::size_t a = shape.size(); a-- > 0;) {
            if (static_cast<int>(a) == axis) continue;
            const std::size_t coord = rem % shape[a];
            rem /= shape[a];
            in_base += coord * in_strides[a];
            out_base += coord * out_strides[a];
        }
        for (std::size_t e = 0; e < map.idx.size(); ++e) {
            const std::size_t ko = transpose ? map.idx[e][1] : map.idx[e][0];
            const std::size_t ki = transpose ? map.idx[e][0] : map.idx[e][1];
            out[out_base + ko * out_axis_stride] += map.w[e] * t[in_base + ki * axis_stride];
        }
    }
    return out;
}

}  // namespace

void transform(cdouble* data, std::size_t n, int sign) {
    if (n <= 1) return;
    if (is_pow2(n))
        fft_pow2(data, n, sign);
    else
        fft_bluestein(data, n, sign);
}

void transform_axes(CTensor& t, std::span<const int> axes, int sign) {
    const auto ax = canonical_axes(axes, t.rank());
    const auto strides = t.strides();
    for (int axis : ax) {
        const std::size_t n = t.extent(axis);
        check(n >= 1, "fft: zero-extent axis");
        if (n == 1) continue;
        const std::size_t stride = strides[axis];
        const std::size_t lines = t.numel() / n;
        std::vector<cdouble> scratch(n);
        for (std::size_t line = 0; line < lines; ++line) {
            std::size_t rem = line, base = 0;
            for (std::size_t a = t.rank(); a-- > 0;) {
                if (static_cast<int>(a) == axis) continue;
                base += (rem % t.extent(a)) * strides[a];
                rem /= t.extent(a);
            }
            for (std::size_t k = 0; k < n; ++k) scratch[k] = t[base + k * stride];
            transform(scratch.data(), n, sign);
            for (std::size_t k = 0; k < n; ++k) t[base + k * stride] = scratch[k];
        }
    }
}

CTensor fftn(const Tensor& x, std::span<const int> axes) {
    CTensor c(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) c[i] = cdouble(x[i], 0.0);
    transform_axes(c, axes, -1);
    return c;
}

CTensor fftn(const CTensor& x, std::span<const int> axes) {
    CTensor c = x;
    transform_axes(c, axes, -1);
    return c;
}

CTensor ifftn(const CTensor& x, std::span<const int> axes) {
    CTensor c = x;
    transform_axes(c, axes, +1);
    double scale = 1.0;
    for (int ax : canonical_axes(axes, x.rank())) scale /= static_cast<double>(x.extent(ax));
    for (std::size_t i = 0; i < c.numel(); ++i) c[i] *= scale;
    return c;
}

CTensor fft3(const Tensor& x, std::array<int, 3> axes) {
    check(axes[0] != axes[1] && axes[1] != axes[2] && axes[0] != axes[2], "fft3: duplicate axes");
    return fftn(x, std::span<const int>(axes.data(), 3));
}

CTensor resample_spectrum_axis(const CTensor& t, int axis, std::size_t m) {
    check(axis >= 0 && static_cast<std::size_t>(axis) < t.rank(), "resample: axis out of range");
    check(m >= 1, "resample: zero output extent");
    const AxisMap map = make_axis_map(t.extent(axis), m);
    return apply_axis_map(t, axis, m, map, false);
}

CTensor resample_spectrum_axis_adjoint(const CTensor& t, int axis, std::size_t n_in) {
    check(axis >= 0 && static_cast<std::size_t>(axis) < t.rank(), "resample adjoint: axis out of range");
    const AxisMap map = make_axis_map(n_in, t.extent(axis));
    return apply_axis_map(t, axis, n_in, map, true);
}

CTensor resample_spectrum(const CTensor& t, std::span<const int> axes, std::span<const std::size_t> out_extents) {
    check(axes.size() == out_extents.size(), "resample: axes/extents size mismatch");
    CTensor cur = t;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (cur.extent(axes[i]) != out_extents[i]) cur = resample_spectrum_axis(cur, axes[i], out_extents[i]);
    }
    return cur;
}

CTensor ifft3_complex(const CTensor& spectrum, std::array<int, 3> axes, std::array<std::size_t, 3> out_extents) {
    check(axes[0] != axes[1] && axes[1] != axes[2] && axes[0] != axes[2], "ifft3: duplicate axes");
    double scale = 1.0;
    for (int i = 0; i < 3; ++i) {
        check(out_extents[i] >= 1, "ifft3: zero output extent");
        check(axes[i] >= 0 && static_cast<std::size_t>(axes[i]) < spectrum.rank(), "ifft3: axis out of range");
        scale /= static_cast<double>(spectrum.extent(axes[i]));
    }
    CTensor padded = resample_spectrum(spectrum, std::span<const int>(axes.data(), 3),
                                       std::span<const std::size_t>(out_extents.data(), 3));
    transform_axes(padded, std::span<const int>(axes.data(), 3), +1);
    for (std::size_t i = 0; i < padded.numel(); ++i) padded[i] *= scale;
    return padded;
}

Tensor ifft3(const CTensor& spectrum, std::array<int, 3> axes, std::array<std::size_t, 3> out_extents,
             double imag_tol) {
    const CTensor c = ifft3_complex(spectrum, axes, out_extents);
    double max_im = 0.0, max_val = 0.0;
    for (std::size_t i = 0; i < c.numel(); ++i) {
        max_im = std::max(max_im, std::abs(c[i].imag()));
        max_val = std::max(max_val, std::abs(c[i]));
    }
    const double residue = max_val > 0.0 ? max_im / max_val : max_im;
    g_last_imag_residue = residue;
    if (residue > imag_tol)
        fail("ifft3: spectrum is not conjugate-symmetric (imaginary residue " + std::to_string(residue) + ")");
    Tensor out(c.shape());
    for (std::size_t i = 0; i < c.numel(); ++i) out[i] = c[i].real();
    return out;
}

Tensor spectral_resample(const Tensor& x, std::array<int, 3> axes, std::array<std::size_t, 3> out_extents) {
    return ifft3(fft3(x, axes), axes, out_extents, 1e-6);
}

double last_imag_residue() { return g_last_imag_residue; }

}  // namespace seisuno::fft
