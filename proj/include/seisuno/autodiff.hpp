#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "seisuno/tensor.hpp"

namespace seisuno::ad {

/// Handle to a real-valued node on a Tape.
struct Var {
    std::size_t node = 0;
};

/// Handle to a complex-valued node on a Tape.
struct CVar {
    std::size_t node = 0;
};

/// Reverse-mode tape over dense real and complex tensors.
///
/// Complex gradients follow the real-pair convention: for a complex value z
/// the stored gradient is dL/dRe(z) + i * dL/dIm(z). With that convention the
/// adjoint of a complex-linear map A is its conjugate transpose, and spectra
/// can be optimized with a real-valued optimizer by viewing each complex
/// scalar as two independent reals.
///
/// A tape is single-use: build the graph, call backward() once on a scalar
/// root, read gradients, then discard it.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value, bool needs_grad);
    CVar leaf(CTensor value, bool needs_grad);

    // Elementwise.
    Var add(Var a, Var b);
    Var affine(Var x, double scale, double shift);
    Var relu(Var x);

    /// y[co, s] = sum_ci w[ci, co] * x[ci, s] + b[co], where s runs over all
    /// trailing dimensions of x. Rank and trailing extents are preserved.
    Var channel_linear(Var x, Var w, Var b);

    /// Stack two fields along the leading (channel) dimension.
    Var concat_channels(Var a, Var b);

    /// Unnormalized forward DFT of a [C, X, Y, Z] field over its three
    /// trailing axes.
    CVar fft3(Var x);

    /// Gather the signed-frequency box of half-widths m from a [C, n1, n2, n3]
    /// spectrum: output extents [C, 2*m1-1, 2*m2-1, 2*m3-1], frequency k in
    /// [-(m-1), m-1] stored with non-negative k first (FFT bin order folded).
    CVar extract_modes(CVar spectrum, std::array<std::size_t, 3> m);

    /// Per-frequency channel mixing y[co, k] = sum_ci r_eff[ci, co, k] x[ci, k]
    /// with r_eff(k) = (r(k) + conj(r(-k))) / 2, which makes the implied
    /// spatial kernel real regardless of the raw weights.
    CVar mode_mul(CVar x, CVar r);

    /// Place a mode box on an out_extents grid, inverse transform, and scale
    /// by 1 / prod(in_extents): the box is interpreted as a subset of an
    /// unnormalized spectrum computed on a grid with in_extents points, so
    /// band-limited function values are independent of both grids.
    Var modes_to_field(CVar box, std::array<std::size_t, 3> in_extents, std::array<std::size_t, 3> out_extents);

    /// Resampling inverse of fft3 (see fft::ifft3); in_extents are taken from
    /// the spectrum itself.
    Var field_from_spectrum(CVar spectrum, std::array<std::size_t, 3> out_extents);

    /// Mean of |pred - target| per leading-dimension slice, summed over the
    /// leading dimension. Returns a scalar (shape {1}) node.
    Var mae_channel_sum(Var pred, const Tensor& target);

    /// Sum of all elements, as a scalar node.
    Var sum(Var x);

    /// Fixed-weight inner product sum_i w[i] * x[i], as a scalar node.
    Var dot(Var x, const Tensor& w);

    void backward(Var root);

    const Tensor& value(Var v) const { return nodes_[v.node].rvalue; }
    const CTensor& value(CVar v) const { return nodes_[v.node].cvalue; }
    /// Gradient of the last backward() root w.r.t. this node (zero tensor if
    /// the node does not influence the root).
    const Tensor& grad(Var v);
    const CTensor& grad(CVar v);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor rvalue;
        CTensor cvalue;
        Tensor rgrad;
        CTensor cgrad;
        bool complex = false;
        bool needs_grad = false;
        std::function<void()> back;
    };

    std::size_t push_real(Tensor value, bool needs_grad);
    std::size_t push_complex(CTensor value, bool needs_grad);
    Tensor& rgrad_of(std::size_t node);
    CTensor& cgrad_of(std::size_t node);
    void check_live() const;

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace seisuno::ad
