#include "seisuno/autodiff.hpp"

#include <cmath>
#include <utility>

#include "seisuno/fft.hpp"
#include "seisuno/threads.hpp"

namespace seisuno::ad {

namespace {

// Box index t <-> signed frequency k: t in [0, m) holds k = t, the upper half
// holds k = t - (2m - 1) in [-(m-1), -1]. Mirrors FFT bin ordering.
std::size_t box_to_bin(std::size_t t, std::size_t m, std::size_t n) {
    const long long k = (t < m) ? static_cast<long long>(t) : static_cast<long long>(t) - static_cast<long long>(2 * m - 1);
    return static_cast<std::size_t>((k + static_cast<long long>(n)) % static_cast<long long>(n));
}

std::size_t box_negate(std::size_t t, std::size_t extent) { return t == 0 ? 0 : extent - t; }

void check_box_fits(std::size_t m, std::size_t n) {
    check(m >= 1, "mode box: half-width must be at least 1");
    check(m - 1 <= (n - 1) / 2, "mode box exceeds the grid's alias-free band");
}

std::size_t spatial_numel(const std::vector<std::size_t>& shape) {
    std::size_t s = 1;
    for (std::size_t a = 1; a < shape.size(); ++a) s *= shape[a];
    return s;
}

}  // namespace

void Tape::check_live() const { check(!consumed_, "tape already consumed by backward()"); }

std::size_t Tape::push_real(Tensor value, bool needs_grad) {
    Node n;
    n.rvalue = std::move(value);
    n.complex = false;
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

std::size_t Tape::push_complex(CTensor value, bool needs_grad) {
    Node n;
    n.cvalue = std::move(value);
    n.complex = true;
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

Tensor& Tape::rgrad_of(std::size_t node) {
    Node& n = nodes_[node];
    if (n.rgrad.numel() == 0 && n.rvalue.numel() > 0) n.rgrad = Tensor(n.rvalue.shape());
    return n.rgrad;
}

CTensor& Tape::cgrad_of(std::size_t node) {
    Node& n = nodes_[node];
    if (n.cgrad.numel() == 0 && n.cvalue.numel() > 0) n.cgrad = CTensor(n.cvalue.shape());
    return n.cgrad;
}

const Tensor& Tape::grad(Var v) { return rgrad_of(v.node); }
const CTensor& Tape::grad(CVar v) { return cgrad_of(v.node); }

Var Tape::leaf(Tensor value, bool needs_grad) {
    check_live();
    return Var{push_real(std::move(value), needs_grad)};
}

CVar Tape::leaf(CTensor value, bool needs_grad) {
    check_live();
    return CVar{push_complex(std::move(value), needs_grad)};
}

Var Tape::add(Var a, Var b) {
    check_live();
    const Tensor& xa = nodes_[a.node].rvalue;
    const Tensor& xb = nodes_[b.node].rvalue;
    check(xa.same_shape(xb), "add: shape mismatch");
    Tensor out = xa;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += xb[i];
    const bool needs = nodes_[a.node].needs_grad || nodes_[b.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, a, b]() {
            const Tensor& g = nodes_[id].rgrad;
            if (nodes_[a.node].needs_grad) {
                Tensor& ga = rgrad_of(a.node);
                for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
            }
            if (nodes_[b.node].needs_grad) {
                Tensor& gb = rgrad_of(b.node);
                for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
            }
        };
    }
    return Var{id};
}

Var Tape::affine(Var x, double scale, double shift) {
    check_live();
    const Tensor& v = nodes_[x.node].rvalue;
    Tensor out = v;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = scale * out[i] + shift;
    const bool needs = nodes_[x.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, x, scale]() {
            const Tensor& g = nodes_[id].rgrad;
            Tensor& gx = rgrad_of(x.node);
            for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += scale * g[i];
        };
    }
    return Var{id};
}

Var Tape::relu(Var x) {
    check_live();
    const Tensor& v = nodes_[x.node].rvalue;
    Tensor out = v;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    const bool needs = nodes_[x.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, x]() {
            const Tensor& g = nodes_[id].rgrad;
            const Tensor& v = nodes_[x.node].rvalue;
            Tensor& gx = rgrad_of(x.node);
            for (std::size_t i = 0; i < g.numel(); ++i)
                if (v[i] > 0.0) gx[i] += g[i];
        };
    }
    return Var{id};
}

Var Tape::channel_linear(Var x, Var w, Var b) {
    check_live();
    const Tensor& xv = nodes_[x.node].rvalue;
    const Tensor& wv = nodes_[w.node].rvalue;
    const Tensor& bv = nodes_[b.node].rvalue;
    check(xv.rank() >= 2, "channel_linear: input must have a channel axis plus data axes");
    check(wv.rank() == 2, "channel_linear: weight must be [in, out]");
    check(bv.rank() == 1, "channel_linear: bias must be [out]");
    const std::size_t ci = xv.extent(0);
    const std::size_t co = wv.extent(1);
    check(wv.extent(0) == ci, "channel_linear: weight rows != input channels");
    check(bv.extent(0) == co, "channel_linear: bias size != output channels");
    const std::size_t s = spatial_numel(xv.shape());

    std::vector<std::size_t> out_shape = xv.shape();
    out_shape[0] = co;
    Tensor out(out_shape);
    {
        const double* xp = xv.data();
        const double* wp = wv.data();
        const double* bp = bv.data();
        double* yp = out.data();
        const std::size_t block = 4096;
        const std::size_t nblk = (s + block - 1) / block;
        threads::parallel_for(nblk, [&](std::size_t bi) {
            const std::size_t lo = bi * block;
            const std::size_t hi = std::min(s, lo + block);
            for (std::size_t c = 0; c < co; ++c)
                for (std::size_t i = lo; i < hi; ++i) yp[c * s + i] = bp[c];
            for (std::size_t a = 0; a < ci; ++a) {
                const double* xr = xp + a * s;
                for (std::size_t c = 0; c < co; ++c) {
                    const double wac = wp[a * co + c];
                    double* yr = yp + c * s;
                    for (std::size_t i = lo; i < hi; ++i) yr[i] += wac * xr[i];
                }
            }
        });
    }

    const bool needs = nodes_[x.node].needs_grad || nodes_[w.node].needs_grad || nodes_[b.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, x, w, b, ci, co, s]() {
            const Tensor& g = nodes_[id].rgrad;
            const double* gp = g.data();
            const Tensor& xv = nodes_[x.node].rvalue;
            const Tensor& wv = nodes_[w.node].rvalue;
            if (nodes_[x.node].needs_grad) {
                Tensor& gx = rgrad_of(x.node);
                double* gxp = gx.data();
                const double* wp = wv.data();
                threads::parallel_for(ci, [&](std::size_t a) {
                    double* row = gxp + a * s;
                    for (std::size_t c = 0; c < co; ++c) {
                        const double wac = wp[a * co + c];
                        const double* gr = gp + c * s;
                        for (std::size_t i = 0; i < s; ++i) row[i] += wac * gr[i];
                    }
                });
            }
            if (nodes_[w.node].needs_grad) {
                Tensor& gw = rgrad_of(w.node);
                double* gwp = gw.data();
                const double* xp = xv.data();
                threads::parallel_for(ci * co, [&](std::size_t idx) {
                    const std::size_t a = idx / co;
                    const std::size_t c = idx % co;
                    const double* xr = xp + a * s;
                    const double* gr = gp + c * s;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < s; ++i) acc += xr[i] * gr[i];
                    gwp[a * co + c] += acc;
                });
            }
            if (nodes_[b.node].needs_grad) {
                Tensor& gb = rgrad_of(b.node);
                for (std::size_t c = 0; c < co; ++c) {
                    double acc = 0.0;
                    const double* gr = gp + c * s;
                    for (std::size_t i = 0; i < s; ++i) acc += gr[i];
                    gb[c] += acc;
                }
            }
        };
    }
    return Var{id};
}

Var Tape::concat_channels(Var a, Var b) {
    check_live();
    const Tensor& xa = nodes_[a.node].rvalue;
    const Tensor& xb = nodes_[b.node].rvalue;
    check(xa.rank() == xb.rank() && xa.rank() >= 2, "concat_channels: rank mismatch");
    for (std::size_t i = 1; i < xa.rank(); ++i)
        check(xa.extent(i) == xb.extent(i), "concat_channels: trailing extents differ");
    std::vector<std::size_t> shape = xa.shape();
    shape[0] += xb.extent(0);
    Tensor out(shape);
    std::copy(xa.data(), xa.data() + xa.numel(), out.data());
    std::copy(xb.data(), xb.data() + xb.numel(), out.data() + xa.numel());
    const std::size_t na = xa.numel();
    const bool needs = nodes_[a.node].needs_grad || nodes_[b.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, a, b, na]() {
            const Tensor& g = nodes_[id].rgrad;
            if (nodes_[a.node].needs_grad) {
                Tensor& ga = rgrad_of(a.node);
                for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
            }
            if (nodes_[b.node].needs_grad) {
                Tensor& gb = rgrad_of(b.node);
                for (std::size_t i = 0; i < g.numel() - na; ++i) gb[i] += g[na + i];
            }
        };
    }
    return Var{id};
}

CVar Tape::fft3(Var x) {
    check_live();
    const Tensor& v = nodes_[x.node].rvalue;
    check(v.rank() == 4, "fft3: expected [C, X, Y, Z]");
    const std::array<int, 3> axes{1, 2, 3};
    CTensor out = fft::fftn(v, std::span<const int>(axes.data(), 3));
    const bool needs = nodes_[x.node].needs_grad;
    const std::size_t id = push_complex(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, x]() {
            CTensor g = nodes_[id].cgrad;
            const std::array<int, 3> axes{1, 2, 3};
            fft::transform_axes(g, std::span<const int>(axes.data(), 3), +1);
            Tensor& gx = rgrad_of(x.node);
            for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g[i].real();
        };
    }
    return CVar{id};
}

CVar Tape::extract_modes(CVar spectrum, std::array<std::size_t, 3> m) {
    check_live();
    const CTensor& s = nodes_[spectrum.node].cvalue;
    check(s.rank() == 4, "extract_modes: expected [C, n1, n2, n3]");
    const std::array<std::size_t, 3> n{s.extent(1), s.extent(2), s.extent(3)};
    for (int a = 0; a < 3; ++a) check_box_fits(m[static_cast<std::size_t>(a)], n[static_cast<std::size_t>(a)]);
    const std::size_t c = s.extent(0);
    const std::array<std::size_t, 3> b{2 * m[0] - 1, 2 * m[1] - 1, 2 * m[2] - 1};
    CTensor out({c, b[0], b[1], b[2]});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t t1 = 0; t1 < b[0]; ++t1)
            for (std::size_t t2 = 0; t2 < b[1]; ++t2)
                for (std::size_t t3 = 0; t3 < b[2]; ++t3)
                    out.at({ch, t1, t2, t3}) =
                        s.at({ch, box_to_bin(t1, m[0], n[0]), box_to_bin(t2, m[1], n[1]), box_to_bin(t3, m[2], n[2])});
    const bool needs = nodes_[spectrum.node].needs_grad;
    const std::size_t id = push_complex(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, spectrum, m, n, b, c]() {
            const CTensor& g = nodes_[id].cgrad;
            CTensor& gs = cgrad_of(spectrum.node);
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t t1 = 0; t1 < b[0]; ++t1)
                    for (std::size_t t2 = 0; t2 < b[1]; ++t2)
                        for (std::size_t t3 = 0; t3 < b[2]; ++t3)
                            gs.at({ch, box_to_bin(t1, m[0], n[0]), box_to_bin(t2, m[1], n[1]),
                                   box_to_bin(t3, m[2], n[2])}) += g.at({ch, t1, t2, t3});
        };
    }
    return CVar{id};
}

CVar Tape::mode_mul(CVar x, CVar r) {
    check_live();
    const CTensor& xv = nodes_[x.node].cvalue;
    const CTensor& rv = nodes_[r.node].cvalue;
    check(xv.rank() == 4, "mode_mul: x must be [Ci, b1, b2, b3]");
    check(rv.rank() == 5, "mode_mul: r must be [Ci, Co, b1, b2, b3]");
    check(rv.extent(0) == xv.extent(0), "mode_mul: channel mismatch");
    for (int a = 0; a < 3; ++a)
        check(rv.extent(static_cast<std::size_t>(a) + 2) == xv.extent(static_cast<std::size_t>(a) + 1),
              "mode_mul: box extents differ");
    const std::size_t ci = xv.extent(0);
    const std::size_t co = rv.extent(1);
    const std::array<std::size_t, 3> b{xv.extent(1), xv.extent(2), xv.extent(3)};
    const std::size_t nk = b[0] * b[1] * b[2];

    // Flat index of -k for every box point.
    std::vector<std::size_t> neg(nk);
    for (std::size_t t1 = 0; t1 < b[0]; ++t1)
        for (std::size_t t2 = 0; t2 < b[1]; ++t2)
            for (std::size_t t3 = 0; t3 < b[2]; ++t3)
                neg[(t1 * b[1] + t2) * b[2] + t3] =
                    (box_negate(t1, b[0]) * b[1] + box_negate(t2, b[1])) * b[2] + box_negate(t3, b[2]);

    auto r_eff = [&](std::size_t a, std::size_t c, std::size_t k) {
        const cdouble rk = rv[(a * co + c) * nk + k];
        const cdouble rnk = rv[(a * co + c) * nk + neg[k]];
        return 0.5 * (rk + std::conj(rnk));
    };

    CTensor out({co, b[0], b[1], b[2]});
    for (std::size_t c = 0; c < co; ++c)
        for (std::size_t k = 0; k < nk; ++k) {
            cdouble acc(0.0, 0.0);
            for (std::size_t a = 0; a < ci; ++a) acc += r_eff(a, c, k) * xv[a * nk + k];
            out[c * nk + k] = acc;
        }

    const bool needs = nodes_[x.node].needs_grad || nodes_[r.node].needs_grad;
    const std::size_t id = push_complex(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, x, r, ci, co, nk, neg = std::move(neg)]() {
            const CTensor& g = nodes_[id].cgrad;
            const CTensor& xv = nodes_[x.node].cvalue;
            const CTensor& rv = nodes_[r.node].cvalue;
            if (nodes_[x.node].needs_grad) {
                CTensor& gx = cgrad_of(x.node);
                for (std::size_t a = 0; a < ci; ++a)
                    for (std::size_t k = 0; k < nk; ++k) {
                        cdouble acc(0.0, 0.0);
                        for (std::size_t c = 0; c < co; ++c) {
                            const cdouble rk = rv[(a * co + c) * nk + k];
                            const cdouble rnk = rv[(a * co + c) * nk + neg[k]];
                            acc += std::conj(0.5 * (rk + std::conj(rnk))) * g[c * nk + k];
                        }
                        gx[a * nk + k] += acc;
                    }
            }
            if (nodes_[r.node].needs_grad) {
                CTensor& gr = cgrad_of(r.node);
                for (std::size_t a = 0; a < ci; ++a)
                    for (std::size_t c = 0; c < co; ++c)
                        for (std::size_t k = 0; k < nk; ++k) {
                            const cdouble term = g[c * nk + k] * std::conj(xv[a * nk + k]) +
                                                 std::conj(g[c * nk + neg[k]]) * xv[a * nk + neg[k]];
                            gr[(a * co + c) * nk + k] += 0.5 * term;
                        }
            }
        };
    }
    return CVar{id};
}

Var Tape::modes_to_field(CVar box, std::array<std::size_t, 3> in_extents, std::array<std::size_t, 3> out_extents) {
    check_live();
    const CTensor& bx = nodes_[box.node].cvalue;
    check(bx.rank() == 4, "modes_to_field: expected [C, b1, b2, b3]");
    const std::size_t c = bx.extent(0);
    std::array<std::size_t, 3> m{};
    for (int a = 0; a < 3; ++a) {
        const std::size_t ext = bx.extent(static_cast<std::size_t>(a) + 1);
        check(ext % 2 == 1, "modes_to_field: box extents must be odd");
        m[static_cast<std::size_t>(a)] = (ext + 1) / 2;
        check_box_fits(m[static_cast<std::size_t>(a)], in_extents[static_cast<std::size_t>(a)]);
        check_box_fits(m[static_cast<std::size_t>(a)], out_extents[static_cast<std::size_t>(a)]);
    }
    const std::array<std::size_t, 3> b{2 * m[0] - 1, 2 * m[1] - 1, 2 * m[2] - 1};
    const double in_count =
        static_cast<double>(in_extents[0]) * static_cast<double>(in_extents[1]) * static_cast<double>(in_extents[2]);

    CTensor full({c, out_extents[0], out_extents[1], out_extents[2]});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t t1 = 0; t1 < b[0]; ++t1)
            for (std::size_t t2 = 0; t2 < b[1]; ++t2)
                for (std::size_t t3 = 0; t3 < b[2]; ++t3)
                    full.at({ch, box_to_bin(t1, m[0], out_extents[0]), box_to_bin(t2, m[1], out_extents[1]),
                             box_to_bin(t3, m[2], out_extents[2])}) = bx.at({ch, t1, t2, t3});
    const std::array<int, 3> axes{1, 2, 3};
    fft::transform_axes(full, std::span<const int>(axes.data(), 3), +1);
    Tensor out({c, out_extents[0], out_extents[1], out_extents[2]});
    double max_imag = 0.0, max_val = 0.0;
    for (std::size_t i = 0; i < out.numel(); ++i) {
        const cdouble v = full[i] / in_count;
        out[i] = v.real();
        max_imag = std::max(max_imag, std::abs(v.imag()));
        max_val = std::max(max_val, std::abs(v));
    }
    check(max_imag <= 1e-8 * std::max(max_val, 1e-300) || max_imag < 1e-12,
          "modes_to_field: spectrum is not conjugate-symmetric");

    const bool needs = nodes_[box.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, box, m, b, c, out_extents, in_count]() {
            const Tensor& g = nodes_[id].rgrad;
            CTensor gc(g.shape());
            for (std::size_t i = 0; i < g.numel(); ++i) gc[i] = cdouble(g[i], 0.0);
            const std::array<int, 3> axes{1, 2, 3};
            fft::transform_axes(gc, std::span<const int>(axes.data(), 3), -1);
            CTensor& gb = cgrad_of(box.node);
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t t1 = 0; t1 < b[0]; ++t1)
                    for (std::size_t t2 = 0; t2 < b[1]; ++t2)
                        for (std::size_t t3 = 0; t3 < b[2]; ++t3)
                            gb.at({ch, t1, t2, t3}) +=
                                gc.at({ch, box_to_bin(t1, m[0], out_extents[0]), box_to_bin(t2, m[1], out_extents[1]),
                                       box_to_bin(t3, m[2], out_extents[2])}) /
                                in_count;
        };
    }
    return Var{id};
}

Var Tape::field_from_spectrum(CVar spectrum, std::array<std::size_t, 3> out_extents) {
    check_live();
    const CTensor& s = nodes_[spectrum.node].cvalue;
    check(s.rank() == 4, "field_from_spectrum: expected [C, n1, n2, n3]");
    const std::array<std::size_t, 3> n{s.extent(1), s.extent(2), s.extent(3)};
    Tensor out = fft::ifft3(s, {1, 2, 3}, out_extents);
    const bool needs = nodes_[spectrum.node].needs_grad;
    const std::size_t rid = push_real(std::move(out), needs);
    if (needs) {
        const double in_count = static_cast<double>(n[0]) * static_cast<double>(n[1]) * static_cast<double>(n[2]);
        nodes_[rid].back = [this, rid, spectrum, n, in_count]() {
            const Tensor& g = nodes_[rid].rgrad;
            const std::array<int, 3> axes{1, 2, 3};
            CTensor gc = fft::fftn(g, std::span<const int>(axes.data(), 3));
            for (int a = 0; a < 3; ++a)
                gc = fft::resample_spectrum_axis_adjoint(gc, a + 1, n[static_cast<std::size_t>(a)]);
            CTensor& gs = cgrad_of(spectrum.node);
            for (std::size_t i = 0; i < gs.numel(); ++i) gs[i] += gc[i] / in_count;
        };
    }
    return Var{rid};
}

Var Tape::mae_channel_sum(Var pred, const Tensor& target) {
    check_live();
    const Tensor& p = nodes_[pred.node].rvalue;
    check(p.same_shape(target), "mae_channel_sum: prediction and target shapes differ");
    check(p.rank() >= 2, "mae_channel_sum: need a leading channel axis");
    const std::size_t c = p.extent(0);
    const std::size_t s = spatial_numel(p.shape());
    double loss = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s; ++i) acc += std::abs(p[ch * s + i] - target[ch * s + i]);
        loss += acc / static_cast<double>(s);
    }
    Tensor out({1});
    out[0] = loss;
    const bool needs = nodes_[pred.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, pred, target, c, s]() {
            const double up = nodes_[id].rgrad[0];
            const Tensor& p = nodes_[pred.node].rvalue;
            Tensor& gp = rgrad_of(pred.node);
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t i = 0; i < s; ++i) {
                    const double d = p[ch * s + i] - target[ch * s + i];
                    const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                    gp[ch * s + i] += up * sgn / static_cast<double>(s);
                }
        };
    }
    return Var{id};
}

Var Tape::sum(Var x) {
    check_live();
    const Tensor& v = nodes_[x.node].rvalue;
    Tensor out({1});
    out[0] = seisuno::sum(v);
    const bool needs = nodes_[x.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, x]() {
            const double up = nodes_[id].rgrad[0];
            Tensor& gx = rgrad_of(x.node);
            for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += up;
        };
    }
    return Var{id};
}

Var Tape::dot(Var x, const Tensor& w) {
    check_live();
    const Tensor& v = nodes_[x.node].rvalue;
    check(v.same_shape(w), "dot: shape mismatch");
    Tensor out({1});
    double acc = 0.0;
    for (std::size_t i = 0; i < v.numel(); ++i) acc += v[i] * w[i];
    out[0] = acc;
    const bool needs = nodes_[x.node].needs_grad;
    const std::size_t id = push_real(std::move(out), needs);
    if (needs) {
        nodes_[id].back = [this, id, x, w]() {
            const double up = nodes_[id].rgrad[0];
            Tensor& gx = rgrad_of(x.node);
            for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += up * w[i];
        };
    }
    return Var{id};
}

void Tape::backward(Var root) {
    check_live();
    consumed_ = true;
    Node& r = nodes_[root.node];
    check(!r.complex && r.rvalue.numel() == 1, "backward: root must be a real scalar");
    check(r.needs_grad, "backward: root does not depend on any differentiable leaf");
    rgrad_of(root.node)[0] = 1.0;
    for (std::size_t i = root.node + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || !n.back) continue;
        const bool touched = n.complex ? n.cgrad.numel() > 0 : n.rgrad.numel() > 0;
        if (!touched) continue;
        n.back();
    }
}

}  // namespace seisuno::ad
