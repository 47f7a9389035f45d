#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <vector>

#include "seisuno/autodiff.hpp"
#include "seisuno/container.hpp"
#include "seisuno/fft.hpp"
#include "seisuno/random.hpp"
#include "seisuno/uno.hpp"

using namespace seisuno;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

Tensor random_field(std::vector<std::size_t> shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    rng::RandomStream rs(seed);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rs.uniform(lo, hi);
    return t;
}

// Signed frequency of a mode-box index: the lower half holds k = t, the upper
// half k = t - (2m - 1). Matches the FFT bin ordering of the spectral ops.
long long box_k(std::size_t t, std::size_t m) {
    return t < m ? static_cast<long long>(t) : static_cast<long long>(t) - static_cast<long long>(2 * m - 1);
}

std::size_t box_neg(std::size_t t, std::size_t extent) { return t == 0 ? 0 : extent - t; }

// Conjugate-symmetric spectral weights: R(-k) = conj(R(k)), real at k = 0,
// so the symmetrized weights the layer applies equal R itself.
CTensor hermitian_weights(std::size_t ci, std::size_t co, std::size_t m, std::uint64_t seed) {
    const std::size_t b = 2 * m - 1;
    CTensor r({ci, co, b, b, b});
    rng::RandomStream rs(seed);
    for (std::size_t a = 0; a < ci; ++a)
        for (std::size_t c = 0; c < co; ++c)
            for (std::size_t t1 = 0; t1 < b; ++t1)
                for (std::size_t t2 = 0; t2 < b; ++t2)
                    for (std::size_t t3 = 0; t3 < b; ++t3) {
                        const std::size_t flat = (t1 * b + t2) * b + t3;
                        const std::size_t neg = (box_neg(t1, b) * b + box_neg(t2, b)) * b + box_neg(t3, b);
                        if (flat > neg) continue;  // filled from the mirror point
                        const double re = rs.uniform(-1.0, 1.0);
                        const double im = flat == neg ? 0.0 : rs.uniform(-1.0, 1.0);
                        r.at({a, c, t1, t2, t3}) = cdouble(re, im);
                        std::size_t n1 = box_neg(t1, b), n2 = box_neg(t2, b), n3 = box_neg(t3, b);
                        r.at({a, c, n1, n2, n3}) = cdouble(re, -im);
                    }
    return r;
}

}  // namespace

TEST_CASE("schedules validate and hit their pinned parameter budgets") {
    const uno::UnoSchedule full = uno::UnoSchedule::full64();
    const uno::UnoSchedule d32 = uno::UnoSchedule::desk32();
    const uno::UnoSchedule d16 = uno::UnoSchedule::desk16();
    const uno::UnoSchedule tiny = uno::UnoSchedule::tiny4();
    CHECK_NOTHROW(full.validate());
    CHECK_NOTHROW(d32.validate());
    CHECK_NOTHROW(d16.validate());
    CHECK_NOTHROW(tiny.validate());

    // closed-form counts, pinned by hand from the width/mode tables
    CHECK(full.parameter_count() == 84'923'603);  // design target: near 85M
    CHECK(d32.parameter_count() == 123'019);      // desk target: near 100K
    CHECK(d16.parameter_count() == 123'019);
    CHECK(tiny.parameter_count() == 22'003);

    // the last layer doubles the third axis: depth in, time out
    CHECK(full.output_res() == std::array<std::size_t, 3>{64, 64, 128});
    CHECK(d16.output_res() == std::array<std::size_t, 3>{16, 16, 32});
    CHECK(full.layers.back().activation == false);

    // skip concatenation widens decoder inputs by the mirrored encoder width
    const std::array<std::size_t, 8> want_in{8, 12, 16, 16, 32, 32, 28, 24};
    for (std::size_t l = 0; l < 8; ++l) CHECK(d16.layer_in_channels(l) == want_in[l]);

    CHECK(uno::UnoSchedule::by_name("desk16").name == "desk16");
    CHECK_THROWS_AS(uno::UnoSchedule::by_name("nope"), std::runtime_error);
}

TEST_CASE("schedule validation rejects malformed plans") {
    uno::UnoSchedule s = uno::UnoSchedule::desk16();
    s.layers.pop_back();
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    s = uno::UnoSchedule::desk16();
    s.layers[1].out_res = {12, 12, 12};  // grows past layer 1's 8^3 output
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    s = uno::UnoSchedule::desk16();
    s.layers[6].out_res = {8, 8, 8};  // decoder shrinking again
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    s = uno::UnoSchedule::desk16();
    s.layers[2].modes = {3, 3, 3};  // does not fit the 4^3 bottleneck band
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    s = uno::UnoSchedule::desk16();
    s.v0_channels = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("enumerated model parameters match the closed-form count") {
    for (const char* name : {"desk32", "desk16", "tiny4"}) {
        const uno::UnoSchedule s = uno::UnoSchedule::by_name(name);
        uno::UnoModel model(s, 17);
        CHECK(model.parameter_count() == s.parameter_count());
        const auto refs = model.params();
        CHECK(refs.real.size() == 4 + 8 + 12);
        CHECK(refs.complex.size() == 8);
        CHECK(refs.real_names[0] == "lift.w1");
        CHECK(refs.real_names[4] == "layer1.w");
        CHECK(refs.real_names[12] == "head_e.w1");
        CHECK(refs.complex_names[7] == "layer8.r");
    }
}

TEST_CASE("positional encoding samples voxel centers on the unit cube") {
    const Tensor enc = uno::positional_encoding({2, 2, 2});
    REQUIRE(enc.shape() == std::vector<std::size_t>{3, 2, 2, 2});
    CHECK(enc.at({0, 0, 1, 1}) == doctest::Approx(0.25));
    CHECK(enc.at({0, 1, 0, 0}) == doctest::Approx(0.75));
    CHECK(enc.at({1, 1, 0, 1}) == doctest::Approx(0.25));
    CHECK(enc.at({2, 0, 0, 1}) == doctest::Approx(0.75));

    const Tensor e4 = uno::positional_encoding({4, 2, 2});
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(e4.at({0, i, 0, 0}) == doctest::Approx(0.125 + 0.25 * static_cast<double>(i)));
}

TEST_CASE("input standardization squares the velocity then centers and scales") {
    uno::InputNorm norm{2.5e6, 1.0e6, 0.25};
    Tensor vs({2});
    vs[0] = 1000.0;
    vs[1] = 2000.0;
    const Tensor a = norm.apply(vs);
    CHECK(a[0] == doctest::Approx(-0.375));
    CHECK(a[1] == doctest::Approx(0.375));

    uno::InputNorm bad{0.0, 0.0, 0.25};
    CHECK_THROWS_AS(bad.apply(vs), std::invalid_argument);
}

TEST_CASE("spectral weights are symmetrized: R_eff(k) = (R(k) + conj(R(-k))) / 2") {
    // one retained mode per axis except axis 2 with k in {-1, 0, 1}
    CTensor x({1, 1, 3, 1});
    x.at({0, 0, 0, 0}) = cdouble(2.0, 0.0);   // k = 0 (real, as for a real field)
    x.at({0, 0, 1, 0}) = cdouble(1.0, 0.5);   // k = +1
    x.at({0, 0, 2, 0}) = cdouble(1.0, -0.5);  // k = -1
    CTensor r({1, 1, 1, 3, 1});
    r.at({0, 0, 0, 0, 0}) = cdouble(0.3, 0.7);
    r.at({0, 0, 0, 1, 0}) = cdouble(0.2, -0.4);
    r.at({0, 0, 0, 2, 0}) = cdouble(-0.6, 0.1);

    ad::Tape tape;
    const ad::CVar out = tape.mode_mul(tape.leaf(x, false), tape.leaf(r, false));
    const CTensor& o = tape.value(out);
    const cdouble dc = 0.5 * (cdouble(0.3, 0.7) + std::conj(cdouble(0.3, 0.7))) * x.at({0, 0, 0, 0});
    const cdouble pos = 0.5 * (cdouble(0.2, -0.4) + std::conj(cdouble(-0.6, 0.1))) * x.at({0, 0, 1, 0});
    const cdouble neg = 0.5 * (cdouble(-0.6, 0.1) + std::conj(cdouble(0.2, -0.4))) * x.at({0, 0, 2, 0});
    CHECK(std::abs(o.at({0, 0, 0, 0}) - dc) < 1e-15);
    CHECK(std::abs(o.at({0, 0, 1, 0}) - pos) < 1e-15);
    CHECK(std::abs(o.at({0, 0, 2, 0}) - neg) < 1e-15);
    // symmetrized output of a conjugate-symmetric input stays conjugate-symmetric
    CHECK(std::abs(o.at({0, 0, 2, 0}) - std::conj(o.at({0, 0, 1, 0}))) < 1e-15);
}

TEST_CASE("spectral convolution matches a direct circular convolution oracle") {
    const std::size_t n = 8, m = 4, ci = 2, co = 2;
    const std::size_t b = 2 * m - 1;
    const Tensor x = random_field({ci, n, n, n}, 41);
    const CTensor r = hermitian_weights(ci, co, m, 42);

    ad::Tape tape;
    const ad::Var xv = tape.leaf(x, false);
    const ad::CVar box = tape.extract_modes(tape.fft3(xv), {m, m, m});
    const ad::Var y = tape.modes_to_field(tape.mode_mul(box, tape.leaf(r, false)), {n, n, n}, {n, n, n});
    const Tensor& got = tape.value(y);

    // kernel from an explicit trigonometric sum, independent of the FFT code
    const double vol = static_cast<double>(n * n * n);
    std::vector<double> kernel(ci * co * n * n * n, 0.0);
    for (std::size_t a = 0; a < ci; ++a)
        for (std::size_t c = 0; c < co; ++c)
            for (std::size_t d1 = 0; d1 < n; ++d1)
                for (std::size_t d2 = 0; d2 < n; ++d2)
                    for (std::size_t d3 = 0; d3 < n; ++d3) {
                        cdouble acc(0.0, 0.0);
                        for (std::size_t t1 = 0; t1 < b; ++t1)
                            for (std::size_t t2 = 0; t2 < b; ++t2)
                                for (std::size_t t3 = 0; t3 < b; ++t3) {
                                    const double phase = 2.0 * kPi *
                                                         (static_cast<double>(box_k(t1, m) * static_cast<long long>(d1)) +
                                                          static_cast<double>(box_k(t2, m) * static_cast<long long>(d2)) +
                                                          static_cast<double>(box_k(t3, m) * static_cast<long long>(d3))) /
                                                         static_cast<double>(n);
                                    acc += r.at({a, c, t1, t2, t3}) * std::polar(1.0, phase);
                                }
                        REQUIRE(std::abs(acc.imag()) < 1e-9);
                        kernel[(((a * co + c) * n + d1) * n + d2) * n + d3] = acc.real() / vol;
                    }

    Tensor want({co, n, n, n});
    for (std::size_t c = 0; c < co; ++c)
        for (std::size_t s1 = 0; s1 < n; ++s1)
            for (std::size_t s2 = 0; s2 < n; ++s2)
                for (std::size_t s3 = 0; s3 < n; ++s3) {
                    double acc = 0.0;
                    for (std::size_t a = 0; a < ci; ++a)
                        for (std::size_t t1 = 0; t1 < n; ++t1)
                            for (std::size_t t2 = 0; t2 < n; ++t2)
                                for (std::size_t t3 = 0; t3 < n; ++t3) {
                                    const std::size_t d1 = (s1 + n - t1) % n;
                                    const std::size_t d2 = (s2 + n - t2) % n;
                                    const std::size_t d3 = (s3 + n - t3) % n;
                                    acc += x.at({a, t1, t2, t3}) *
                                           kernel[(((a * co + c) * n + d1) * n + d2) * n + d3];
                                }
                    want.at({c, s1, s2, s3}) = acc;
                }

    CHECK(rel_l2_error(got, want) < 1e-10);
}

TEST_CASE("identity spectral weights reproduce any field on an odd grid") {
    // n = 7, m = 4: the box covers every bin, so R = per-mode identity is exact
    const std::size_t n = 7, m = 4;
    const Tensor x = random_field({2, n, n, n}, 5);
    CTensor r({2, 2, 2 * m - 1, 2 * m - 1, 2 * m - 1});
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t t = 0; t < (2 * m - 1) * (2 * m - 1) * (2 * m - 1); ++t)
            r[(a * 2 + a) * (2 * m - 1) * (2 * m - 1) * (2 * m - 1) + t] = cdouble(1.0, 0.0);

    ad::Tape tape;
    const ad::CVar box = tape.extract_modes(tape.fft3(tape.leaf(x, false)), {m, m, m});
    const ad::Var y = tape.modes_to_field(tape.mode_mul(box, tape.leaf(r, false)), {n, n, n}, {n, n, n});
    CHECK(rel_l2_error(tape.value(y), x) < 1e-12);
}

TEST_CASE("pass-through layer: zero spectral weights, identity pointwise path") {
    const std::size_t n = 6, c = 3;
    const Tensor x = random_field({c, n, n, n}, 9, 0.0, 2.0);  // non-negative, relu transparent
    CTensor r({c, c, 3, 3, 3});
    Tensor w({c, c});
    for (std::size_t i = 0; i < c; ++i) w.at({i, i}) = 1.0;

    ad::Tape tape;
    const ad::Var xv = tape.leaf(x, false);
    const ad::CVar spec = tape.fft3(xv);
    const ad::Var y1 = tape.modes_to_field(tape.mode_mul(tape.extract_modes(spec, {2, 2, 2}), tape.leaf(r, false)),
                                           {n, n, n}, {n, n, n});
    const ad::Var y2 = tape.channel_linear(xv, tape.leaf(w, false), tape.leaf(Tensor({c}), false));
    const ad::Var out = tape.relu(tape.add(y1, y2));
    CHECK(rel_l2_error(tape.value(out), x) < 1e-14);
}

TEST_CASE("constant fields engage only the DC entry of the spectral weights") {
    const std::size_t n = 5, ci = 2, co = 3;
    Tensor x({ci, n, n, n});
    for (std::size_t s = 0; s < n * n * n; ++s) {
        x[s] = 1.5;
        x[n * n * n + s] = -2.0;
    }
    const CTensor r = hermitian_weights(ci, co, 2, 77);  // DC entries real by construction

    ad::Tape tape;
    const ad::CVar box = tape.extract_modes(tape.fft3(tape.leaf(x, false)), {2, 2, 2});
    const ad::Var y = tape.modes_to_field(tape.mode_mul(box, tape.leaf(r, false)), {n, n, n}, {n, n, n});
    const Tensor& got = tape.value(y);
    for (std::size_t c = 0; c < co; ++c) {
        const double want = 1.5 * r.at({0, c, 0, 0, 0}).real() + -2.0 * r.at({1, c, 0, 0, 0}).real();
        for (std::size_t s = 0; s < n * n * n; ++s)
            CHECK(got[c * n * n * n + s] == doctest::Approx(want).epsilon(1e-12));
    }
}

namespace {

// Finite-difference comparison. A relu or |.| kink inside (-eps, +eps) makes
// the straddling central difference wrong by design; the one-sided difference
// that stays on the original smooth piece is still exact, so the entry passes
// if the analytic value matches any of the three estimates.
template <typename LossFn>
void check_grad_entry(LossFn&& loss, double baseline, double& slot, double analytic, double eps = 1e-5) {
    const double saved = slot;
    slot = saved + eps;
    const double up = loss();
    slot = saved - eps;
    const double down = loss();
    slot = saved;
    const double central = (up - down) / (2.0 * eps);
    const double err = std::min({std::abs(analytic - central), std::abs(analytic - (up - baseline) / eps),
                                 std::abs(analytic - (baseline - down) / eps)});
    const double tol = 1e-4 * std::max(1.0, std::abs(central)) + 1e-7;
    CHECK(err < tol);
}

}  // namespace

TEST_CASE("gradient check: pointwise uplift chain with relu and mae") {
    const Tensor feat = random_field({4, 3, 3, 3}, 21);
    const Tensor target = random_field({2, 3, 3, 3}, 22);
    Tensor w1 = random_field({4, 5}, 23, -0.5, 0.5);
    Tensor b1 = random_field({5}, 24, -0.1, 0.1);
    Tensor w2 = random_field({5, 2}, 25, -0.5, 0.5);
    Tensor b2 = random_field({2}, 26, -0.1, 0.1);

    auto loss_value = [&]() {
        ad::Tape t;
        const ad::Var h = t.relu(t.channel_linear(t.leaf(feat, false), t.leaf(w1, false), t.leaf(b1, false)));
        const ad::Var o = t.channel_linear(h, t.leaf(w2, false), t.leaf(b2, false));
        return t.value(t.mae_channel_sum(o, target))[0];
    };

    ad::Tape tape;
    const ad::Var vw1 = tape.leaf(w1, true), vb1 = tape.leaf(b1, true);
    const ad::Var vw2 = tape.leaf(w2, true), vb2 = tape.leaf(b2, true);
    const ad::Var h = tape.relu(tape.channel_linear(tape.leaf(feat, false), vw1, vb1));
    const ad::Var o = tape.channel_linear(h, vw2, vb2);
    tape.backward(tape.mae_channel_sum(o, target));

    const double f0 = loss_value();
    for (std::size_t i = 0; i < w1.numel(); ++i) check_grad_entry(loss_value, f0, w1[i], tape.grad(vw1)[i]);
    for (std::size_t i = 0; i < b1.numel(); ++i) check_grad_entry(loss_value, f0, b1[i], tape.grad(vb1)[i]);
    for (std::size_t i = 0; i < w2.numel(); ++i) check_grad_entry(loss_value, f0, w2[i], tape.grad(vw2)[i]);
    for (std::size_t i = 0; i < b2.numel(); ++i) check_grad_entry(loss_value, f0, b2[i], tape.grad(vb2)[i]);
}

TEST_CASE("gradient check: one Fourier layer in the spectral and pointwise weights") {
    const std::size_t n = 4, m = 2, c = 2;
    const Tensor x = random_field({c, n, n, n}, 31);
    const Tensor target = random_field({c, n, n, n}, 32);
    CTensor r({c, c, 3, 3, 3});
    {
        rng::RandomStream rs(33);
        for (std::size_t i = 0; i < r.numel(); ++i) r[i] = cdouble(rs.uniform(-0.3, 0.3), rs.uniform(-0.3, 0.3));
    }
    Tensor w = random_field({c, c}, 34, -0.5, 0.5);

    auto loss_value = [&]() {
        ad::Tape t;
        const ad::Var xv = t.leaf(x, false);
        const ad::CVar spec = t.fft3(xv);
        const ad::Var y1 = t.modes_to_field(t.mode_mul(t.extract_modes(spec, {m, m, m}), t.leaf(r, false)),
                                            {n, n, n}, {n, n, n});
        const ad::Var y2 = t.channel_linear(xv, t.leaf(w, false), t.leaf(Tensor({c}), false));
        return t.value(t.mae_channel_sum(t.relu(t.add(y1, y2)), target))[0];
    };

    ad::Tape tape;
    const ad::Var xv = tape.leaf(x, false);
    const ad::CVar rv = tape.leaf(r, true);
    const ad::Var wv = tape.leaf(w, true);
    const ad::CVar spec = tape.fft3(xv);
    const ad::Var y1 = tape.modes_to_field(tape.mode_mul(tape.extract_modes(spec, {m, m, m}), rv), {n, n, n}, {n, n, n});
    const ad::Var y2 = tape.channel_linear(xv, wv, tape.leaf(Tensor({c}), false));
    tape.backward(tape.mae_channel_sum(tape.relu(tape.add(y1, y2)), target));

    const double f0 = loss_value();
    for (std::size_t i = 0; i < w.numel(); ++i) check_grad_entry(loss_value, f0, w[i], tape.grad(wv)[i]);
    // complex entries: real and imaginary parts are independent coordinates,
    // and the tape convention is grad = dL/dRe + i dL/dIm
    const CTensor& gr = tape.grad(rv);
    for (std::size_t i = 0; i < r.numel(); i += 3) {
        double* parts = reinterpret_cast<double*>(&r[i]);
        check_grad_entry(loss_value, f0, parts[0], gr[i].real());
        check_grad_entry(loss_value, f0, parts[1], gr[i].imag());
    }
}

TEST_CASE("gradient check: full small operator against finite differences") {
    uno::UnoModel model(uno::UnoSchedule::tiny4(), 3);
    model.set_norm({4.0e6, 1.5e6, 0.25});
    const Tensor vs = random_field({4, 4, 4}, 35, 1600.0, 3200.0);
    const Tensor target = random_field({3, 4, 4, 8}, 36);

    auto loss_value = [&]() {
        ad::Tape t;
        const auto g = model.forward(t, vs, false);
        return t.value(t.mae_channel_sum(g.output, target))[0];
    };

    ad::Tape tape;
    const auto g = model.forward(tape, vs, true);
    tape.backward(tape.mae_channel_sum(g.output, target));

    auto refs = model.params();
    REQUIRE(g.real_params.size() == refs.real.size());
    REQUIRE(g.complex_params.size() == refs.complex.size());
    const double f0 = loss_value();
    for (std::size_t p = 0; p < refs.real.size(); ++p) {
        Tensor& t = *refs.real[p];
        const Tensor& grad = tape.grad(g.real_params[p]);
        REQUIRE(grad.same_shape(t));
        const std::size_t stride = std::max<std::size_t>(1, t.numel() / 5);
        for (std::size_t i = 0; i < t.numel(); i += stride) check_grad_entry(loss_value, f0, t[i], grad[i]);
    }
    for (std::size_t p = 0; p < refs.complex.size(); ++p) {
        CTensor& t = *refs.complex[p];
        const CTensor& grad = tape.grad(g.complex_params[p]);
        REQUIRE(grad.same_shape(t));
        const std::size_t stride = std::max<std::size_t>(1, t.numel() / 4);
        for (std::size_t i = 0; i < t.numel(); i += stride) {
            double* parts = reinterpret_cast<double*>(&t[i]);
            check_grad_entry(loss_value, f0, parts[0], grad[i].real());
            check_grad_entry(loss_value, f0, parts[1], grad[i].imag());
        }
    }
}

TEST_CASE("forward output shapes follow the schedule and scale with the input") {
    uno::UnoModel tiny(uno::UnoSchedule::tiny4(), 1);
    tiny.set_norm({4.0e6, 1.5e6, 0.25});
    CHECK(tiny.predict(random_field({4, 4, 4}, 2, 1500, 3500)).shape() ==
          std::vector<std::size_t>{3, 4, 4, 8});

    uno::UnoModel desk(uno::UnoSchedule::desk16(), 1);
    desk.set_norm({4.0e6, 1.5e6, 0.25});
    CHECK(desk.predict(random_field({16, 16, 16}, 3, 1500, 3500)).shape() ==
          std::vector<std::size_t>{3, 16, 16, 32});
    // off-entry input: interior grids unchanged, output sampling scales, T = 2 Z_in
    CHECK(desk.predict(random_field({24, 24, 24}, 4, 1500, 3500)).shape() ==
          std::vector<std::size_t>{3, 24, 24, 48});

    CHECK_THROWS_AS(desk.predict(random_field({2, 2, 2}, 5, 1500, 3500)), std::invalid_argument);
    CHECK_THROWS_AS(desk.predict(random_field({16, 16}, 6, 1500, 3500)), std::invalid_argument);
}

TEST_CASE("same seed reproduces the weights bitwise, different seeds do not") {
    uno::UnoModel a(uno::UnoSchedule::tiny4(), 11);
    uno::UnoModel b(uno::UnoSchedule::tiny4(), 11);
    uno::UnoModel c(uno::UnoSchedule::tiny4(), 12);
    auto ra = a.params(), rb = b.params(), rc = c.params();
    bool all_equal = true, any_differs = false;
    for (std::size_t p = 0; p < ra.real.size(); ++p) {
        all_equal = all_equal && std::memcmp(ra.real[p]->data(), rb.real[p]->data(),
                                             ra.real[p]->numel() * sizeof(double)) == 0;
        any_differs = any_differs || std::memcmp(ra.real[p]->data(), rc.real[p]->data(),
                                                 ra.real[p]->numel() * sizeof(double)) != 0;
    }
    CHECK(all_equal);
    CHECK(any_differs);
    // biases start at zero; weight draws stay inside their fan-in bounds
    for (std::size_t i = 0; i < ra.real[1]->numel(); ++i) CHECK((*ra.real[1])[i] == 0.0);
    for (std::size_t i = 0; i < ra.real[0]->numel(); ++i) CHECK(std::abs((*ra.real[0])[i]) <= 0.5);
}

TEST_CASE("zeroed parameters give an identically zero prediction") {
    uno::UnoModel model(uno::UnoSchedule::tiny4(), 8);
    model.set_norm({4.0e6, 1.5e6, 0.25});
    auto refs = model.params();
    for (Tensor* t : refs.real) t->fill(0.0);
    for (CTensor* t : refs.complex) t->fill(cdouble(0.0, 0.0));
    const Tensor out = model.predict(random_field({4, 4, 4}, 9, 1500, 3500));
    CHECK(max_abs(out) == 0.0);
}

TEST_CASE("discretization invariance: finer sampling refines the same output field") {
    // fully linear variant: pointwise nonlinearities between grids of
    // different size alias differently and would cap agreement well above 1e-6
    uno::UnoModel model(uno::UnoSchedule::desk16(/*with_activations=*/false), 29);
    model.set_norm({5.3e6, 1.2e6, 0.25});

    // band-limit a random volume to |k| <= 3 so the squared channel stays
    // alias-free on the coarse grid, then upsample spectrally
    Tensor raw = random_field({16, 16, 16}, 30, -1.0, 1.0);
    const Tensor low = fft::spectral_resample(raw, {0, 1, 2}, {7, 7, 7});
    Tensor vs16 = fft::spectral_resample(low, {0, 1, 2}, {16, 16, 16});
    for (std::size_t i = 0; i < vs16.numel(); ++i) vs16[i] = 2300.0 + 220.0 * vs16[i];
    const Tensor vs32 = fft::spectral_resample(vs16, {0, 1, 2}, {32, 32, 32});

    const Tensor out16 = model.predict(vs16);
    const Tensor out32 = model.predict(vs32);
    REQUIRE(out16.shape() == std::vector<std::size_t>{3, 16, 16, 32});
    REQUIRE(out32.shape() == std::vector<std::size_t>{3, 32, 32, 64});
    const Tensor down = fft::spectral_resample(out32, {1, 2, 3}, {16, 16, 32});
    CHECK(rel_l2_error(down, out16) < 1e-6);

    // the coordinate channels must come from the entry grid for this to hold:
    // a ramp built directly on the fine grid has different low modes
    const Tensor feat32 = model.input_features(vs32);
    const Tensor naive = uno::positional_encoding({32, 32, 32});
    double coord_diff = 0.0;
    for (std::size_t i = 0; i < naive.numel(); ++i)
        coord_diff = std::max(coord_diff, std::abs(feat32[vs32.numel() + i] - naive[i]));
    CHECK(coord_diff > 1e-3);
}

TEST_CASE("checkpoints round-trip bitwise and reproduce predictions") {
    const fs::path dir = fs::temp_directory_path() / "seisuno_uno_test" / "model";
    fs::remove_all(dir.parent_path());

    uno::UnoModel model(uno::UnoSchedule::tiny4(), 55);
    model.set_norm({4.4e6, 1.1e6, 0.25});
    model.save(dir.string());
    uno::UnoModel back = uno::UnoModel::load(dir.string());

    CHECK(back.schedule().name == "tiny4");
    CHECK(back.seed() == 55);
    CHECK(back.norm().mean == 4.4e6);
    CHECK(back.norm().stddev == 1.1e6);

    auto ra = model.params(), rb = back.params();
    for (std::size_t p = 0; p < ra.real.size(); ++p)
        CHECK(std::memcmp(ra.real[p]->data(), rb.real[p]->data(), ra.real[p]->numel() * sizeof(double)) == 0);
    for (std::size_t p = 0; p < ra.complex.size(); ++p)
        for (std::size_t i = 0; i < ra.complex[p]->numel(); ++i)
            CHECK((*ra.complex[p])[i] == (*rb.complex[p])[i]);

    const Tensor vs = random_field({4, 4, 4}, 56, 1500, 3500);
    const Tensor a = model.predict(vs);
    const Tensor b = back.predict(vs);
    CHECK(std::memcmp(a.data(), b.data(), a.numel() * sizeof(double)) == 0);

    // tampering with the manifest parameter order is caught
    auto manifest = container::read_manifest(dir / "manifest.json");
    std::swap(manifest["params"][0], manifest["params"][1]);
    container::write_manifest(dir / "manifest.json", manifest);
    CHECK_THROWS_AS(uno::UnoModel::load(dir.string()), std::invalid_argument);
}
