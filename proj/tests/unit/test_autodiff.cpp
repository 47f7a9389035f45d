#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "seisuno/autodiff.hpp"
#include "seisuno/random.hpp"
#include "seisuno/tensor.hpp"

namespace ad = seisuno::ad;
using seisuno::cdouble;
using seisuno::CTensor;
using seisuno::Tensor;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double scale = 1.0) {
    Tensor t(std::move(shape));
    seisuno::rng::RandomStream rs(seed);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = scale * rs.normal();
    return t;
}

CTensor random_ctensor(std::vector<std::size_t> shape, std::uint64_t seed, double scale = 1.0) {
    CTensor t(std::move(shape));
    seisuno::rng::RandomStream rs(seed);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = scale * cdouble(rs.normal(), rs.normal());
    return t;
}

// Scalar function of a set of real and complex leaves, rebuilt on a fresh
// tape per evaluation so it can be probed by central differences.
struct Fixture {
    std::vector<Tensor> r;
    std::vector<CTensor> c;
    std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&, const std::vector<ad::CVar>&)> fn;

    double eval() const {
        ad::Tape tape;
        std::vector<ad::Var> rv;
        std::vector<ad::CVar> cv;
        for (const auto& t : r) rv.push_back(tape.leaf(t, false));
        for (const auto& t : c) cv.push_back(tape.leaf(t, false));
        const ad::Var root = fn(tape, rv, cv);
        return tape.value(root)[0];
    }

    // Largest relative mismatch between the tape gradient and central
    // differences across every element of every leaf.
    double max_grad_mismatch(double h = 1e-5) {
        ad::Tape tape;
        std::vector<ad::Var> rv;
        std::vector<ad::CVar> cv;
        for (const auto& t : r) rv.push_back(tape.leaf(t, true));
        for (const auto& t : c) cv.push_back(tape.leaf(t, true));
        const ad::Var root = fn(tape, rv, cv);
        tape.backward(root);

        auto rel = [](double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); };
        double worst = 0.0;
        for (std::size_t li = 0; li < r.size(); ++li) {
            const Tensor g = tape.grad(rv[li]);
            for (std::size_t i = 0; i < r[li].numel(); ++i) {
                const double keep = r[li][i];
                r[li][i] = keep + h;
                const double fp = eval();
                r[li][i] = keep - h;
                const double fm = eval();
                r[li][i] = keep;
                worst = std::max(worst, rel(g[i], (fp - fm) / (2.0 * h)));
            }
        }
        for (std::size_t li = 0; li < c.size(); ++li) {
            const CTensor g = tape.grad(cv[li]);
            for (std::size_t i = 0; i < c[li].numel(); ++i) {
                const cdouble keep = c[li][i];
                c[li][i] = keep + cdouble(h, 0.0);
                const double fpr = eval();
                c[li][i] = keep - cdouble(h, 0.0);
                const double fmr = eval();
                c[li][i] = keep + cdouble(0.0, h);
                const double fpi = eval();
                c[li][i] = keep - cdouble(0.0, h);
                const double fmi = eval();
                c[li][i] = keep;
                worst = std::max(worst, rel(g[i].real(), (fpr - fmr) / (2.0 * h)));
                worst = std::max(worst, rel(g[i].imag(), (fpi - fmi) / (2.0 * h)));
            }
        }
        return worst;
    }
};

}  // namespace

TEST_CASE("elementwise chain gradient") {
    Fixture f;
    f.r = {random_tensor({3, 4}, 1)};
    Tensor probe = random_tensor({3, 4}, 2);
    f.fn = [probe](ad::Tape& t, const std::vector<ad::Var>& rv, const std::vector<ad::CVar>&) {
        ad::Var y = t.affine(rv[0], 1.7, 0.3);
        y = t.relu(y);
        y = t.add(y, rv[0]);
        return t.dot(y, probe);
    };
    CHECK(f.max_grad_mismatch() < 5e-7);
}

TEST_CASE("channel_linear gradient in x, w and b") {
    Fixture f;
    f.r = {random_tensor({3, 5}, 3), random_tensor({3, 2}, 4), random_tensor({2}, 5)};
    Tensor probe = random_tensor({2, 5}, 6);
    f.fn = [probe](ad::Tape& t, const std::vector<ad::Var>& rv, const std::vector<ad::CVar>&) {
        return t.dot(t.channel_linear(rv[0], rv[1], rv[2]), probe);
    };
    CHECK(f.max_grad_mismatch() < 5e-7);
}

TEST_CASE("channel_linear forward matches a straightforward loop") {
    const Tensor x = random_tensor({3, 4}, 7);
    const Tensor w = random_tensor({3, 2}, 8);
    const Tensor b = random_tensor({2}, 9);
    ad::Tape t;
    const ad::Var y = t.channel_linear(t.leaf(x, false), t.leaf(w, false), t.leaf(b, false));
    const Tensor& yv = t.value(y);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t s = 0; s < 4; ++s) {
            double expect = b[c];
            for (std::size_t a = 0; a < 3; ++a) expect += w.at({a, c}) * x.at({a, s});
            CHECK(yv.at({c, s}) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("concat_channels gradient and layout") {
    Fixture f;
    f.r = {random_tensor({2, 3, 2, 2}, 11), random_tensor({3, 3, 2, 2}, 12)};
    Tensor probe = random_tensor({5, 3, 2, 2}, 13);
    f.fn = [probe](ad::Tape& t, const std::vector<ad::Var>& rv, const std::vector<ad::CVar>&) {
        return t.dot(t.concat_channels(rv[0], rv[1]), probe);
    };
    CHECK(f.max_grad_mismatch() < 5e-7);

    ad::Tape t;
    const ad::Var cc = t.concat_channels(t.leaf(f.r[0], false), t.leaf(f.r[1], false));
    const Tensor& v = t.value(cc);
    CHECK(v.extent(0) == 5);
    CHECK(v.at({0, 1, 1, 0}) == f.r[0].at({0, 1, 1, 0}));
    CHECK(v.at({4, 2, 0, 1}) == f.r[1].at({2, 2, 0, 1}));
}

TEST_CASE("full spectral path gradient: fft3, extract, mode_mul, modes_to_field") {
    Fixture f;
    f.r = {random_tensor({2, 4, 4, 4}, 21)};
    f.c = {random_ctensor({2, 3, 3, 3, 3}, 22, 0.5)};
    Tensor probe = random_tensor({3, 4, 4, 4}, 23);
    f.fn = [probe](ad::Tape& t, const std::vector<ad::Var>& rv, const std::vector<ad::CVar>& cv) {
        const ad::CVar spec = t.fft3(rv[0]);
        const ad::CVar box = t.extract_modes(spec, {2, 2, 2});
        const ad::CVar mixed = t.mode_mul(box, cv[0]);
        const ad::Var field = t.modes_to_field(mixed, {4, 4, 4}, {4, 4, 4});
        return t.dot(field, probe);
    };
    CHECK(f.max_grad_mismatch() < 5e-7);
}

TEST_CASE("spectral path gradient with resolution change") {
    Fixture f;
    f.r = {random_tensor({1, 4, 5, 4}, 31)};
    f.c = {random_ctensor({1, 2, 3, 3, 3}, 32, 0.5)};
    Tensor probe = random_tensor({2, 6, 5, 8}, 33);
    f.fn = [probe](ad::Tape& t, const std::vector<ad::Var>& rv, const std::vector<ad::CVar>& cv) {
        const ad::CVar spec = t.fft3(rv[0]);
        const ad::CVar box = t.extract_modes(spec, {2, 2, 2});
        const ad::CVar mixed = t.mode_mul(box, cv[0]);
        const ad::Var field = t.modes_to_field(mixed, {4, 5, 4}, {6, 5, 8});
        return t.dot(field, probe);
    };
    CHECK(f.max_grad_mismatch() < 5e-7);
}

TEST_CASE("field_from_spectrum gradient across a resolution change") {
    Fixture f;
    f.r = {random_tensor({1, 4, 6, 4}, 41)};
    Tensor probe = random_tensor({1, 8, 6, 4}, 42);
    f.fn = [probe](ad::Tape& t, const std::vector<ad::Var>& rv, const std::vector<ad::CVar>&) {
        const ad::CVar spec = t.fft3(rv[0]);
        const ad::Var y = t.field_from_spectrum(spec, {8, 6, 4});
        return t.dot(y, probe);
    };
    CHECK(f.max_grad_mismatch() < 5e-7);
}

TEST_CASE("mae_channel_sum value and gradient away from kinks") {
    Fixture f;
    f.r = {random_tensor({3, 2, 2, 2}, 51)};
    Tensor target = random_tensor({3, 2, 2, 2}, 52);
    for (std::size_t i = 0; i < target.numel(); ++i) target[i] += 10.0;  // keep |d| well off zero
    f.fn = [target](ad::Tape& t, const std::vector<ad::Var>& rv, const std::vector<ad::CVar>&) {
        return t.mae_channel_sum(rv[0], target);
    };
    CHECK(f.max_grad_mismatch() < 5e-7);

    ad::Tape t;
    const ad::Var loss = t.mae_channel_sum(t.leaf(f.r[0], false), target);
    double expect = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 8; ++i) acc += std::abs(f.r[0][c * 8 + i] - target[c * 8 + i]);
        expect += acc / 8.0;
    }
    CHECK(t.value(loss)[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mode_mul output stays conjugate-symmetric for real input fields") {
    const Tensor x = random_tensor({2, 6, 6, 6}, 61);
    const CTensor r = random_ctensor({2, 2, 5, 5, 5}, 62);
    ad::Tape t;
    const ad::CVar spec = t.fft3(t.leaf(x, false));
    const ad::CVar box = t.extract_modes(spec, {3, 3, 3});
    const ad::CVar mixed = t.mode_mul(box, t.leaf(r, false));
    const CTensor& y = t.value(mixed);
    auto neg = [](std::size_t i, std::size_t b) { return i == 0 ? 0 : b - i; };
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t bq = 0; bq < 5; ++bq)
                for (std::size_t cq = 0; cq < 5; ++cq) {
                    const cdouble v = y.at({c, a, bq, cq});
                    const cdouble vn = y.at({c, neg(a, 5), neg(bq, 5), neg(cq, 5)});
                    CHECK(std::abs(v - std::conj(vn)) < 1e-9);
                }
    // And therefore the spatial field is real: this must not throw.
    const ad::Var field = t.modes_to_field(mixed, {6, 6, 6}, {6, 6, 6});
    CHECK(seisuno::all_finite(t.value(field)));
}

TEST_CASE("band-limited fields pass through extract + modes_to_field unchanged") {
    auto value = [](double u, double v, double w) {
        const double tau = 2.0 * std::numbers::pi;
        return 0.7 + std::cos(tau * u) + 0.4 * std::sin(tau * (v + w)) - 0.2 * std::sin(tau * (u - w));
    };
    Tensor x({1, 6, 6, 6});
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            for (std::size_t k = 0; k < 6; ++k) x.at({0, i, j, k}) = value(i / 6.0, j / 6.0, k / 6.0);
    ad::Tape t;
    const ad::CVar spec = t.fft3(t.leaf(x, false));
    const ad::CVar box = t.extract_modes(spec, {2, 2, 2});
    const ad::Var back = t.modes_to_field(box, {6, 6, 6}, {6, 6, 6});
    CHECK(seisuno::rel_l2_error(t.value(back), x) < 1e-12);
}

TEST_CASE("mode boxes are resolution independent under the 1/N convention") {
    auto value = [](double u, double v, double w) {
        const double tau = 2.0 * std::numbers::pi;
        return 1.0 + 0.5 * std::cos(tau * u) + 0.25 * std::sin(tau * v) - 0.5 * std::cos(tau * (u + w));
    };
    auto run = [&](std::array<std::size_t, 3> n) {
        Tensor x({1, n[0], n[1], n[2]});
        for (std::size_t i = 0; i < n[0]; ++i)
            for (std::size_t j = 0; j < n[1]; ++j)
                for (std::size_t k = 0; k < n[2]; ++k)
                    x.at({0, i, j, k}) = value(static_cast<double>(i) / static_cast<double>(n[0]),
                                               static_cast<double>(j) / static_cast<double>(n[1]),
                                               static_cast<double>(k) / static_cast<double>(n[2]));
        ad::Tape t;
        const ad::CVar spec = t.fft3(t.leaf(x, false));
        const ad::CVar box = t.extract_modes(spec, {2, 2, 2});
        return t.value(t.modes_to_field(box, n, {5, 5, 5}));
    };
    const Tensor a = run({8, 8, 8});
    const Tensor b = run({12, 9, 8});
    CHECK(seisuno::rel_l2_error(a, b) < 1e-12);
}

TEST_CASE("tape is single-use") {
    ad::Tape t;
    const ad::Var x = t.leaf(random_tensor({2, 2}, 71), true);
    const ad::Var loss = t.sum(x);
    t.backward(loss);
    CHECK_THROWS_AS(t.backward(loss), std::invalid_argument);
    CHECK_THROWS_AS((void)t.sum(x), std::invalid_argument);
}

TEST_CASE("gradients of untouched leaves are zero") {
    ad::Tape t;
    const ad::Var x = t.leaf(random_tensor({2, 2}, 81), true);
    const ad::Var unused = t.leaf(random_tensor({3}, 82), true);
    t.backward(t.sum(x));
    const Tensor& g = t.grad(unused);
    CHECK(seisuno::max_abs(g) == 0.0);
    CHECK(t.grad(x)[0] == doctest::Approx(1.0));
}
