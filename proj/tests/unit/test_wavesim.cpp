#include "seisuno/wavesim.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "seisuno/geology.hpp"

using namespace seisuno;
using namespace seisuno::wavesim;

namespace {

geology::GeologyField homogeneous(std::size_t n, double vs) {
    return geology::GeologyField{Tensor({n, n, n}, vs), {}, 0};
}

SimConfig quiet_config(double h, double max_vs) {
    SimConfig cfg;
    cfg.h_m = h;
    cfg.auto_dt(max_vs);
    return cfg;
}

// parabolic refinement of the argmax of |trace|
double peak_time(const std::vector<double>& trace, double dt) {
    std::size_t m = 0;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (std::abs(trace[i]) > std::abs(trace[m])) m = i;
    double shift = 0.0;
    if (m > 0 && m + 1 < trace.size()) {
        const double a = std::abs(trace[m - 1]), b = std::abs(trace[m]), c = std::abs(trace[m + 1]);
        const double den = a - 2.0 * b + c;
        if (std::abs(den) > 1e-300) shift = 0.5 * (a - c) / den;
    }
    return (static_cast<double>(m) + shift) * dt;
}

}  // namespace

TEST_CASE("moment tensor closed forms and invariants") {
    // vertical strike-slip striking north: pure M_xy couple in NED axes
    auto m = moment_tensor_ned(0.0, 90.0, 0.0, 1.0);
    CHECK(m[0][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m[0][0]) < 1e-12);
    CHECK(std::abs(m[1][1]) < 1e-12);
    CHECK(std::abs(m[2][2]) < 1e-12);
    CHECK(std::abs(m[0][2]) < 1e-12);
    CHECK(std::abs(m[1][2]) < 1e-12);

    // same fault striking northeast: P axis along north-south
    m = moment_tensor_ned(45.0, 90.0, 0.0, 1.0);
    CHECK(m[0][0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(m[1][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m[0][1]) < 1e-12);

    // vertical dip-slip striking north
    m = moment_tensor_ned(0.0, 90.0, 90.0, 1.0);
    CHECK(m[1][2] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(m[0][0]) < 1e-12);
    CHECK(std::abs(m[2][2]) < 1e-12);

    // 45-degree thrust striking north: horizontal east-west compression
    m = moment_tensor_ned(0.0, 45.0, 90.0, 1.0);
    CHECK(m[1][1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(m[2][2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m[0][0]) < 1e-12);

    // oblique thrust regression values
    m = moment_tensor_ned(50.0, 45.0, 88.0, 1.0);
    CHECK(m[0][0] == doctest::Approx(-0.61077).epsilon(5e-4));
    CHECK(m[0][1] == doctest::Approx(0.48781).epsilon(5e-4));
    CHECK(m[0][2] == doctest::Approx(-0.015863).epsilon(5e-4));
    CHECK(m[1][1] == doctest::Approx(-0.38862).epsilon(5e-4));
    CHECK(m[1][2] == doctest::Approx(-0.018905).epsilon(5e-4));
    CHECK(m[2][2] == doctest::Approx(0.99939).epsilon(5e-4));

    // double-couple structure: symmetric, traceless, |M|^2 = 2 M0^2, det 0
    double tr = 0.0, frob = 0.0;
    for (int i = 0; i < 3; ++i) {
        tr += m[i][i];
        for (int j = 0; j < 3; ++j) {
            CHECK(m[i][j] == m[j][i]);
            frob += m[i][j] * m[i][j];
        }
    }
    CHECK(std::abs(tr) < 1e-14);
    CHECK(frob == doctest::Approx(2.0).epsilon(1e-12));
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[1][2]) -
                       m[0][1] * (m[0][1] * m[2][2] - m[1][2] * m[0][2]) +
                       m[0][2] * (m[0][1] * m[1][2] - m[1][1] * m[0][2]);
    CHECK(std::abs(det) < 1e-12);

    // scale is a plain multiplier
    const auto m5 = moment_tensor_ned(50.0, 45.0, 88.0, 2.5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(m5[i][j] == doctest::Approx(2.5 * m[i][j]).epsilon(1e-14));

    // solver axes swap north and east
    const auto ms = moment_tensor_from_angles(50.0, 45.0, 88.0, 1.0);
    CHECK(ms[0][0] == m[1][1]);
    CHECK(ms[1][1] == m[0][0]);
    CHECK(ms[2][2] == m[2][2]);
    CHECK(ms[0][1] == m[0][1]);
    CHECK(ms[0][2] == m[1][2]);
    CHECK(ms[1][2] == m[0][2]);
}

TEST_CASE("source time function closed forms") {
    const double tau = 0.127;
    CHECK(source_time_function(-1.0, tau) == 0.0);
    CHECK(source_time_function(0.0, tau) == 0.0);
    CHECK(source_time_function_rate(-0.5, tau) == 0.0);
    CHECK(source_time_function(tau, tau) == doctest::Approx(1.0 - 2.0 / std::exp(1.0)).epsilon(1e-14));
    CHECK(source_time_function(20.0 * tau, tau) == doctest::Approx(1.0).epsilon(1e-6));

    // rate peaks exactly at tau with value 1/(e tau)
    CHECK(source_time_function_rate(tau, tau) == doctest::Approx(1.0 / (std::exp(1.0) * tau)).epsilon(1e-14));
    CHECK(source_time_function_rate(0.9 * tau, tau) < source_time_function_rate(tau, tau));
    CHECK(source_time_function_rate(1.1 * tau, tau) < source_time_function_rate(tau, tau));

    // rate is the derivative, and the function is monotone
    double prev = 0.0;
    for (double t = 0.01; t < 1.0; t += 0.037) {
        const double eps = 1e-6;
        const double fd = (source_time_function(t + eps, tau) - source_time_function(t - eps, tau)) / (2.0 * eps);
        CHECK(fd == doctest::Approx(source_time_function_rate(t, tau)).epsilon(1e-7));
        const double s = source_time_function(t, tau);
        CHECK(s > prev);
        CHECK(s < 1.0);
        prev = s;
    }
}

TEST_CASE("configuration and source validation") {
    const auto geo = homogeneous(8, 2000.0);
    SimConfig cfg = quiet_config(150.0, 2000.0);
    cfg.duration_s = 7.5;
    CHECK(cfg.record_points() == 128);
    CHECK(cfg.dt_s == doctest::Approx(0.49 * 150.0 / (1.7 * 2000.0)));

    SourceSpec src;
    src.position_m = {600.0, 600.0, -600.0};

    CHECK_NOTHROW(WaveSolver(geo, src, cfg));

    SimConfig bad = cfg;
    bad.dt_s *= 1.01;
    CHECK_THROWS_AS(WaveSolver(geo, src, bad), std::invalid_argument);

    bad = cfg;
    bad.record_window_s = {1.0, 7.39};  // 6.39 * 20 is not an integer
    CHECK_THROWS_AS(WaveSolver(geo, src, bad), std::invalid_argument);

    bad = cfg;
    bad.duration_s = 5.0;  // shorter than the record window
    CHECK_THROWS_AS(WaveSolver(geo, src, bad), std::invalid_argument);

    bad = cfg;
    bad.vp_vs_ratio = 1.2;  // lambda would be negative
    CHECK_THROWS_AS(WaveSolver(geo, src, bad), std::invalid_argument);

    SourceSpec s2 = src;
    s2.position_m[2] = 10.0;  // above the surface
    CHECK_THROWS_AS(WaveSolver(geo, s2, cfg), std::invalid_argument);
    s2 = src;
    s2.strike_deg = 360.0;
    CHECK_THROWS_AS(WaveSolver(geo, s2, cfg), std::invalid_argument);
    s2 = src;
    s2.dip_deg = 90.5;
    CHECK_THROWS_AS(WaveSolver(geo, s2, cfg), std::invalid_argument);
    s2 = src;
    s2.rake_deg = -181.0;
    CHECK_THROWS_AS(WaveSolver(geo, s2, cfg), std::invalid_argument);
    s2 = src;
    s2.tau_s = 0.0;
    CHECK_THROWS_AS(WaveSolver(geo, s2, cfg), std::invalid_argument);
    s2 = src;
    s2.position_m = {60.0, 600.0, -600.0};  // rounds onto the boundary plane
    CHECK_THROWS_AS(WaveSolver(geo, s2, cfg), std::invalid_argument);
}

TEST_CASE("zero moment leaves the field at rest") {
    const auto geo = homogeneous(12, 2000.0);
    SimConfig cfg = quiet_config(150.0, 2000.0);
    SourceSpec src;
    src.position_m = {900.0, 900.0, -900.0};
    src.moment_scale = 0.0;
    WaveSolver solver(geo, src, cfg);
    for (int i = 0; i < 10; ++i) solver.step();
    CHECK(solver.kinetic_energy() == 0.0);
    CHECK(solver.strain_energy() == 0.0);
    CHECK(solver.time() == doctest::Approx(10.0 * cfg.dt_s).epsilon(1e-12));
    CHECK(solver.state().step_index == 10);
}

TEST_CASE("wavefronts travel at the body-wave speeds") {
    // vertical point force in a homogeneous medium: pure P along the vertical
    // ray, pure S along the horizontal one
    const double vs = 2000.0, h = 100.0;
    const double vp = 1.7 * vs;
    const auto geo = homogeneous(40, vs);
    SimConfig cfg = quiet_config(h, vs);
    SourceSpec src;
    src.position_m = {2000.0, 2000.0, -2000.0};
    src.tau_s = 4.0 * cfg.dt_s;
    WaveSolver solver(geo, src, cfg, /*force_component=*/2);

    const int steps = static_cast<int>(std::ceil(0.95 / cfg.dt_s));
    std::vector<double> p1, p2, s1, s2, below_first;
    for (int n = 0; n < steps; ++n) {
        solver.step();
        p1.push_back(solver.velocity_at(2000.0, 2000.0, 2800.0)[2]);
        p2.push_back(solver.velocity_at(2000.0, 2000.0, 3400.0)[2]);
        s1.push_back(solver.velocity_at(2800.0, 2000.0, 2000.0)[2]);
        s2.push_back(solver.velocity_at(3400.0, 2000.0, 2000.0)[2]);
    }

    const double dr = 600.0;
    const double dt_p = peak_time(p2, cfg.dt_s) - peak_time(p1, cfg.dt_s);
    const double dt_s = peak_time(s2, cfg.dt_s) - peak_time(s1, cfg.dt_s);
    CHECK(std::abs(dr - vp * dt_p) < h);
    CHECK(std::abs(dr - vs * dt_s) < h);

    // downward force: first motion below the source is downward (negative up)
    double max_p1 = 0.0;
    for (double v : p1) max_p1 = std::max(max_p1, std::abs(v));
    for (double v : p1) {
        if (std::abs(v) > 0.1 * max_p1) {
            CHECK(v < 0.0);
            break;
        }
    }
}

TEST_CASE("double-couple radiation has the right first-motion sign") {
    // left-lateral strike-slip striking north: the northeast quadrant is
    // compressional, so the P first motion there points outward
    const double vs = 2000.0, h = 100.0;
    const auto geo = homogeneous(32, vs);
    SimConfig cfg = quiet_config(h, vs);
    SourceSpec src;
    src.position_m = {1600.0, 1600.0, -1600.0};
    src.strike_deg = 0.0;
    src.dip_deg = 90.0;
    src.rake_deg = 0.0;
    src.tau_s = 4.0 * cfg.dt_s;
    WaveSolver solver(geo, src, cfg);

    std::vector<double> radial;
    const int steps = static_cast<int>(std::ceil(0.5 / cfg.dt_s));
    for (int n = 0; n < steps; ++n) {
        solver.step();
        const auto v = solver.velocity_at(2200.0, 2200.0, 1600.0);
        radial.push_back((v[0] + v[1]) / std::sqrt(2.0));
    }
    double peak = 0.0;
    for (double v : radial) peak = std::max(peak, std::abs(v));
    REQUIRE(peak > 0.0);
    for (double v : radial) {
        if (std::abs(v) > 0.1 * peak) {
            CHECK(v > 0.0);
            break;
        }
    }
}

TEST_CASE("surface record arrivals match ray times") {
    // homogeneous half space, sensor directly above the source; the 60-degree
    // dip-slip radiates both P and SV strongly along the vertical ray
    const double vs = 2000.0, h = 150.0;
    const auto geo = homogeneous(32, vs);
    SimConfig cfg = quiet_config(h, vs);
    cfg.duration_s = 3.5;
    cfg.sensor_grid = {3, 3};
    cfg.record_window_s = {0.2, 3.4};  // 64 samples at 20 Hz
    SourceSpec src;
    src.position_m = {2400.0, 2400.0, -3000.0};
    src.strike_deg = 0.0;
    src.dip_deg = 60.0;
    src.rake_deg = 90.0;

    const auto rec = run_simulation(geo, src, cfg);
    REQUIRE(rec.data.shape() == std::vector<std::size_t>{3, 3, 3, 64});
    CHECK(rec.sensor_x_m[1] == doctest::Approx(2400.0));
    CHECK(rec.sensor_y_m[1] == doctest::Approx(2400.0));

    // P carries the vertical peak (S is horizontally polarised on this ray);
    // restrict the P pick to times before the S group to dodge its coda
    double t_p = 0.0, t_s = 0.0, vmax = 0.0, hmax = 0.0;
    for (std::size_t m = 0; m < 64; ++m) {
        const double t = rec.times_s[m];
        const double vert = std::abs(rec.data.at({2, 1, 1, m}));
        const double horiz = std::hypot(rec.data.at({0, 1, 1, m}), rec.data.at({1, 1, 1, m}));
        if (t < 1.2 && vert > vmax) {
            vmax = vert;
            t_p = t;
        }
        if (horiz > hmax) {
            hmax = horiz;
            t_s = t;
        }
    }
    REQUIRE(vmax > 0.0);
    REQUIRE(hmax > 0.0);
    const double tol = 2.0 * std::max(cfg.dt_s, h / vs);
    CHECK(std::abs(t_p - 3000.0 / (1.7 * vs)) <= tol);
    CHECK(std::abs(t_s - 3000.0 / vs) <= tol);
}

TEST_CASE("surface record has the documented shape and sampling") {
    const double vs = 2000.0, h = 300.0;
    const auto geo = homogeneous(32, vs);  // 9300 m extent hosts the 16 x 16 grid
    SimConfig cfg = quiet_config(h, vs);
    const auto rec = run_simulation(geo, SourceSpec{}, cfg);

    REQUIRE(rec.data.shape() == std::vector<std::size_t>{3, 16, 16, 128});
    CHECK(all_finite(rec.data));
    CHECK(rec.times_s.front() == doctest::Approx(1.0));
    CHECK(rec.times_s.back() == doctest::Approx(7.35));
    REQUIRE(rec.sensor_x_m.size() == 16);
    CHECK(rec.sensor_x_m.front() == doctest::Approx(300.0));
    CHECK(rec.sensor_x_m.back() == doctest::Approx(9300.0));
    for (double x : rec.sensor_x_m) CHECK(std::abs(x / h - std::round(x / h)) < 1e-9);

    // something actually arrived at the surface
    CHECK(max_abs(rec.data) > 0.0);
}

TEST_CASE("record is linear in the moment scale and deterministic") {
    geology::GeologyConfig gcfg;
    gcfg.grid = {24, 24, 24};
    gcfg.domain_size_m = 7200.0;
    gcfg.seed = 91;
    const auto geo = geology::generate(gcfg);
    double max_vs = 0.0;
    for (double v : geo.vs.values()) max_vs = std::max(max_vs, v);

    SimConfig cfg;
    cfg.h_m = 300.0;
    cfg.auto_dt(max_vs);
    cfg.duration_s = 1.6;
    cfg.record_window_s = {0.5, 1.5};
    cfg.record_rate_hz = 16.0;
    cfg.sensor_grid = {4, 4};
    cfg.sensor_spacing_m = 1200.0;

    SourceSpec src;
    src.position_m = {3600.0, 3600.0, -5400.0};
    const auto rec1 = run_simulation(geo, src, cfg);

    SourceSpec doubled = src;
    doubled.moment_scale = 2.0;
    const auto rec2 = run_simulation(geo, doubled, cfg);

    REQUIRE(rec1.data.numel() == rec2.data.numel());
    CHECK(max_abs(rec1.data) > 0.0);
    auto half = rec2.data;
    for (auto& v : half.values()) v *= 0.5;
    CHECK(rel_l2_error(half, rec1.data) < 1e-12);

    // bitwise reproducibility
    const auto rec1b = run_simulation(geo, src, cfg);
    CHECK(std::memcmp(rec1.data.data(), rec1b.data.data(), rec1.data.numel() * sizeof(double)) == 0);
}

TEST_CASE("sponge absorbs outgoing waves") {
    // identical interiors, one domain large enough that nothing comes back in
    // the comparison window; the residual at the monitor is the boundary
    // reflection of the small run
    const double vs = 2000.0, h = 100.0;
    SimConfig cfg = quiet_config(h, vs);
    SourceSpec small_src;
    small_src.position_m = {1800.0, 1800.0, -1500.0};
    small_src.tau_s = 4.0 * cfg.dt_s;
    WaveSolver small(homogeneous(36, vs), small_src, cfg, /*force_component=*/2);

    SourceSpec big_src = small_src;
    big_src.position_m = {3600.0, 3600.0, -1500.0};  // same depth, centred laterally
    geology::GeologyField big_geo{Tensor({72, 72, 40}, vs), {}, 0};
    WaveSolver big(big_geo, big_src, cfg, /*force_component=*/2);

    const int steps = static_cast<int>(std::ceil(1.6 / cfg.dt_s));
    double inc_energy = 0.0, refl_energy = 0.0;
    for (int n = 0; n < steps; ++n) {
        small.step();
        big.step();
        const auto vs_small = small.velocity_at(2400.0, 1800.0, 1500.0);
        const auto vs_big = big.velocity_at(4200.0, 3600.0, 1500.0);
        const double t = small.time();
        double diff2 = 0.0, ref2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            diff2 += (vs_small[c] - vs_big[c]) * (vs_small[c] - vs_big[c]);
            ref2 += vs_big[c] * vs_big[c];
        }
        if (t < 0.7) inc_energy += ref2;
        if (t > 0.75) refl_energy += diff2;
    }
    REQUIRE(inc_energy > 0.0);
    CHECK(std::sqrt(refl_energy / inc_energy) < 0.05);
}

TEST_CASE("energy does not grow once the source is quiet") {
    const double vs = 2000.0, h = 150.0;
    const auto geo = homogeneous(24, vs);
    SimConfig cfg = quiet_config(h, vs);
    cfg.sponge_width = 6;
    SourceSpec src;
    src.position_m = {1800.0, 1800.0, -1800.0};
    src.tau_s = 0.04;
    WaveSolver solver(geo, src, cfg);

    const double t_quiet = 25.0 * src.tau_s;
    while (solver.time() < t_quiet) solver.step();
    double prev = solver.kinetic_energy() + solver.strain_energy();
    REQUIRE(prev > 0.0);
    for (int n = 0; n < 40; ++n) {
        solver.step();
        const double e = solver.kinetic_energy() + solver.strain_energy();
        CHECK(e <= prev * (1.0 + 1e-3));
        prev = e;
    }
}

TEST_CASE("force-source reciprocity in a heterogeneous medium") {
    geology::GeologyConfig gcfg;
    gcfg.grid = {20, 20, 20};
    gcfg.domain_size_m = 6000.0;
    gcfg.seed = 377;
    const auto geo = geology::generate(gcfg);
    double max_vs = 0.0;
    for (double v : geo.vs.values()) max_vs = std::max(max_vs, v);

    SimConfig cfg;
    cfg.h_m = 300.0;
    cfg.auto_dt(max_vs);
    cfg.sponge_width = 5;

    const std::array<double, 3> a{1800.0, 2100.0, 1500.0};  // x, y, depth
    const std::array<double, 3> b{3900.0, 3300.0, 2700.0};

    const auto trace = [&](const std::array<double, 3>& src_at, const std::array<double, 3>& rec_at) {
        SourceSpec src;
        src.position_m = {src_at[0], src_at[1], -src_at[2]};
        src.tau_s = 0.08;
        WaveSolver solver(geo, src, cfg, /*force_component=*/2);
        std::vector<double> out;
        const int steps = static_cast<int>(std::ceil(1.5 / cfg.dt_s));
        for (int n = 0; n < steps; ++n) {
            solver.step();
            out.push_back(solver.velocity_at(rec_at[0], rec_at[1], rec_at[2])[2]);
        }
        return out;
    };

    const auto ab = trace(a, b);
    const auto ba = trace(b, a);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < ab.size(); ++i) {
        diff += (ab[i] - ba[i]) * (ab[i] - ba[i]);
        norm += ab[i] * ab[i];
    }
    REQUIRE(norm > 0.0);
    CHECK(std::sqrt(diff / norm) < 0.01);
}

TEST_CASE("blow-up detection reports the step") {
    const auto geo = homogeneous(12, 2000.0);
    SimConfig cfg = quiet_config(150.0, 2000.0);
    SourceSpec src;
    src.position_m = {900.0, 900.0, -900.0};
    WaveSolver solver(geo, src, cfg);
    for (int i = 0; i < 3; ++i) solver.step();
    solver.mutable_state().vx[solver.state().vx.size() / 2] = std::nan("");
    CHECK_THROWS_WITH_AS(solver.step(), doctest::Contains("blew up at step 4"), std::runtime_error);
}

TEST_CASE("sensor grid must fit the domain") {
    const auto geo = homogeneous(16, 2000.0);  // 2250 m extent
    SimConfig cfg = quiet_config(150.0, 2000.0);
    SourceSpec src;
    src.position_m = {1200.0, 1200.0, -1200.0};
    CHECK_THROWS_AS(run_simulation(geo, src, cfg), std::invalid_argument);
}
