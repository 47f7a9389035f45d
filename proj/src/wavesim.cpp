#include "seisuno/wavesim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seisuno::wavesim {

namespace {

constexpr double kC1 = 9.0 / 8.0;   // 4th-order staggered stencil weights
constexpr double kC2 = 1.0 / 24.0;
constexpr std::size_t kPad = 2;

double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

void SourceSpec::validate() const {
    check(std::isfinite(position_m[0]) && std::isfinite(position_m[1]) && std::isfinite(position_m[2]),
          "source position must be finite");
    check(position_m[2] <= 0.0, "source must sit at or below the free surface (z <= 0)");
    check(strike_deg >= 0.0 && strike_deg < 360.0, "strike must lie in [0, 360)");
    check(dip_deg >= 0.0 && dip_deg <= 90.0, "dip must lie in [0, 90]");
    check(rake_deg >= -180.0 && rake_deg <= 180.0, "rake must lie in [-180, 180]");
    check(tau_s > 0.0, "source rise time must be positive");
    check(std::isfinite(moment_scale), "moment scale must be finite");
}

double SimConfig::cfl_limit(double max_vs) const { return 0.49 * h_m / (vp_vs_ratio * max_vs); }

double SimConfig::auto_dt(double max_vs, double safety) {
    dt_s = safety * cfl_limit(max_vs);
    return dt_s;
}

std::size_t SimConfig::record_points() const {
    const double span = (record_window_s[1] - record_window_s[0]) * record_rate_hz;
    const double rounded = std::round(span);
    check(rounded >= 1.0 && std::abs(span - rounded) < 1e-9,
          "record window length times record rate must be a positive integer");
    return static_cast<std::size_t>(rounded);
}

void SimConfig::validate(double max_vs) const {
    check(h_m > 0.0, "grid spacing must be positive");
    check(density > 0.0, "density must be positive");
    check(vp_vs_ratio * vp_vs_ratio > 2.0, "vp/vs ratio must exceed sqrt(2) for a positive lambda");
    check(max_vs > 0.0, "medium shear velocity must be positive");
    check(dt_s > 0.0, "time step must be set");
    check(dt_s <= cfl_limit(max_vs) * (1.0 + 1e-12), "time step violates the CFL bound 0.49 h / (alpha max_vs)");
    check(record_window_s[0] >= 0.0 && record_window_s[0] < record_window_s[1], "record window must be ordered");
    check(duration_s >= record_window_s[1], "duration must cover the record window");
    check(record_rate_hz > 0.0, "record rate must be positive");
    record_points();
    check(sensor_grid[0] >= 1 && sensor_grid[1] >= 1, "sensor grid must be non-empty");
    check(sensor_spacing_m > 0.0, "sensor spacing must be positive");
    check(sponge_strength >= 0.0, "sponge strength must be non-negative");
}

std::array<std::array<double, 3>, 3> moment_tensor_ned(double strike_deg, double dip_deg, double rake_deg,
                                                       double scale) {
    const double s = deg(strike_deg), d = deg(dip_deg), r = deg(rake_deg);
    const double sd = std::sin(d), cd = std::cos(d);
    const double s2d = std::sin(2.0 * d), c2d = std::cos(2.0 * d);
    const double sr = std::sin(r), cr = std::cos(r);
    const double ss = std::sin(s), cs = std::cos(s);
    const double s2s = std::sin(2.0 * s), c2s = std::cos(2.0 * s);

    std::array<std::array<double, 3>, 3> m{};
    m[0][0] = -scale * (sd * cr * s2s + s2d * sr * ss * ss);
    m[0][1] = scale * (sd * cr * c2s + 0.5 * s2d * sr * s2s);
    m[0][2] = -scale * (cd * cr * cs + c2d * sr * ss);
    m[1][1] = scale * (sd * cr * s2s - s2d * sr * cs * cs);
    m[1][2] = -scale * (cd * cr * ss - c2d * sr * cs);
    m[2][2] = scale * s2d * sr;
    m[1][0] = m[0][1];
    m[2][0] = m[0][2];
    m[2][1] = m[1][2];
    return m;
}

std::array<std::array<double, 3>, 3> moment_tensor_from_angles(double strike_deg, double dip_deg, double rake_deg,
                                                               double scale) {
    const auto ned = moment_tensor_ned(strike_deg, dip_deg, rake_deg, scale);
    // solver axes: x = east, y = north, z = down; permutation of (north, east, down)
    constexpr std::array<int, 3> p{1, 0, 2};
    std::array<std::array<double, 3>, 3> m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = ned[p[i]][p[j]];
    return m;
}

double source_time_function(double t, double tau) {
    if (t <= 0.0) return 0.0;
    const double u = t / tau;
    return 1.0 - (1.0 + u) * std::exp(-u);
}

double source_time_function_rate(double t, double tau) {
    if (t <= 0.0) return 0.0;
    const double u = t / tau;
    return u / tau * std::exp(-u);
}

WaveSolver::WaveSolver(const geology::GeologyField& geology, const SourceSpec& source, const SimConfig& config,
                       int force_component)
    : h_(config.h_m), cfg_(config), src_(source), force_component_(force_component) {
    const auto& shape = geology.vs.shape();
    check(shape.size() == 3, "geology field must be rank 3");
    nx_ = shape[0];
    ny_ = shape[1];
    nz_ = shape[2];
    check(nx_ >= 4 && ny_ >= 4 && nz_ >= 4, "solver grid too small");

    double max_vs = 0.0;
    for (double v : geology.vs.values()) {
        check(v > 0.0 && std::isfinite(v), "shear velocities must be positive and finite");
        max_vs = std::max(max_vs, v);
    }
    src_.validate();
    cfg_.validate(max_vs);
    dt_ = cfg_.dt_s;
    inv_rho_ = 1.0 / cfg_.density;

    const double ext_x = static_cast<double>(nx_ - 1) * h_;
    const double ext_y = static_cast<double>(ny_ - 1) * h_;
    const double ext_z = static_cast<double>(nz_ - 1) * h_;
    const double depth = -src_.position_m[2];
    check(src_.position_m[0] >= 0.0 && src_.position_m[0] <= ext_x && src_.position_m[1] >= 0.0 &&
              src_.position_m[1] <= ext_y && depth <= ext_z,
          "source position outside the domain");
    src_idx_ = {static_cast<std::size_t>(std::llround(src_.position_m[0] / h_)),
                static_cast<std::size_t>(std::llround(src_.position_m[1] / h_)),
                static_cast<std::size_t>(std::llround(depth / h_))};
    check(src_idx_[0] >= 1 && src_idx_[0] <= nx_ - 2 && src_idx_[1] >= 1 && src_idx_[1] <= ny_ - 2 &&
              src_idx_[2] >= 1 && src_idx_[2] <= nz_ - 2,
          "source must sit at least one cell inside the domain");

    moment_ = moment_tensor_from_angles(src_.strike_deg, src_.dip_deg, src_.rake_deg, src_.moment_scale);

    const std::size_t padded = (nx_ + 2 * kPad) * (ny_ + 2 * kPad) * (nz_ + 2 * kPad);
    for (auto* f : {&state_.vx, &state_.vy, &state_.vz, &state_.txx, &state_.tyy, &state_.tzz, &state_.txy,
                    &state_.txz, &state_.tyz})
        f->assign(padded, 0.0);
    lam_.assign(padded, 0.0);
    mu_.assign(padded, 0.0);
    mu_xy_.assign(padded, 0.0);
    mu_xz_.assign(padded, 0.0);
    mu_yz_.assign(padded, 0.0);

    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    const auto at = [X, Y](std::size_t i, std::size_t j, std::size_t k) {
        return ((k + kPad) * Y + (j + kPad)) * X + (i + kPad);
    };
    const double rho = cfg_.density;
    const double lam_factor = cfg_.vp_vs_ratio * cfg_.vp_vs_ratio - 2.0;
    const auto mu_at = [&](std::size_t i, std::size_t j, std::size_t k) {
        const double vs = geology.vs.at({std::min(i, nx_ - 1), std::min(j, ny_ - 1), std::min(k, nz_ - 1)});
        return rho * vs * vs;
    };
    for (std::size_t k = 0; k < nz_; ++k)
        for (std::size_t j = 0; j < ny_; ++j)
            for (std::size_t i = 0; i < nx_; ++i) {
                const double m = mu_at(i, j, k);
                mu_[at(i, j, k)] = m;
                lam_[at(i, j, k)] = lam_factor * m;
                // harmonic averages at the shear-stress nodes
                mu_xy_[at(i, j, k)] =
                    4.0 / (1.0 / m + 1.0 / mu_at(i + 1, j, k) + 1.0 / mu_at(i, j + 1, k) + 1.0 / mu_at(i + 1, j + 1, k));
                mu_xz_[at(i, j, k)] =
                    4.0 / (1.0 / m + 1.0 / mu_at(i + 1, j, k) + 1.0 / mu_at(i, j, k + 1) + 1.0 / mu_at(i + 1, j, k + 1));
                mu_yz_[at(i, j, k)] =
                    4.0 / (1.0 / m + 1.0 / mu_at(i, j + 1, k) + 1.0 / mu_at(i, j, k + 1) + 1.0 / mu_at(i, j + 1, k + 1));
            }

    // Cerjan taper: lateral faces and the bottom, never the free surface.
    const std::size_t W = cfg_.sponge_width;
    if (W > 0 && cfg_.sponge_strength > 0.0) {
        for (std::size_t k = 0; k < nz_; ++k)
            for (std::size_t j = 0; j < ny_; ++j)
                for (std::size_t i = 0; i < nx_; ++i) {
                    const std::size_t d = std::min({i, nx_ - 1 - i, j, ny_ - 1 - j, nz_ - 1 - k});
                    if (d >= W) continue;
                    const double u = cfg_.sponge_strength * (1.0 - static_cast<double>(d) / static_cast<double>(W));
                    sponge_.emplace_back(at(i, j, k), std::exp(-u * u));
                }
    }
}

void WaveSolver::update_velocities() {
    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    const std::ptrdiff_t sx = 1, sy = static_cast<std::ptrdiff_t>(X), sz = static_cast<std::ptrdiff_t>(X * Y);
    const double a = dt_ * inv_rho_ / h_;
    const double* txx = state_.txx.data();
    const double* tyy = state_.tyy.data();
    const double* tzz = state_.tzz.data();
    const double* txy = state_.txy.data();
    const double* txz = state_.txz.data();
    const double* tyz = state_.tyz.data();
    double* vx = state_.vx.data();
    double* vy = state_.vy.data();
    double* vz = state_.vz.data();

    const auto dfwd = [](const double* f, std::size_t p, std::ptrdiff_t s) {
        return kC1 * (f[p + s] - f[p]) - kC2 * (f[p + 2 * s] - f[p - s]);
    };
    const auto dbwd = [](const double* f, std::size_t p, std::ptrdiff_t s) {
        return kC1 * (f[p] - f[p - s]) - kC2 * (f[p + s] - f[p - 2 * s]);
    };

    for (std::size_t k = 0; k < nz_; ++k)
        for (std::size_t j = 0; j < ny_; ++j) {
            std::size_t p = ((k + kPad) * Y + (j + kPad)) * X + kPad;
            for (std::size_t i = 0; i < nx_; ++i, ++p) {
                vx[p] += a * (dfwd(txx, p, sx) + dbwd(txy, p, sy) + dbwd(txz, p, sz));
                vy[p] += a * (dbwd(txy, p, sx) + dfwd(tyy, p, sy) + dbwd(tyz, p, sz));
                vz[p] += a * (dbwd(txz, p, sx) + dbwd(tyz, p, sy) + dfwd(tzz, p, sz));
            }
        }

    if (force_component_ >= 0) {
        const double rate = source_time_function_rate(state_.time, src_.tau_s);
        const std::size_t p = ((src_idx_[2] + kPad) * Y + (src_idx_[1] + kPad)) * X + (src_idx_[0] + kPad);
        const double amp = dt_ * inv_rho_ * src_.moment_scale * rate / (h_ * h_ * h_);
        double* v[3] = {vx, vy, vz};
        const std::ptrdiff_t back[3] = {sx, sy, sz};
        // split over the two staggered nodes so the force acts at the node itself
        v[force_component_][p] += 0.5 * amp;
        v[force_component_][p - back[force_component_]] += 0.5 * amp;
    }
}

void WaveSolver::update_stresses() {
    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    const std::ptrdiff_t sx = 1, sy = static_cast<std::ptrdiff_t>(X), sz = static_cast<std::ptrdiff_t>(X * Y);
    const double a = dt_ / h_;
    const double* vx = state_.vx.data();
    const double* vy = state_.vy.data();
    const double* vz = state_.vz.data();
    double* txx = state_.txx.data();
    double* tyy = state_.tyy.data();
    double* tzz = state_.tzz.data();
    double* txy = state_.txy.data();
    double* txz = state_.txz.data();
    double* tyz = state_.tyz.data();

    const auto dfwd = [](const double* f, std::size_t p, std::ptrdiff_t s) {
        return kC1 * (f[p + s] - f[p]) - kC2 * (f[p + 2 * s] - f[p - s]);
    };
    const auto dbwd = [](const double* f, std::size_t p, std::ptrdiff_t s) {
        return kC1 * (f[p] - f[p - s]) - kC2 * (f[p + s] - f[p - 2 * s]);
    };

    for (std::size_t k = 0; k < nz_; ++k)
        for (std::size_t j = 0; j < ny_; ++j) {
            std::size_t p = ((k + kPad) * Y + (j + kPad)) * X + kPad;
            for (std::size_t i = 0; i < nx_; ++i, ++p) {
                const double dxvx = dbwd(vx, p, sx);
                const double dyvy = dbwd(vy, p, sy);
                const double lam = lam_[p], mu = mu_[p];
                if (k == 0) {
                    // free-surface form of Hooke's law: dzvz eliminated via tzz = 0
                    const double lp2m = lam + 2.0 * mu;
                    txx[p] += a * (4.0 * mu * (lam + mu) / lp2m * dxvx + 2.0 * lam * mu / lp2m * dyvy);
                    tyy[p] += a * (2.0 * lam * mu / lp2m * dxvx + 4.0 * mu * (lam + mu) / lp2m * dyvy);
                } else {
                    const double dzvz = (k == 1) ? (vz[p] - vz[p - sz]) : dbwd(vz, p, sz);
                    const double dil = dxvx + dyvy + dzvz;
                    txx[p] += a * (lam * dil + 2.0 * mu * dxvx);
                    tyy[p] += a * (lam * dil + 2.0 * mu * dyvy);
                    tzz[p] += a * (lam * dil + 2.0 * mu * dzvz);
                }
                txy[p] += a * mu_xy_[p] * (dfwd(vx, p, sy) + dfwd(vy, p, sx));
                const double dzvx = (k == 0) ? (vx[p + sz] - vx[p]) : dfwd(vx, p, sz);
                const double dzvy = (k == 0) ? (vy[p + sz] - vy[p]) : dfwd(vy, p, sz);
                txz[p] += a * mu_xz_[p] * (dzvx + dfwd(vz, p, sx));
                tyz[p] += a * mu_yz_[p] * (dzvy + dfwd(vz, p, sy));
            }
        }
}

void WaveSolver::inject_source() {
    if (force_component_ >= 0) return;
    const double rate = source_time_function_rate(state_.time + 0.5 * dt_, src_.tau_s);
    if (rate == 0.0) return;
    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    const auto at = [X, Y](std::size_t i, std::size_t j, std::size_t k) {
        return ((k + kPad) * Y + (j + kPad)) * X + (i + kPad);
    };
    const std::size_t i0 = src_idx_[0], j0 = src_idx_[1], k0 = src_idx_[2];
    const double amp = dt_ * rate / (h_ * h_ * h_);

    state_.txx[at(i0, j0, k0)] -= amp * moment_[0][0];
    state_.tyy[at(i0, j0, k0)] -= amp * moment_[1][1];
    state_.tzz[at(i0, j0, k0)] -= amp * moment_[2][2];
    // off-diagonal nodes straddle the source point; split evenly over the four
    // nearest shear nodes to keep the couple centred
    const double qxy = 0.25 * amp * moment_[0][1];
    const double qxz = 0.25 * amp * moment_[0][2];
    const double qyz = 0.25 * amp * moment_[1][2];
    for (std::size_t di = 0; di < 2; ++di)
        for (std::size_t dj = 0; dj < 2; ++dj) state_.txy[at(i0 - 1 + di, j0 - 1 + dj, k0)] -= qxy;
    for (std::size_t di = 0; di < 2; ++di)
        for (std::size_t dk = 0; dk < 2; ++dk) state_.txz[at(i0 - 1 + di, j0, k0 - 1 + dk)] -= qxz;
    for (std::size_t dj = 0; dj < 2; ++dj)
        for (std::size_t dk = 0; dk < 2; ++dk) state_.tyz[at(i0, j0 - 1 + dj, k0 - 1 + dk)] -= qyz;
}

void WaveSolver::apply_free_surface() {
    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(X * Y);
    double* tzz = state_.tzz.data();
    double* txz = state_.txz.data();
    double* tyz = state_.tyz.data();
    for (std::size_t j = 0; j < ny_; ++j) {
        std::size_t p = (kPad * Y + (j + kPad)) * X + kPad;  // k = 0 row
        for (std::size_t i = 0; i < nx_; ++i, ++p) {
            tzz[p] = 0.0;
            tzz[p - sz] = -tzz[p + sz];
            tzz[p - 2 * sz] = -tzz[p + 2 * sz];
            txz[p - sz] = -txz[p];
            txz[p - 2 * sz] = -txz[p + sz];
            tyz[p - sz] = -tyz[p];
            tyz[p - 2 * sz] = -tyz[p + sz];
        }
    }
}

void WaveSolver::apply_sponge() {
    for (auto* f : {&state_.vx, &state_.vy, &state_.vz, &state_.txx, &state_.tyy, &state_.tzz, &state_.txy,
                    &state_.txz, &state_.tyz}) {
        double* d = f->data();
        for (const auto& [p, g] : sponge_) d[p] *= g;
    }
}

void WaveSolver::check_finite() const {
    for (const auto* f : {&state_.vx, &state_.vy, &state_.vz}) {
        for (double v : *f)
            if (!std::isfinite(v))
                fail("wavefield blew up at step " + std::to_string(state_.step_index) + " (non-finite velocity)");
    }
}

void WaveSolver::step() {
    update_velocities();
    update_stresses();
    inject_source();
    apply_free_surface();
    apply_sponge();
    state_.time += dt_;
    ++state_.step_index;
    check_finite();
}

std::array<double, 3> WaveSolver::velocity_at(double x_m, double y_m, double z_depth_m) const {
    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    const std::ptrdiff_t sx = 1, sy = static_cast<std::ptrdiff_t>(X), sz = static_cast<std::ptrdiff_t>(X * Y);
    const std::size_t i = std::min(static_cast<std::size_t>(std::llround(std::max(x_m, 0.0) / h_)), nx_ - 1);
    const std::size_t j = std::min(static_cast<std::size_t>(std::llround(std::max(y_m, 0.0) / h_)), ny_ - 1);
    const std::size_t k = std::min(static_cast<std::size_t>(std::llround(std::max(z_depth_m, 0.0) / h_)), nz_ - 1);
    const std::size_t p = ((k + kPad) * Y + (j + kPad)) * X + (i + kPad);
    const double* vx = state_.vx.data();
    const double* vy = state_.vy.data();
    const double* vz = state_.vz.data();

    const double ex = 0.5 * (vx[p - sx] + vx[p]);
    const double nn = 0.5 * (vy[p - sy] + vy[p]);
    double dz;
    if (k == 0) {
        // ghost value above the surface from the traction-free condition
        const double dxvx = vx[p] - vx[p - sx];
        const double dyvy = vy[p] - vy[p - sy];
        const double ghost = vz[p] + lam_[p] / (lam_[p] + 2.0 * mu_[p]) * (dxvx + dyvy);
        dz = 0.5 * (ghost + vz[p]);
    } else {
        dz = 0.5 * (vz[p - sz] + vz[p]);
    }
    return {ex, nn, -dz};
}

double WaveSolver::kinetic_energy() const {
    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    double e = 0.0;
    for (std::size_t k = 0; k < nz_; ++k)
        for (std::size_t j = 0; j < ny_; ++j) {
            std::size_t p = ((k + kPad) * Y + (j + kPad)) * X + kPad;
            for (std::size_t i = 0; i < nx_; ++i, ++p) {
                const double vx = state_.vx[p], vy = state_.vy[p], vz = state_.vz[p];
                e += vx * vx + vy * vy + vz * vz;
            }
        }
    return 0.5 * cfg_.density * e * h_ * h_ * h_;
}

double WaveSolver::strain_energy() const {
    const std::size_t X = nx_ + 2 * kPad, Y = ny_ + 2 * kPad;
    double e = 0.0;
    for (std::size_t k = 0; k < nz_; ++k)
        for (std::size_t j = 0; j < ny_; ++j) {
            std::size_t p = ((k + kPad) * Y + (j + kPad)) * X + kPad;
            for (std::size_t i = 0; i < nx_; ++i, ++p) {
                const double lam = lam_[p], mu = mu_[p];
                const double tr = state_.txx[p] + state_.tyy[p] + state_.tzz[p];
                const double sq = state_.txx[p] * state_.txx[p] + state_.tyy[p] * state_.tyy[p] +
                                  state_.tzz[p] * state_.tzz[p] +
                                  2.0 * (state_.txy[p] * state_.txy[p] + state_.txz[p] * state_.txz[p] +
                                         state_.tyz[p] * state_.tyz[p]);
                e += (sq - lam / (3.0 * lam + 2.0 * mu) * tr * tr) / (4.0 * mu);
            }
        }
    return e * h_ * h_ * h_;
}

SurfaceRecord WaveSolver::run() {
    const std::size_t nt = cfg_.record_points();
    const std::size_t nsx = cfg_.sensor_grid[0], nsy = cfg_.sensor_grid[1];
    const double sp = cfg_.sensor_spacing_m;

    // centre the sensor grid, snapped to solver nodes
    const auto centred = [this, sp](std::size_t n_nodes, std::size_t n_sens) {
        const double extent = static_cast<double>(n_nodes - 1) * h_;
        const double span = static_cast<double>(n_sens - 1) * sp;
        check(span <= extent + 1e-9, "sensor grid does not fit inside the domain");
        const double off = std::round(0.5 * (extent - span) / h_) * h_;
        return off;
    };
    const double off_x = centred(nx_, nsx);
    const double off_y = centred(ny_, nsy);

    SurfaceRecord rec;
    rec.sensor_x_m.resize(nsx);
    rec.sensor_y_m.resize(nsy);
    for (std::size_t i = 0; i < nsx; ++i)
        rec.sensor_x_m[i] = std::round((off_x + static_cast<double>(i) * sp) / h_) * h_;
    for (std::size_t j = 0; j < nsy; ++j)
        rec.sensor_y_m[j] = std::round((off_y + static_cast<double>(j) * sp) / h_) * h_;
    rec.times_s.resize(nt);
    for (std::size_t m = 0; m < nt; ++m)
        rec.times_s[m] = cfg_.record_window_s[0] + static_cast<double>(m) / cfg_.record_rate_hz;

    // velocities after step n sit at time (n - 1/2) dt
    const double t_last = rec.times_s.back();
    const std::size_t total_steps = static_cast<std::size_t>(std::ceil(t_last / dt_ + 0.5)) + 1;

    const std::size_t ns = nsx * nsy;
    std::vector<double> buf;
    buf.reserve(total_steps * ns * 3);
    for (std::size_t n = 0; n < total_steps; ++n) {
        step();
        for (std::size_t i = 0; i < nsx; ++i)
            for (std::size_t j = 0; j < nsy; ++j) {
                const auto v = velocity_at(rec.sensor_x_m[i], rec.sensor_y_m[j], 0.0);
                buf.insert(buf.end(), v.begin(), v.end());
            }
    }

    rec.data = Tensor({3, nsx, nsy, nt});
    for (std::size_t m = 0; m < nt; ++m) {
        const double s = rec.times_s[m] / dt_ + 0.5;  // fractional step index
        std::size_t k1 = static_cast<std::size_t>(std::floor(s));
        k1 = std::clamp<std::size_t>(k1, 1, total_steps - 1);
        const double frac = s - static_cast<double>(k1);
        for (std::size_t i = 0; i < nsx; ++i)
            for (std::size_t j = 0; j < nsy; ++j) {
                const std::size_t cell = (i * nsy + j) * 3;
                const double* lo = buf.data() + (k1 - 1) * ns * 3 + cell;
                const double* hi = buf.data() + k1 * ns * 3 + cell;
                for (std::size_t c = 0; c < 3; ++c)
                    rec.data.at({c, i, j, m}) = lo[c] + frac * (hi[c] - lo[c]);
            }
    }
    return rec;
}

SurfaceRecord run_simulation(const geology::GeologyField& geology, const SourceSpec& source, const SimConfig& config) {
    WaveSolver solver(geology, source, config);
    return solver.run();
}

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
    return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

// Tap with linear extrapolation past the ends (keeps affine fields affine).
double tap(const double* line, std::ptrdiff_t n, std::ptrdiff_t i, std::ptrdiff_t stride) {
    if (n == 1) return line[0];
    if (i < 0) {
        const std::ptrdiff_t j = std::min<std::ptrdiff_t>(-i, n - 1);
        return 2.0 * line[0] - line[j * stride];
    }
    if (i >= n) {
        const std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, 2 * (n - 1) - i);
        return 2.0 * line[(n - 1) * stride] - line[j * stride];
    }
    return line[i * stride];
}

Tensor resample_axis_catmull(const Tensor& x, std::size_t axis, std::size_t m) {
    const std::size_t n = x.extent(axis);
    std::vector<std::size_t> out_shape(x.shape().begin(), x.shape().end());
    out_shape[axis] = m;
    Tensor out(out_shape);
    if (out.numel() == 0) return out;

    const auto in_strides = x.strides();
    const auto out_strides = out.strides();
    const auto s = static_cast<std::ptrdiff_t>(in_strides[axis]);
    const double scale = (m > 1 && n > 1) ? static_cast<double>(n - 1) / static_cast<double>(m - 1) : 0.0;

    const std::size_t n_lines = x.numel() / n;
    for (std::size_t line = 0; line < n_lines; ++line) {
        std::size_t rem = line, in_base = 0, out_base = 0;
        for (std::size_t a = x.rank(); a-- > 0;) {
            if (a == axis) continue;
            const std::size_t idx = rem % x.extent(a);
            rem /= x.extent(a);
            in_base += idx * in_strides[a];
            out_base += idx * out_strides[a];
        }
        const double* src = x.data() + in_base;
        double* dst = out.data() + out_base;
        for (std::size_t j = 0; j < m; ++j) {
            const double p = static_cast<double>(j) * scale;
            const auto i1 = static_cast<std::ptrdiff_t>(std::floor(p));
            const double t = p - static_cast<double>(i1);
            dst[j * out_strides[axis]] =
                catmull_rom(tap(src, static_cast<std::ptrdiff_t>(n), i1 - 1, s),
                            tap(src, static_cast<std::ptrdiff_t>(n), i1, s),
                            tap(src, static_cast<std::ptrdiff_t>(n), i1 + 1, s),
                            tap(src, static_cast<std::ptrdiff_t>(n), i1 + 2, s), t);
        }
    }
    return out;
}

}  // namespace

Tensor interpolate_surface(const Tensor& data, std::size_t nx_out, std::size_t ny_out) {
    check(data.rank() == 4 && data.extent(0) == 3, "interpolate_surface: expected a (3, nx, ny, nt) record");
    check(nx_out > 0 && ny_out > 0, "interpolate_surface: output grid must be non-empty");
    return resample_axis_catmull(resample_axis_catmull(data, 1, nx_out), 2, ny_out);
}

}  // namespace seisuno::wavesim
