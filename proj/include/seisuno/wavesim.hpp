#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "seisuno/geology.hpp"
#include "seisuno/tensor.hpp"

namespace seisuno::wavesim {

/// Double-couple point source. position_m uses x = east, y = north, z <= 0
/// below the free surface.
struct SourceSpec {
    std::array<double, 3> position_m{4800.0, 4800.0, -8400.0};
    double strike_deg = 50.0;
    double dip_deg = 45.0;
    double rake_deg = 88.0;
    double tau_s = 0.127;
    double moment_scale = 1.0;

    void validate() const;
};

struct SimConfig {
    double h_m = 150.0;
    double dt_s = 0.0;  // must be set explicitly or via auto_dt()
    double duration_s = 7.5;
    double vp_vs_ratio = 1.7;
    double density = 2700.0;
    std::size_t sponge_width = 8;
    double sponge_strength = 0.3;
    std::array<std::size_t, 2> sensor_grid{16, 16};
    double sensor_spacing_m = 600.0;
    double record_rate_hz = 20.0;
    std::array<double, 2> record_window_s{1.0, 7.4};

    /// Largest stable step for the 4th-order stencil: 0.49 h / (alpha max_vs).
    double cfl_limit(double max_vs) const;
    /// Sets dt_s to safety * cfl_limit and returns it.
    double auto_dt(double max_vs, double safety = 1.0);
    /// Number of recorded samples ((end - start) * rate, must be integral).
    std::size_t record_points() const;
    void validate(double max_vs) const;
};

/// Staggered velocity / stress grids at one time level. Arrays are padded by
/// two ghost cells per side; tests may inspect them through WaveSolver.
struct WavefieldState {
    std::vector<double> vx, vy, vz;
    std::vector<double> txx, tyy, tzz, txy, txz, tyz;
    double time = 0.0;
    std::size_t step_index = 0;
};

/// data layout: (3 components, sensors_x, sensors_y, nt). Components are
/// east, north, vertical (positive up).
struct SurfaceRecord {
    Tensor data;
    std::vector<double> times_s;
    std::vector<double> sensor_x_m;
    std::vector<double> sensor_y_m;
};

/// Aki-Richards double-couple moment tensor in north-east-down axes.
std::array<std::array<double, 3>, 3> moment_tensor_ned(double strike_deg, double dip_deg, double rake_deg,
                                                       double scale);

/// The same tensor rotated into the solver's east-north-down axes.
std::array<std::array<double, 3>, 3> moment_tensor_from_angles(double strike_deg, double dip_deg, double rake_deg,
                                                               double scale);

/// 1 - (1 + t/tau) exp(-t/tau) for t >= 0, 0 for negative t.
double source_time_function(double t, double tau);
/// d/dt of the above: (t/tau^2) exp(-t/tau) for t >= 0, else 0.
double source_time_function_rate(double t, double tau);

/// Velocity-stress leapfrog solver: 4th-order staggered differences in space
/// (reduced to 2nd order beside the free surface), 2nd order in time,
/// stress-imaging free surface at z = 0, Cerjan sponge on lateral and bottom
/// boundaries. Material is derived from the geology via mu = rho Vs^2 and
/// lambda = rho (alpha^2 - 2) Vs^2.
class WaveSolver {
public:
    /// `force_component` < 0 selects the moment-tensor source from `source`;
    /// 0/1/2 replaces it with a point force along east/north/down whose
    /// amplitude follows source_time_function_rate (used by reciprocity and
    /// radiation tests).
    WaveSolver(const geology::GeologyField& geology, const SourceSpec& source, const SimConfig& config,
               int force_component = -1);

    void step();
    const WavefieldState& state() const { return state_; }
    /// Mutable access for checkpoint restore; shapes must be preserved.
    WavefieldState& mutable_state() { return state_; }
    double time() const { return state_.time; }

    /// Velocity sampled at a physical point (nearest node, staggered
    /// components averaged to the common node). Vertical is positive up.
    std::array<double, 3> velocity_at(double x_m, double y_m, double z_depth_m) const;

    double kinetic_energy() const;
    double strain_energy() const;

    SurfaceRecord run();

private:
    void update_velocities();
    void update_stresses();
    void inject_source();
    void apply_free_surface();
    void apply_sponge();
    void check_finite() const;

    std::size_t nx_, ny_, nz_;
    double h_, dt_;
    SimConfig cfg_;
    SourceSpec src_;
    std::array<std::array<double, 3>, 3> moment_{};
    int force_component_ = -1;
    std::array<std::size_t, 3> src_idx_{};

    // Material fields, padded like the wavefields.
    std::vector<double> lam_, mu_;            // at normal-stress nodes
    std::vector<double> mu_xy_, mu_xz_, mu_yz_;
    std::vector<std::pair<std::size_t, double>> sponge_;
    double inv_rho_ = 0.0;

    WavefieldState state_;
};

/// Full pipeline: time-steps the solver and samples the sensor grid at
/// record_rate_hz inside the record window (linear interpolation between
/// velocity half-steps).
SurfaceRecord run_simulation(const geology::GeologyField& geology, const SourceSpec& source, const SimConfig& config);

/// Separable Catmull-Rom resampling of the sensor grid: (3, nx, ny, nt) ->
/// (3, nx_out, ny_out, nt). Corner sensors map to corner output nodes and
/// border taps are extrapolated linearly, so affine fields are reproduced
/// exactly. Time samples are never mixed.
Tensor interpolate_surface(const Tensor& data, std::size_t nx_out, std::size_t ny_out);

}  // namespace seisuno::wavesim
