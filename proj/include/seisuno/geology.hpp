#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "seisuno/random.hpp"
#include "seisuno/tensor.hpp"

namespace seisuno::geology {

/// Sampling law for random layered shear-velocity volumes. The physical box
/// is a cube of edge domain_size_m; grid extents may differ per axis, so the
/// voxel spacing is domain_size_m / grid[i] along axis i. Depth increases
/// with the z index (z = 0 is the free surface).
struct GeologyConfig {
    std::array<std::size_t, 3> grid{64, 64, 64};
    double domain_size_m = 9600.0;
    std::array<int, 2> n_layers_range{1, 6};
    double mean_vs_low = 1785.0;
    double mean_vs_high = 3214.0;
    std::array<double, 2> corr_len_range_m{1500.0, 6000.0};
    double cv_mean = 0.2;
    double cv_std = 0.1;
    double clip_low = 1071.0;
    double clip_high = 4500.0;
    double bottom_vs = 4500.0;
    double hurst = 0.3;
    /// Fraction of the column occupied by the homogeneous bottom layer.
    double bottom_fraction = 0.125;
    std::uint64_t seed = 0;

    void validate() const;
    std::array<double, 3> spacing_m() const;
    /// Number of z cells in the bottom layer (at least 1).
    std::size_t bottom_cells() const;
};

/// One layer above the homogeneous bottom: z cells [top_index, bottom_index).
struct LayerSpec {
    std::size_t top_index = 0;
    std::size_t bottom_index = 0;
    double mean_vs = 0.0;
    double corr_len_m = 0.0;
    double cv = 0.0;

    std::size_t thickness() const { return bottom_index - top_index; }
};

struct GeologyField {
    Tensor vs;  // shape = config.grid, ordered [x, y, z]
    std::vector<LayerSpec> layers;
    std::uint64_t seed = 0;
};

/// Draws the layer partition and per-layer parameters. Draw order is pinned:
/// layer count, then the distinct cut points, then (mean_vs, corr_len, cv)
/// per layer from the surface downward. cv is redrawn until positive.
std::vector<LayerSpec> sample_layer_specs(rng::RandomStream& rs, const GeologyConfig& config);

/// Zero-mean unit-variance random field with a von Karman spectrum:
/// white noise shaped by sqrt(P), P(k) ~ (1 + k^2 a^2)^-(hurst + 3/2),
/// a = corr_len_m, then standardized with the sample statistics.
Tensor von_karman_field(const std::array<std::size_t, 3>& grid, const std::array<double, 3>& spacing_m,
                        double corr_len_m, double hurst, rng::RandomStream& rs);

/// Fills each layer with mean_vs * (1 + cv * field) using an independent
/// field per layer (child streams split off `rs` in layer order), sets the
/// bottom layer to bottom_vs, and clips. apply_clip=false exposes the
/// pre-clip volume for statistical tests.
GeologyField assemble_geology(const std::vector<LayerSpec>& layers, const GeologyConfig& config,
                              rng::RandomStream& rs, bool apply_clip = true);

/// sample_layer_specs + assemble_geology with substreams derived from
/// config.seed. Same (seed, config) gives a bit-identical field.
GeologyField generate(const GeologyConfig& config);

}  // namespace seisuno::geology
