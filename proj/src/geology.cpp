#include "seisuno/geology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "seisuno/fft.hpp"

namespace seisuno::geology {

void GeologyConfig::validate() const {
    for (std::size_t e : grid) check(e >= 2, "geology: every grid extent must be at least 2");
    check(domain_size_m > 0.0, "geology: domain size must be positive");
    check(n_layers_range[0] >= 1 && n_layers_range[1] <= 6 && n_layers_range[0] <= n_layers_range[1],
          "geology: layer count range must lie within [1, 6]");
    check(clip_low < mean_vs_low, "geology: clip_low must be below mean_vs_low");
    check(mean_vs_low <= mean_vs_high, "geology: mean velocity interval is inverted");
    check(mean_vs_high < clip_high, "geology: mean_vs_high must be below clip_high");
    check(clip_high <= bottom_vs, "geology: clip_high must not exceed bottom_vs");
    check(corr_len_range_m[0] > 0.0 && corr_len_range_m[0] <= corr_len_range_m[1],
          "geology: correlation length range invalid");
    check(cv_std >= 0.0, "geology: cv_std must be non-negative");
    check(hurst > 0.0 && hurst < 1.0, "geology: hurst exponent must lie in (0, 1)");
    check(bottom_fraction > 0.0 && bottom_fraction < 1.0, "geology: bottom_fraction must lie in (0, 1)");
}

std::array<double, 3> GeologyConfig::spacing_m() const {
    return {domain_size_m / static_cast<double>(grid[0]), domain_size_m / static_cast<double>(grid[1]),
            domain_size_m / static_cast<double>(grid[2])};
}

std::size_t GeologyConfig::bottom_cells() const {
    const auto n = static_cast<std::size_t>(std::llround(bottom_fraction * static_cast<double>(grid[2])));
    return std::max<std::size_t>(1, std::min(n, grid[2] - 1));
}

std::vector<LayerSpec> sample_layer_specs(rng::RandomStream& rs, const GeologyConfig& config) {
    config.validate();
    const std::size_t column = config.grid[2] - config.bottom_cells();
    const auto n = static_cast<std::size_t>(rs.uniform_int(config.n_layers_range[0], config.n_layers_range[1]));
    if (column < n) fail("geology: z column too small to host " + std::to_string(n) + " layers");

    std::set<std::size_t> cuts;
    while (cuts.size() + 1 < n)
        cuts.insert(static_cast<std::size_t>(rs.uniform_int(1, static_cast<std::int64_t>(column) - 1)));

    std::vector<LayerSpec> layers;
    layers.reserve(n);
    std::size_t top = 0;
    auto close_layer = [&](std::size_t bottom) {
        LayerSpec spec;
        spec.top_index = top;
        spec.bottom_index = bottom;
        layers.push_back(spec);
        top = bottom;
    };
    for (std::size_t cut : cuts) close_layer(cut);
    close_layer(column);
    for (auto& layer : layers) {
        layer.mean_vs = rs.uniform(config.mean_vs_low, config.mean_vs_high);
        layer.corr_len_m = rs.uniform(config.corr_len_range_m[0], config.corr_len_range_m[1]);
        layer.cv = rs.normal_above(config.cv_mean, config.cv_std, 0.0);
    }
    return layers;
}

Tensor von_karman_field(const std::array<std::size_t, 3>& grid, const std::array<double, 3>& spacing_m,
                        double corr_len_m, double hurst, rng::RandomStream& rs) {
    for (std::size_t e : grid) check(e >= 2, "von_karman_field: degenerate grid");
    for (double s : spacing_m) check(s > 0.0, "von_karman_field: spacing must be positive");
    check(corr_len_m > 0.0, "von_karman_field: correlation length must be positive");
    check(hurst > 0.0 && hurst < 1.0, "von_karman_field: hurst must lie in (0, 1)");

    Tensor white({grid[0], grid[1], grid[2]});
    for (std::size_t i = 0; i < white.numel(); ++i) white[i] = rs.normal();

    CTensor spec = fft::fft3(white, {0, 1, 2});
    const double a2 = corr_len_m * corr_len_m;
    const double expo = -(hurst + 1.5) / 2.0;
    const double tau = 2.0 * std::numbers::pi;
    auto sfreq = [](std::size_t i, std::size_t n) {
        const auto s = static_cast<long long>(i);
        return static_cast<double>(i <= n / 2 ? s : s - static_cast<long long>(n));
    };
    std::size_t idx = 0;
    for (std::size_t i = 0; i < grid[0]; ++i) {
        const double f1 = sfreq(i, grid[0]) / (static_cast<double>(grid[0]) * spacing_m[0]);
        for (std::size_t j = 0; j < grid[1]; ++j) {
            const double f2 = sfreq(j, grid[1]) / (static_cast<double>(grid[1]) * spacing_m[1]);
            for (std::size_t k = 0; k < grid[2]; ++k, ++idx) {
                const double f3 = sfreq(k, grid[2]) / (static_cast<double>(grid[2]) * spacing_m[2]);
                const double k2 = tau * tau * (f1 * f1 + f2 * f2 + f3 * f3);
                spec[idx] *= std::pow(1.0 + k2 * a2, expo);
            }
        }
    }
    Tensor field = fft::ifft3(spec, {0, 1, 2}, grid);

    const double mean = seisuno::mean(field);
    double var = 0.0;
    for (std::size_t i = 0; i < field.numel(); ++i) {
        const double d = field[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(field.numel());
    if (var <= 0.0) fail("von_karman_field: degenerate (constant) realization");
    const double inv_sd = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < field.numel(); ++i) field[i] = (field[i] - mean) * inv_sd;
    return field;
}

namespace {

void check_partition(const std::vector<LayerSpec>& layers, std::size_t column) {
    check(!layers.empty(), "geology: at least one layer required");
    check(layers.front().top_index == 0, "geology: first layer must start at the surface");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        check(layers[i].bottom_index > layers[i].top_index, "geology: layer thickness must be >= 1 cell");
        if (i + 1 < layers.size())
            check(layers[i + 1].top_index == layers[i].bottom_index, "geology: layers must tile the column");
        check(layers[i].cv >= 0.0, "geology: cv must be non-negative");
        check(layers[i].corr_len_m > 0.0, "geology: corr_len must be positive");
    }
    check(layers.back().bottom_index == column, "geology: layers must end at the bottom layer");
}

}  // namespace

GeologyField assemble_geology(const std::vector<LayerSpec>& layers, const GeologyConfig& config,
                              rng::RandomStream& rs, bool apply_clip) {
    config.validate();
    const auto [nx, ny, nz] = config.grid;
    const std::size_t column = nz - config.bottom_cells();
    check_partition(layers, column);

    GeologyField out;
    out.layers = layers;
    out.seed = config.seed;
    out.vs = Tensor({nx, ny, nz});
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t k = column; k < nz; ++k) out.vs.at({i, j, k}) = config.bottom_vs;

    for (const LayerSpec& layer : layers) {
        rng::RandomStream child(rs.raw());
        const Tensor field = von_karman_field(config.grid, config.spacing_m(), layer.corr_len_m, config.hurst, child);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = layer.top_index; k < layer.bottom_index; ++k)
                    out.vs.at({i, j, k}) = layer.mean_vs * (1.0 + layer.cv * field.at({i, j, k}));
    }

    if (apply_clip)
        for (std::size_t i = 0; i < out.vs.numel(); ++i)
            out.vs[i] = std::clamp(out.vs[i], config.clip_low, config.clip_high);
    return out;
}

GeologyField generate(const GeologyConfig& config) {
    rng::RandomStream layer_stream(rng::derive_seed(config.seed, "geology-layers"));
    rng::RandomStream field_stream(rng::derive_seed(config.seed, "geology-fields"));
    const auto layers = sample_layer_specs(layer_stream, config);
    return assemble_geology(layers, config, field_stream);
}

}  // namespace seisuno::geology
