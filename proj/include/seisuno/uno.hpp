#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "seisuno/autodiff.hpp"
#include "seisuno/tensor.hpp"

namespace seisuno::uno {

struct LayerPlan {
    std::size_t channels = 0;                 // output channels
    std::array<std::size_t, 3> modes{};      // retained Fourier modes per axis
    std::array<std::size_t, 3> out_res{};    // output grid extents
    bool activation = true;
};

/// Width / mode / resolution schedule of the 8-layer U-shaped operator.
/// Encoder layers 1-4 shrink to the bottleneck, decoder layers 5-8 grow back;
/// decoder layer l concatenates the output of encoder layer 9-l. The last
/// layer doubles the third axis, which the output reinterprets as time.
struct UnoSchedule {
    std::string name;
    std::array<std::size_t, 3> entry_res{};
    std::size_t v0_channels = 0;
    std::size_t lift_hidden = 0;
    std::size_t q_hidden = 0;
    bool pointwise_relu = true;  // relu inside the lift and projection heads
    std::vector<LayerPlan> layers;

    void validate() const;
    /// Input channels of layer `l` (0-based), accounting for skip concatenation.
    std::size_t layer_in_channels(std::size_t l) const;
    std::array<std::size_t, 3> layer_in_res(std::size_t l) const;
    std::array<std::size_t, 3> output_res() const { return layers.back().out_res; }
    /// Final grid for an input sampled at in_res: output_res scaled by
    /// in_res / entry_res per axis (must divide to whole extents).
    std::array<std::size_t, 3> scaled_output_res(const std::array<std::size_t, 3>& in_res) const;
    /// Closed-form count of stored real parameters (complex entries count twice).
    std::size_t parameter_count() const;

    /// `with_activations = false` builds the fully linear variant used by the
    /// resolution-invariance checks (pointwise nonlinearities between grids of
    /// different size break exact band-limited equivalence).
    static UnoSchedule full64(bool with_activations = true);
    static UnoSchedule desk32(bool with_activations = true);
    static UnoSchedule desk16(bool with_activations = true);
    static UnoSchedule tiny4(bool with_activations = true);
    static UnoSchedule by_name(const std::string& name, bool with_activations = true);
};

/// Input standardization: a = V_S² mapped to target · (a - mean) / std.
/// Statistics come from the training split (see the training module).
struct InputNorm {
    double mean = 0.0;
    double stddev = 1.0;
    double target = 0.25;

    Tensor apply(const Tensor& vs) const;
};

/// Per-axis coordinates of voxel centers, normalized to [0, 1]: 3 channels.
Tensor positional_encoding(const std::array<std::size_t, 3>& extents);

class UnoModel {
public:
    UnoModel(UnoSchedule schedule, std::uint64_t seed);

    const UnoSchedule& schedule() const { return schedule_; }
    const InputNorm& norm() const { return norm_; }
    void set_norm(const InputNorm& n);
    std::uint64_t seed() const { return seed_; }

    /// Canonical parameter enumeration (the order used by the optimizer, the
    /// forward graph and the checkpoint).
    struct ParamRefs {
        std::vector<Tensor*> real;
        std::vector<std::string> real_names;
        std::vector<CTensor*> complex;
        std::vector<std::string> complex_names;
    };
    ParamRefs params();
    std::size_t parameter_count() const;  // enumerated, not the formula

    /// Normalized V_S² channel concatenated with the positional encoding.
    /// Inputs at a resolution other than the schedule entry get the entry-grid
    /// encoding spectrally resampled, so band-limited inputs stay consistent
    /// across resolutions.
    Tensor input_features(const Tensor& vs) const;

    struct Graph {
        ad::Var output;                    // (3, X, Y, T)
        std::vector<ad::Var> real_params;  // aligned with ParamRefs order
        std::vector<ad::CVar> complex_params;
    };
    /// Builds the forward graph on `tape`. Interior grids follow the schedule
    /// regardless of the input sampling; the output grid scales with the input
    /// (T = 2 Z_in), so off-entry resolutions yield re-sampled outputs of the
    /// same field.
    Graph forward(ad::Tape& tape, const Tensor& vs, bool needs_grad) const;

    Tensor predict(const Tensor& vs) const;

    void save(const std::string& dir) const;
    static UnoModel load(const std::string& dir);

private:
    UnoSchedule schedule_;
    InputNorm norm_;
    std::uint64_t seed_ = 0;

    Tensor p_w1_, p_b1_, p_w2_, p_b2_;
    std::vector<Tensor> w_;
    std::vector<CTensor> r_;
    std::array<Tensor, 3> q_w1_, q_b1_, q_w2_, q_b2_;

    void init_weights();
};

}  // namespace seisuno::uno
