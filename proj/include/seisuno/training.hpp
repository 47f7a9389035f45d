#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seisuno/tensor.hpp"
#include "seisuno/uno.hpp"

namespace seisuno::training {

struct TrainingConfig {
    double split_fraction = 0.9;  // train share of the dataset
    double lr_initial = 1e-3;
    double lr_factor = 0.5;
    std::size_t plateau_patience_epochs = 20;
    std::size_t epochs = 110;
    std::size_t batch_size = 8;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double input_norm_std_target = 0.25;
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = hardware concurrency

    void validate() const;
};

/// Moments of a = V_S² over every voxel of the training volumes. Never feed
/// validation data here: the no-leak property is part of the contract.
struct NormStats {
    double mean = 0.0;
    double stddev = 1.0;
};
NormStats compute_norm_stats(std::span<const Tensor> train_vs);

/// Mean |pred - target| per leading-axis channel, summed over channels.
/// Identical to the differentiable tape loss, evaluated without a tape.
double mae_loss(const Tensor& pred, const Tensor& target);

/// One seeded global shuffle, then an index prefix becomes the training set;
/// the held-out tail has exactly ceil((1 - split_fraction) * n) samples.
struct SplitIndices {
    std::vector<std::size_t> train, val;
};
SplitIndices split_dataset(std::size_t n, double split_fraction, std::uint64_t seed);

/// Flattened view of the model parameters in canonical order. Complex tensors
/// contribute interleaved (re, im) pairs, matching the tape's gradient
/// convention, so the optimizer treats everything as plain doubles.
struct ParamView {
    struct Slice {
        double* data;
        std::size_t size;
        std::string name;
    };
    std::vector<Slice> slices;
    std::size_t total = 0;
};
ParamView param_view(uno::UnoModel& model);

struct AdamState {
    std::vector<double> m, v;
    std::size_t step = 0;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Standard bias-corrected Adam update, in place. Throws on non-finite
/// gradient entries and names the offending parameter.
void adam_step(const ParamView& params, std::span<const double> grad, AdamState& state, double lr,
               const TrainingConfig& cfg);

/// Halves (by lr_factor) when the watched loss has not strictly improved its
/// best for `patience` consecutive epochs; the counter resets on reduction,
/// so the emitted lr sequence is non-increasing.
class PlateauScheduler {
public:
    PlateauScheduler(double lr_initial, double factor, std::size_t patience)
        : lr_(lr_initial), factor_(factor), patience_(patience) {}

    double observe(double loss) {
        if (loss < best_) {
            best_ = loss;
            bad_ = 0;
        } else if (++bad_ >= patience_) {
            lr_ *= factor_;
            bad_ = 0;
        }
        return lr_;
    }
    double lr() const { return lr_; }

private:
    double lr_;
    double factor_;
    std::size_t patience_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t bad_ = 0;
};

struct Sample {
    Tensor vs;      // (X, Y, Z)
    Tensor record;  // (3, X, Y, T)
};

struct EpochStats {
    std::size_t epoch;  // 1-based
    double train_mae;
    double val_mae;  // equals train_mae when no validation set was given
    double lr;       // rate used during this epoch
};

struct TrainResult {
    std::vector<EpochStats> curve;
    std::size_t best_epoch = 0;
    double best_val = std::numeric_limits<double>::infinity();
    bool diverged = false;  // non-finite loss; best checkpoint was restored
};

/// Mini-batch Adam training. Shuffling, batching and gradient accumulation
/// are fixed-order, so the result is a pure function of (data, config, seed).
/// Batch items run on worker threads with their own tapes. On return the
/// model holds the best-validation parameters.
TrainResult train(uno::UnoModel& model, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainingConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace seisuno::training
