#include "seisuno/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seisuno/autodiff.hpp"
#include "seisuno/random.hpp"
#include "seisuno/threads.hpp"

namespace seisuno::training {

void TrainingConfig::validate() const {
    check(split_fraction > 0.0 && split_fraction < 1.0, "training config: split_fraction must be in (0, 1)");
    check(lr_initial > 0.0, "training config: lr_initial must be positive");
    check(lr_factor > 0.0 && lr_factor < 1.0, "training config: lr_factor must be in (0, 1)");
    check(plateau_patience_epochs >= 1, "training config: patience must be at least 1");
    check(epochs >= 1, "training config: epochs must be at least 1");
    check(batch_size >= 1, "training config: batch_size must be at least 1");
    check(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "training config: beta1 must be in [0, 1)");
    check(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "training config: beta2 must be in [0, 1)");
    check(adam_epsilon > 0.0, "training config: adam epsilon must be positive");
    check(input_norm_std_target > 0.0, "training config: normalization std target must be positive");
}

NormStats compute_norm_stats(std::span<const Tensor> train_vs) {
    check(!train_vs.empty(), "norm stats: empty training set");
    long double sum = 0.0L, sum_sq = 0.0L;
    std::size_t count = 0;
    for (const Tensor& vs : train_vs) {
        for (std::size_t i = 0; i < vs.numel(); ++i) {
            const long double a = static_cast<long double>(vs[i]) * static_cast<long double>(vs[i]);
            sum += a;
            sum_sq += a * a;
        }
        count += vs.numel();
    }
    const long double mean = sum / static_cast<long double>(count);
    const long double var = sum_sq / static_cast<long double>(count) - mean * mean;
    NormStats stats;
    stats.mean = static_cast<double>(mean);
    stats.stddev = var > 0.0L ? static_cast<double>(std::sqrt(static_cast<double>(var))) : 0.0;
    check(stats.stddev > 0.0, "norm stats: inputs are constant, standard deviation is zero");
    return stats;
}

double mae_loss(const Tensor& pred, const Tensor& target) {
    check(pred.same_shape(target), "mae_loss: shape mismatch");
    check(pred.rank() >= 2, "mae_loss: need a leading channel axis");
    const std::size_t channels = pred.extent(0);
    const std::size_t per_channel = pred.numel() / channels;
    double total = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (std::size_t s = 0; s < per_channel; ++s)
            acc += std::abs(pred[c * per_channel + s] - target[c * per_channel + s]);
        total += acc / static_cast<double>(per_channel);
    }
    return total;
}

SplitIndices split_dataset(std::size_t n, double split_fraction, std::uint64_t seed) {
    check(n >= 2, "split: need at least two samples to hold out validation data");
    check(split_fraction > 0.0 && split_fraction < 1.0, "split: fraction must be in (0, 1)");
    const auto n_val = static_cast<std::size_t>(
        std::ceil((1.0 - split_fraction) * static_cast<double>(n) - 1e-12));
    check(n_val >= 1 && n_val < n, "split: fraction leaves an empty train or validation set");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng::RandomStream rs(rng::derive_seed(seed, "dataset-split"));
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rs.uniform_below(i + 1)]);

    SplitIndices split;
    split.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    split.val.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    return split;
}

ParamView param_view(uno::UnoModel& model) {
    ParamView view;
    const auto refs = model.params();
    for (std::size_t i = 0; i < refs.real.size(); ++i) {
        view.slices.push_back({refs.real[i]->data(), refs.real[i]->numel(), refs.real_names[i]});
        view.total += refs.real[i]->numel();
    }
    for (std::size_t i = 0; i < refs.complex.size(); ++i) {
        // complex<double> is layout-compatible with double[2]: (re, im) pairs
        view.slices.push_back({reinterpret_cast<double*>(refs.complex[i]->data()), 2 * refs.complex[i]->numel(),
                               refs.complex_names[i]});
        view.total += 2 * refs.complex[i]->numel();
    }
    return view;
}

void adam_step(const ParamView& params, std::span<const double> grad, AdamState& state, double lr,
               const TrainingConfig& cfg) {
    check(grad.size() == params.total, "adam: gradient size does not match the parameter view");
    check(state.m.size() == params.total && state.v.size() == params.total,
          "adam: state size does not match the parameter view");
    std::size_t flat = 0;
    for (const ParamView::Slice& s : params.slices)
        for (std::size_t i = 0; i < s.size; ++i, ++flat)
            if (!std::isfinite(grad[flat]))
                fail("adam: non-finite gradient in " + s.name + "[" + std::to_string(i) + "]");

    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
    flat = 0;
    for (const ParamView::Slice& s : params.slices)
        for (std::size_t i = 0; i < s.size; ++i, ++flat) {
            state.m[flat] = cfg.adam_beta1 * state.m[flat] + (1.0 - cfg.adam_beta1) * grad[flat];
            state.v[flat] = cfg.adam_beta2 * state.v[flat] + (1.0 - cfg.adam_beta2) * grad[flat] * grad[flat];
            const double m_hat = state.m[flat] / bc1;
            const double v_hat = state.v[flat] / bc2;
            s.data[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
        }
}

namespace {

std::vector<double> snapshot_params(const ParamView& view) {
    std::vector<double> out;
    out.reserve(view.total);
    for (const auto& s : view.slices) out.insert(out.end(), s.data, s.data + s.size);
    return out;
}

void restore_params(const ParamView& view, const std::vector<double>& saved) {
    std::size_t flat = 0;
    for (const auto& s : view.slices)
        for (std::size_t i = 0; i < s.size; ++i, ++flat) s.data[i] = saved[flat];
}

// Gradients of one sample's loss, flattened in the canonical order.
std::vector<double> flatten_grads(ad::Tape& tape, const uno::UnoModel::Graph& g, std::size_t total) {
    std::vector<double> out;
    out.reserve(total);
    for (const ad::Var& v : g.real_params) {
        const Tensor& gr = tape.grad(v);
        out.insert(out.end(), gr.data(), gr.data() + gr.numel());
    }
    for (const ad::CVar& v : g.complex_params) {
        const CTensor& gc = tape.grad(v);
        const double* d = reinterpret_cast<const double*>(gc.data());
        out.insert(out.end(), d, d + 2 * gc.numel());
    }
    return out;
}

}  // namespace

TrainResult train(uno::UnoModel& model, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainingConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch) {
    cfg.validate();
    check(!train_set.empty(), "train: empty training set");

    const ParamView view = param_view(model);
    AdamState state(view.total);
    PlateauScheduler sched(cfg.lr_initial, cfg.lr_factor, cfg.plateau_patience_epochs);
    rng::RandomStream shuffle(rng::derive_seed(cfg.seed, "train-shuffle"));

    TrainResult result;
    std::vector<double> best_params = snapshot_params(view);

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= cfg.epochs && !result.diverged; ++epoch) {
        const double lr = sched.lr();
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[shuffle.uniform_below(i + 1)]);

        double train_sum = 0.0;
        for (std::size_t start = 0; start < order.size() && !result.diverged; start += cfg.batch_size) {
            const std::size_t bn = std::min(cfg.batch_size, order.size() - start);
            std::vector<std::vector<double>> grads(bn);
            std::vector<double> losses(bn);
            threads::parallel_for(
                bn,
                [&](std::size_t bi) {
                    threads::ScopedSerial serial;
                    const Sample& sample = train_set[order[start + bi]];
                    ad::Tape tape;
                    const auto graph = model.forward(tape, sample.vs, true);
                    const ad::Var loss = tape.mae_channel_sum(graph.output, sample.record);
                    losses[bi] = tape.value(loss)[0];
                    if (!std::isfinite(losses[bi])) return;
                    tape.backward(loss);
                    grads[bi] = flatten_grads(tape, graph, view.total);
                },
                cfg.workers);

            std::vector<double> batch_grad(view.total, 0.0);
            for (std::size_t bi = 0; bi < bn; ++bi) {  // fixed accumulation order
                if (!std::isfinite(losses[bi])) {
                    result.diverged = true;
                    break;
                }
                train_sum += losses[bi];
                for (std::size_t j = 0; j < view.total; ++j) batch_grad[j] += grads[bi][j];
            }
            if (result.diverged) break;
            for (double& g : batch_grad) g /= static_cast<double>(bn);
            adam_step(view, batch_grad, state, lr, cfg);
        }
        if (result.diverged) break;
        const double train_mae = train_sum / static_cast<double>(order.size());

        double val_mae = train_mae;
        if (!val_set.empty()) {
            std::vector<double> vloss(val_set.size());
            threads::parallel_for(
                val_set.size(),
                [&](std::size_t i) {
                    threads::ScopedSerial serial;
                    ad::Tape tape;
                    const auto graph = model.forward(tape, val_set[i].vs, false);
                    vloss[i] = tape.value(tape.mae_channel_sum(graph.output, val_set[i].record))[0];
                },
                cfg.workers);
            val_mae = std::accumulate(vloss.begin(), vloss.end(), 0.0) / static_cast<double>(vloss.size());
        }

        if (!std::isfinite(train_mae) || !std::isfinite(val_mae)) {
            result.diverged = true;
            break;
        }

        const EpochStats stats{epoch, train_mae, val_mae, lr};
        result.curve.push_back(stats);
        if (on_epoch) on_epoch(stats);

        if (val_mae < result.best_val) {
            result.best_val = val_mae;
            result.best_epoch = epoch;
            best_params = snapshot_params(view);
        }
        sched.observe(val_mae);
    }

    restore_params(view, best_params);
    return result;
}

}  // namespace seisuno::training
