#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "seisuno/container.hpp"
#include "seisuno/geology.hpp"
#include "seisuno/training.hpp"
#include "seisuno/wavesim.hpp"

namespace seisuno::pipeline {

inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kRuntimeError = 2;
inline constexpr int kPartialFailure = 3;

/// One JSON document with a section per pipeline stage. Every section and
/// every field is optional and defaults to the values below; unknown keys are
/// rejected with their full path. Parse errors carry the file position.
struct RunConfig {
    geology::GeologyConfig geology;
    wavesim::SimConfig simulation;
    wavesim::SourceSpec source;
    /// Fraction of the stability limit used when simulation.dt_s is left 0.
    double dt_safety = 0.9;
    std::string schedule = "desk16";
    training::TrainingConfig training;
    std::array<double, 2> eval_band_hz{0.2, 5.0};
    std::size_t eval_n_freqs = 24;

    static RunConfig from_json(const container::json& doc);
    static RunConfig load(const std::filesystem::path& path);
    /// Round-trips through from_json; embedded in output manifests.
    container::json to_json() const;
};

/// Writes `count` geology volumes (f32) plus a manifest. Sample seeds are
/// derived from `seed` and the sample index, so any subset regenerates
/// identically.
int cmd_gen_geology(const std::filesystem::path& config_path, std::size_t count, std::uint64_t seed,
                    const std::filesystem::path& out_dir, std::ostream& log);

/// Runs the wave solver over every geology in the dataset, in parallel across
/// samples. Failed samples (instability, invalid per-sample CFL) are recorded
/// in the manifest and skipped; returns kPartialFailure if any failed but
/// some succeeded, kRuntimeError if all failed.
int cmd_simulate(const std::filesystem::path& geology_dir, const std::filesystem::path& config_path,
                 const std::filesystem::path& out_dir, int workers, std::ostream& log);

/// Trains the configured operator on geology/record pairs. Writes
/// out/model (checkpoint of the best-validation epoch), out/curve.csv and
/// out/manifest.json (config snapshot, split indices, normalization stats).
/// `seed` overrides training.seed when given. Returns kPartialFailure when
/// training diverged (the best checkpoint is still written).
int cmd_train(const std::filesystem::path& geology_dir, const std::filesystem::path& records_dir,
              const std::filesystem::path& config_path, const std::filesystem::path& out_dir, int workers,
              std::optional<std::uint64_t> seed, std::ostream& log);

/// Predicts a surface record for every geology in the dataset.
int cmd_predict(const std::filesystem::path& model_dir, const std::filesystem::path& geology_dir,
                const std::filesystem::path& out_dir, int workers, std::ostream& log);

/// Compares predictions against reference records: MAE distribution, PGV,
/// envelope/phase goodness-of-fit, and Fourier spectra, written as CSV plus
/// summary.json. The reference is interpolated to the prediction grid when
/// the sensor grids differ.
int cmd_evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& records_dir,
                 const std::filesystem::path& config_path, const std::filesystem::path& out_dir, int workers,
                 std::ostream& log);

/// Prints a human-readable summary of a dataset directory, model directory,
/// or single tensor file.
int cmd_info(const std::filesystem::path& path, std::ostream& log);

}  // namespace seisuno::pipeline
