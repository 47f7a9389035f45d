#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seisuno/pipeline.hpp"
#include "seisuno/threads.hpp"

namespace pl = seisuno::pipeline;

int main(int argc, char** argv) {
    CLI::App app{"seisuno: shear-velocity volumes to surface ground motion, end to end"};
    app.require_subcommand(1);

    std::string config, out, geo_dir, rec_dir, model_dir, pred_dir, info_path;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    int workers = 0;

    CLI::App* gen = app.add_subcommand("gen-geology", "Generate random layered shear-velocity volumes");
    gen->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    gen->add_option("--count", count, "Number of samples")->required();
    gen->add_option("--seed", seed, "Root seed (default 0)");
    gen->add_option("--out", out, "Output dataset directory")->required();

    CLI::App* sim = app.add_subcommand("simulate", "Run the elastic wave solver over a geology dataset");
    sim->add_option("geology", geo_dir, "Geology dataset directory")->required();
    sim->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    sim->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
    sim->add_option("--out", out, "Output dataset directory")->required();

    CLI::App* train = app.add_subcommand("train", "Train the neural operator on geology/record pairs");
    train->add_option("geology", geo_dir, "Geology dataset directory")->required();
    train->add_option("records", rec_dir, "Record dataset directory")->required();
    train->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    train->add_option("--seed", seed, "Overrides training.seed from the config");
    train->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
    train->add_option("--out", out, "Output run directory")->required();

    CLI::App* predict = app.add_subcommand("predict", "Predict surface records for a geology dataset");
    predict->add_option("model", model_dir, "Model checkpoint directory")->required();
    predict->add_option("geology", geo_dir, "Geology dataset directory")->required();
    predict->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
    predict->add_option("--out", out, "Output dataset directory")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "Compare predictions against reference records");
    evaluate->add_option("predictions", pred_dir, "Prediction dataset directory")->required();
    evaluate->add_option("records", rec_dir, "Record dataset directory")->required();
    evaluate->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
    evaluate->add_option("--out", out, "Output report directory")->required();

    CLI::App* info = app.add_subcommand("info", "Describe a dataset, model directory, or tensor file");
    info->add_option("path", info_path, "Dataset/model directory or .nopd file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? pl::kOk : pl::kUsageError;
    }

    try {
        if (gen->parsed()) return pl::cmd_gen_geology(config, count, seed, out, std::cout);
        if (sim->parsed()) return pl::cmd_simulate(geo_dir, config, out, workers, std::cout);
        if (train->parsed()) {
            const std::optional<std::uint64_t> seed_override =
                train->count("--seed") ? std::optional<std::uint64_t>(seed) : std::nullopt;
            return pl::cmd_train(geo_dir, rec_dir, config, out, workers, seed_override, std::cout);
        }
        if (predict->parsed()) return pl::cmd_predict(model_dir, geo_dir, out, workers, std::cout);
        if (evaluate->parsed()) return pl::cmd_evaluate(pred_dir, rec_dir, config, out, workers, std::cout);
        if (info->parsed()) return pl::cmd_info(info_path, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pl::kRuntimeError;
    }
    return pl::kUsageError;
}
