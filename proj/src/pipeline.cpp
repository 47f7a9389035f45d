#include "seisuno/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <vector>

#include "seisuno/metrics.hpp"
#include "seisuno/threads.hpp"
#include "seisuno/uno.hpp"

namespace seisuno::pipeline {

namespace fs = std::filesystem;
using container::json;

namespace {

// Shortest round-trip decimal form, used for every number we print to CSV.
std::string num(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void require_known_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    check(j.is_object(), "config: " + path + " must be an object");
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw std::invalid_argument("config: unknown key " + path + "." + item.key());
    }
}

template <typename T>
void field(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: bad value for " + path + "." + key + ": " + e.what());
    }
}

json section(const json& doc, const char* name) { return doc.contains(name) ? doc.at(name) : json::object(); }

json require_dataset_manifest(const fs::path& dir, const char* expected_kind) {
    const fs::path mpath = dir / "manifest.json";
    check(fs::exists(mpath), "missing manifest: " + mpath.string());
    const json m = container::read_manifest(mpath);
    const int version = m.value("format_version", 0);
    check(version == container::kFormatVersion,
          mpath.string() + ": unsupported format version " + std::to_string(version));
    const std::string kind = m.value("kind", "");
    check(kind == expected_kind,
          mpath.string() + ": expected kind \"" + expected_kind + "\", found \"" + kind + "\"");
    return m;
}

std::ofstream open_csv(const fs::path& path, const std::string& header) {
    std::ofstream out(path);
    check(out.good(), "cannot open " + path.string() + " for writing");
    out << header << "\n";
    return out;
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    require_known_keys(doc, "config",
                       {"geology", "simulation", "source", "model", "training", "evaluate"});

    const json g = section(doc, "geology");
    require_known_keys(g, "config.geology",
                       {"grid", "domain_size_m", "n_layers_range", "mean_vs_low", "mean_vs_high",
                        "corr_len_range_m", "cv_mean", "cv_std", "clip_low", "clip_high", "bottom_vs",
                        "hurst", "bottom_fraction"});
    field(g, "config.geology", "grid", cfg.geology.grid);
    field(g, "config.geology", "domain_size_m", cfg.geology.domain_size_m);
    field(g, "config.geology", "n_layers_range", cfg.geology.n_layers_range);
    field(g, "config.geology", "mean_vs_low", cfg.geology.mean_vs_low);
    field(g, "config.geology", "mean_vs_high", cfg.geology.mean_vs_high);
    field(g, "config.geology", "corr_len_range_m", cfg.geology.corr_len_range_m);
    field(g, "config.geology", "cv_mean", cfg.geology.cv_mean);
    field(g, "config.geology", "cv_std", cfg.geology.cv_std);
    field(g, "config.geology", "clip_low", cfg.geology.clip_low);
    field(g, "config.geology", "clip_high", cfg.geology.clip_high);
    field(g, "config.geology", "bottom_vs", cfg.geology.bottom_vs);
    field(g, "config.geology", "hurst", cfg.geology.hurst);
    field(g, "config.geology", "bottom_fraction", cfg.geology.bottom_fraction);

    const json s = section(doc, "simulation");
    require_known_keys(s, "config.simulation",
                       {"h_m", "dt_s", "dt_safety", "duration_s", "vp_vs_ratio", "density", "sponge_width",
                        "sponge_strength", "sensor_grid", "sensor_spacing_m", "record_rate_hz",
                        "record_window_s"});
    field(s, "config.simulation", "h_m", cfg.simulation.h_m);
    field(s, "config.simulation", "dt_s", cfg.simulation.dt_s);
    field(s, "config.simulation", "dt_safety", cfg.dt_safety);
    field(s, "config.simulation", "duration_s", cfg.simulation.duration_s);
    field(s, "config.simulation", "vp_vs_ratio", cfg.simulation.vp_vs_ratio);
    field(s, "config.simulation", "density", cfg.simulation.density);
    field(s, "config.simulation", "sponge_width", cfg.simulation.sponge_width);
    field(s, "config.simulation", "sponge_strength", cfg.simulation.sponge_strength);
    field(s, "config.simulation", "sensor_grid", cfg.simulation.sensor_grid);
    field(s, "config.simulation", "sensor_spacing_m", cfg.simulation.sensor_spacing_m);
    field(s, "config.simulation", "record_rate_hz", cfg.simulation.record_rate_hz);
    field(s, "config.simulation", "record_window_s", cfg.simulation.record_window_s);

    const json src = section(doc, "source");
    require_known_keys(src, "config.source",
                       {"position_m", "strike_deg", "dip_deg", "rake_deg", "tau_s", "moment_scale"});
    field(src, "config.source", "position_m", cfg.source.position_m);
    field(src, "config.source", "strike_deg", cfg.source.strike_deg);
    field(src, "config.source", "dip_deg", cfg.source.dip_deg);
    field(src, "config.source", "rake_deg", cfg.source.rake_deg);
    field(src, "config.source", "tau_s", cfg.source.tau_s);
    field(src, "config.source", "moment_scale", cfg.source.moment_scale);

    const json m = section(doc, "model");
    require_known_keys(m, "config.model", {"schedule"});
    field(m, "config.model", "schedule", cfg.schedule);

    const json t = section(doc, "training");
    require_known_keys(t, "config.training",
                       {"split_fraction", "lr_initial", "lr_factor", "plateau_patience_epochs", "epochs",
                        "batch_size", "adam_beta1", "adam_beta2", "adam_epsilon", "input_norm_std_target",
                        "seed"});
    field(t, "config.training", "split_fraction", cfg.training.split_fraction);
    field(t, "config.training", "lr_initial", cfg.training.lr_initial);
    field(t, "config.training", "lr_factor", cfg.training.lr_factor);
    field(t, "config.training", "plateau_patience_epochs", cfg.training.plateau_patience_epochs);
    field(t, "config.training", "epochs", cfg.training.epochs);
    field(t, "config.training", "batch_size", cfg.training.batch_size);
    field(t, "config.training", "adam_beta1", cfg.training.adam_beta1);
    field(t, "config.training", "adam_beta2", cfg.training.adam_beta2);
    field(t, "config.training", "adam_epsilon", cfg.training.adam_epsilon);
    field(t, "config.training", "input_norm_std_target", cfg.training.input_norm_std_target);
    field(t, "config.training", "seed", cfg.training.seed);

    const json e = section(doc, "evaluate");
    require_known_keys(e, "config.evaluate", {"band_hz", "n_freqs"});
    field(e, "config.evaluate", "band_hz", cfg.eval_band_hz);
    field(e, "config.evaluate", "n_freqs", cfg.eval_n_freqs);

    return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream in(path);
    check(in.good(), "config: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

json RunConfig::to_json() const {
    json doc;
    doc["geology"] = {{"grid", geology.grid},
                      {"domain_size_m", geology.domain_size_m},
                      {"n_layers_range", geology.n_layers_range},
                      {"mean_vs_low", geology.mean_vs_low},
                      {"mean_vs_high", geology.mean_vs_high},
                      {"corr_len_range_m", geology.corr_len_range_m},
                      {"cv_mean", geology.cv_mean},
                      {"cv_std", geology.cv_std},
                      {"clip_low", geology.clip_low},
                      {"clip_high", geology.clip_high},
                      {"bottom_vs", geology.bottom_vs},
                      {"hurst", geology.hurst},
                      {"bottom_fraction", geology.bottom_fraction}};
    doc["simulation"] = {{"h_m", simulation.h_m},
                         {"dt_s", simulation.dt_s},
                         {"dt_safety", dt_safety},
                         {"duration_s", simulation.duration_s},
                         {"vp_vs_ratio", simulation.vp_vs_ratio},
                         {"density", simulation.density},
                         {"sponge_width", simulation.sponge_width},
                         {"sponge_strength", simulation.sponge_strength},
                         {"sensor_grid", simulation.sensor_grid},
                         {"sensor_spacing_m", simulation.sensor_spacing_m},
                         {"record_rate_hz", simulation.record_rate_hz},
                         {"record_window_s", simulation.record_window_s}};
    doc["source"] = {{"position_m", source.position_m},  {"strike_deg", source.strike_deg},
                     {"dip_deg", source.dip_deg},        {"rake_deg", source.rake_deg},
                     {"tau_s", source.tau_s},            {"moment_scale", source.moment_scale}};
    doc["model"] = {{"schedule", schedule}};
    doc["training"] = {{"split_fraction", training.split_fraction},
                       {"lr_initial", training.lr_initial},
                       {"lr_factor", training.lr_factor},
                       {"plateau_patience_epochs", training.plateau_patience_epochs},
                       {"epochs", training.epochs},
                       {"batch_size", training.batch_size},
                       {"adam_beta1", training.adam_beta1},
                       {"adam_beta2", training.adam_beta2},
                       {"adam_epsilon", training.adam_epsilon},
                       {"input_norm_std_target", training.input_norm_std_target},
                       {"seed", training.seed}};
    doc["evaluate"] = {{"band_hz", eval_band_hz}, {"n_freqs", eval_n_freqs}};
    return doc;
}

int cmd_gen_geology(const fs::path& config_path, std::size_t count, std::uint64_t seed, const fs::path& out_dir,
                    std::ostream& log) {
    const RunConfig cfg = RunConfig::load(config_path);
    {
        geology::GeologyConfig probe = cfg.geology;
        probe.validate();
    }
    fs::create_directories(out_dir);

    json samples = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        geology::GeologyConfig gc = cfg.geology;
        gc.seed = rng::derive_seed(seed, "geology", i);
        const geology::GeologyField sample = geology::generate(gc);
        const std::string file = container::sample_file_name("geology", i);
        container::write_tensor(out_dir / file, sample.vs, true);
        samples.push_back({{"index", i}, {"file", file}, {"seed", gc.seed}});
    }

    json manifest;
    manifest["format_version"] = container::kFormatVersion;
    manifest["kind"] = "geology-dataset";
    manifest["seed"] = seed;
    manifest["count"] = count;
    manifest["units"] = {{"vs", "m/s"}, {"spacing", "m"}};
    manifest["config"] = cfg.to_json();
    manifest["samples"] = samples;
    container::write_manifest(out_dir / "manifest.json", manifest);

    log << "gen-geology: wrote " << count << " volumes to " << out_dir.string() << "\n";
    return kOk;
}

int cmd_simulate(const fs::path& geology_dir, const fs::path& config_path, const fs::path& out_dir, int workers,
                 std::ostream& log) {
    const RunConfig cfg = RunConfig::load(config_path);
    const json gman = require_dataset_manifest(geology_dir, "geology-dataset");
    const json& gsamples = gman.at("samples");
    const std::size_t n = gsamples.size();
    fs::create_directories(out_dir);

    struct SampleResult {
        bool ok = false;
        std::string error;
        std::vector<double> times, sx, sy;
    };
    std::vector<SampleResult> results(n);

    threads::parallel_for(
        n,
        [&](std::size_t i) {
            const threads::ScopedSerial serial;
            SampleResult& r = results[i];
            try {
                const std::string gfile = gsamples.at(i).at("file").get<std::string>();
                geology::GeologyField field;
                field.vs = container::read_tensor(geology_dir / gfile);
                field.seed = gsamples.at(i).value("seed", std::uint64_t{0});

                wavesim::SimConfig sim = cfg.simulation;
                const double vmax = *std::max_element(field.vs.data(), field.vs.data() + field.vs.numel());
                if (sim.dt_s <= 0.0) sim.auto_dt(vmax, cfg.dt_safety);
                const wavesim::SurfaceRecord rec = wavesim::run_simulation(field, cfg.source, sim);
                container::write_tensor(out_dir / container::sample_file_name("record", i), rec.data, true);
                r.times = rec.times_s;
                r.sx = rec.sensor_x_m;
                r.sy = rec.sensor_y_m;
                r.ok = true;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        },
        workers);

    json samples = json::array();
    json failed = json::array();
    std::size_t n_ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
        json entry = {{"index", i},
                      {"geology_file", gsamples.at(i).at("file")},
                      {"status", results[i].ok ? "ok" : "failed"}};
        if (results[i].ok) {
            entry["file"] = container::sample_file_name("record", i);
            ++n_ok;
        } else {
            entry["error"] = results[i].error;
            failed.push_back(i);
            log << "simulate: sample " << i << " failed: " << results[i].error << "\n";
        }
        samples.push_back(std::move(entry));
    }

    json manifest;
    manifest["format_version"] = container::kFormatVersion;
    manifest["kind"] = "record-dataset";
    manifest["geology_dataset"] = geology_dir.string();
    manifest["geology_seed"] = gman.value("seed", std::uint64_t{0});
    manifest["units"] = {{"velocity", "m/s"}, {"time", "s"}};
    manifest["config"] = cfg.to_json();
    manifest["sample_rate_hz"] = cfg.simulation.record_rate_hz;
    manifest["count"] = n;
    manifest["failed"] = failed;
    for (const SampleResult& r : results)
        if (r.ok) {
            manifest["times_s"] = r.times;
            manifest["sensor_x_m"] = r.sx;
            manifest["sensor_y_m"] = r.sy;
            break;
        }
    manifest["samples"] = samples;
    container::write_manifest(out_dir / "manifest.json", manifest);

    log << "simulate: " << n_ok << "/" << n << " records written to " << out_dir.string() << "\n";
    if (n_ok == n) return kOk;
    return n_ok == 0 ? kRuntimeError : kPartialFailure;
}

namespace {

struct PairedDataset {
    std::vector<training::Sample> samples;
    std::vector<std::size_t> dataset_indices;  // original sample indices, ascending
};

/// Loads successful geology/record pairs and interpolates each record to the
/// operator's output grid for the given schedule.
PairedDataset load_pairs(const fs::path& geology_dir, const json& gman, const fs::path& records_dir,
                         const json& rman, const uno::UnoSchedule& schedule) {
    const json& gsamples = gman.at("samples");
    PairedDataset out;
    for (const json& rs : rman.at("samples")) {
        if (rs.value("status", "") != "ok") continue;
        const std::size_t index = rs.at("index").get<std::size_t>();
        check(index < gsamples.size(), "record sample " + std::to_string(index) + " has no geology sample");

        training::Sample sample;
        sample.vs = container::read_tensor(geology_dir / gsamples.at(index).at("file").get<std::string>());
        check(sample.vs.rank() == 3, "geology sample " + std::to_string(index) + " is not a 3D volume");

        Tensor rec = container::read_tensor(records_dir / rs.at("file").get<std::string>());
        const std::array<std::size_t, 3> out_res = schedule.scaled_output_res(
            {sample.vs.extent(0), sample.vs.extent(1), sample.vs.extent(2)});
        check(rec.rank() == 4 && rec.extent(0) == 3, "record sample " + std::to_string(index) + " has a bad shape");
        check(rec.extent(3) == out_res[2],
              "record length " + std::to_string(rec.extent(3)) + " does not match the schedule output depth " +
                  std::to_string(out_res[2]));
        if (rec.extent(1) != out_res[0] || rec.extent(2) != out_res[1])
            rec = wavesim::interpolate_surface(rec, out_res[0], out_res[1]);
        sample.record = std::move(rec);

        out.samples.push_back(std::move(sample));
        out.dataset_indices.push_back(index);
    }
    return out;
}

}  // namespace

int cmd_train(const fs::path& geology_dir, const fs::path& records_dir, const fs::path& config_path,
              const fs::path& out_dir, int workers, std::optional<std::uint64_t> seed, std::ostream& log) {
    const RunConfig cfg = RunConfig::load(config_path);
    training::TrainingConfig tc = cfg.training;
    if (seed) tc.seed = *seed;
    tc.workers = workers;
    tc.validate();

    const json gman = require_dataset_manifest(geology_dir, "geology-dataset");
    const json rman = require_dataset_manifest(records_dir, "record-dataset");
    const uno::UnoSchedule schedule = uno::UnoSchedule::by_name(cfg.schedule);

    PairedDataset data = load_pairs(geology_dir, gman, records_dir, rman, schedule);
    const std::size_t n = data.samples.size();
    check(n >= 2, "training needs at least two successful geology/record pairs");
    log << "train: " << n << " pairs, schedule " << cfg.schedule << " ("
        << schedule.parameter_count() << " parameters)\n";

    const training::SplitIndices split = training::split_dataset(n, tc.split_fraction, tc.seed);
    std::vector<training::Sample> train_set, val_set;
    for (const std::size_t p : split.train) train_set.push_back(data.samples[p]);
    for (const std::size_t p : split.val) val_set.push_back(data.samples[p]);

    std::vector<Tensor> train_vs;
    for (const training::Sample& s : train_set) train_vs.push_back(s.vs);
    const training::NormStats stats = training::compute_norm_stats(train_vs);

    uno::UnoModel model(schedule, tc.seed);
    model.set_norm({stats.mean, stats.stddev, tc.input_norm_std_target});

    fs::create_directories(out_dir);
    std::ofstream curve = open_csv(out_dir / "curve.csv", "epoch,train_mae,val_mae,lr");
    const auto on_epoch = [&](const training::EpochStats& e) {
        curve << e.epoch << "," << num(e.train_mae) << "," << num(e.val_mae) << "," << num(e.lr) << "\n";
        curve.flush();
        log << "epoch " << e.epoch << ": train_mae " << num(e.train_mae) << ", val_mae " << num(e.val_mae)
            << ", lr " << num(e.lr) << "\n";
    };
    const training::TrainResult result = training::train(model, train_set, val_set, tc, on_epoch);

    model.save(out_dir / "model");

    json manifest;
    manifest["format_version"] = container::kFormatVersion;
    manifest["kind"] = "training-run";
    manifest["geology_dataset"] = geology_dir.string();
    manifest["record_dataset"] = records_dir.string();
    json config_snapshot = cfg.to_json();
    config_snapshot["training"]["seed"] = tc.seed;
    manifest["config"] = config_snapshot;
    json train_idx = json::array(), val_idx = json::array();
    for (const std::size_t p : split.train) train_idx.push_back(data.dataset_indices[p]);
    for (const std::size_t p : split.val) val_idx.push_back(data.dataset_indices[p]);
    manifest["split"] = {{"train", train_idx}, {"val", val_idx}};
    manifest["norm"] = {{"mean", stats.mean}, {"stddev", stats.stddev}, {"target", tc.input_norm_std_target}};
    manifest["best_epoch"] = result.best_epoch;
    manifest["best_val_mae"] = result.best_val;
    manifest["epochs_run"] = result.curve.size();
    manifest["diverged"] = result.diverged;
    container::write_manifest(out_dir / "manifest.json", manifest);

    if (result.diverged) {
        log << "train: diverged after " << result.curve.size() << " epochs; best checkpoint kept (epoch "
            << result.best_epoch << ")\n";
        return kPartialFailure;
    }
    log << "train: best val_mae " << num(result.best_val) << " at epoch " << result.best_epoch << "\n";
    return kOk;
}

int cmd_predict(const fs::path& model_dir, const fs::path& geology_dir, const fs::path& out_dir, int workers,
                std::ostream& log) {
    const uno::UnoModel model = uno::UnoModel::load(model_dir);
    const json gman = require_dataset_manifest(geology_dir, "geology-dataset");
    const json& gsamples = gman.at("samples");
    const std::size_t n = gsamples.size();
    fs::create_directories(out_dir);

    std::vector<std::string> errors(n);
    threads::parallel_for(
        n,
        [&](std::size_t i) {
            const threads::ScopedSerial serial;
            try {
                const Tensor vs = container::read_tensor(geology_dir / gsamples.at(i).at("file").get<std::string>());
                const Tensor pred = model.predict(vs);
                container::write_tensor(out_dir / container::sample_file_name("prediction", i), pred, true);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        },
        workers);
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) fail("predict: sample " + std::to_string(i) + ": " + errors[i]);

    json samples = json::array();
    for (std::size_t i = 0; i < n; ++i)
        samples.push_back({{"index", i},
                           {"file", container::sample_file_name("prediction", i)},
                           {"geology_file", gsamples.at(i).at("file")}});
    json manifest;
    manifest["format_version"] = container::kFormatVersion;
    manifest["kind"] = "prediction-dataset";
    manifest["model"] = model_dir.string();
    manifest["schedule"] = model.schedule().name;
    manifest["geology_dataset"] = geology_dir.string();
    manifest["count"] = n;
    manifest["samples"] = samples;
    container::write_manifest(out_dir / "manifest.json", manifest);

    log << "predict: wrote " << n << " records to " << out_dir.string() << "\n";
    return kOk;
}

int cmd_evaluate(const fs::path& pred_dir, const fs::path& records_dir, const fs::path& config_path,
                 const fs::path& out_dir, int workers, std::ostream& log) {
    const RunConfig cfg = RunConfig::load(config_path);
    const json pman = require_dataset_manifest(pred_dir, "prediction-dataset");
    const json rman = require_dataset_manifest(records_dir, "record-dataset");
    const double sample_rate = rman.at("sample_rate_hz").get<double>();
    const std::vector<double> times = rman.value("times_s", std::vector<double>{});
    const double band_lo = cfg.eval_band_hz[0], band_hi = cfg.eval_band_hz[1];

    std::map<std::size_t, std::string> record_files;
    for (const json& rs : rman.at("samples"))
        if (rs.value("status", "") == "ok") record_files[rs.at("index").get<std::size_t>()] = rs.at("file");

    fs::create_directories(out_dir);
    std::ofstream mae_csv = open_csv(out_dir / "mae.csv", "sample,mae_e,mae_n,mae_z,total");
    std::ofstream pgv_csv = open_csv(out_dir / "pgv.csv",
                                     "sample,ix,iy,pred_e,pred_n,pred_z,pred_euclid,ref_e,ref_n,ref_z,ref_euclid");
    std::ofstream gof_csv = open_csv(out_dir / "gof.csv", "sample,component,ix,iy,envelope,phase,defined");
    std::ofstream traces_csv = open_csv(out_dir / "traces.csv", "component,ix,iy,t,time_s,pred,ref");
    std::ofstream spectra_csv = open_csv(out_dir / "spectra.csv", "component,freq_hz,amp_pred_mean,amp_ref_mean");

    const char* comp_names[3] = {"E", "N", "Z"};
    std::array<double, 3> mae_sum{};
    double pgv_ratio_sum = 0.0, pgv_under = 0.0;
    std::size_t pgv_count = 0;
    std::size_t gof_defined = 0, gof_undefined = 0, env_good = 0, phase_very_good = 0;
    std::vector<std::vector<double>> spec_pred(3), spec_ref(3);
    std::size_t spec_count = 0;
    std::vector<double> spec_freqs;
    std::size_t n_pairs = 0;
    bool wrote_traces = false;

    for (const json& ps : pman.at("samples")) {
        const std::size_t index = ps.at("index").get<std::size_t>();
        const auto it = record_files.find(index);
        if (it == record_files.end()) {
            log << "evaluate: sample " << index << " has no successful reference record, skipped\n";
            continue;
        }
        const Tensor pred = container::read_tensor(pred_dir / ps.at("file").get<std::string>());
        Tensor ref = container::read_tensor(records_dir / it->second);
        check(pred.rank() == 4 && pred.extent(0) == 3, "prediction sample has a bad shape");
        check(ref.extent(3) == pred.extent(3), "record and prediction lengths differ");
        if (ref.extent(1) != pred.extent(1) || ref.extent(2) != pred.extent(2))
            ref = wavesim::interpolate_surface(ref, pred.extent(1), pred.extent(2));
        const std::size_t nx = pred.extent(1), ny = pred.extent(2), nt = pred.extent(3);
        ++n_pairs;

        const std::array<double, 3> mae = metrics::mae_per_component(pred, ref);
        for (std::size_t c = 0; c < 3; ++c) mae_sum[c] += mae[c];
        mae_csv << index << "," << num(mae[0]) << "," << num(mae[1]) << "," << num(mae[2]) << ","
                << num(mae[0] + mae[1] + mae[2]) << "\n";

        const Tensor pgv_p = metrics::pgv_per_component(pred);
        const Tensor pgv_r = metrics::pgv_per_component(ref);
        const Tensor pgv_pe = metrics::pgv_euclidean(pred);
        const Tensor pgv_re = metrics::pgv_euclidean(ref);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) {
                pgv_csv << index << "," << i << "," << j;
                for (std::size_t c = 0; c < 3; ++c) pgv_csv << "," << num(pgv_p.at({c, i, j}));
                pgv_csv << "," << num(pgv_pe.at({i, j}));
                for (std::size_t c = 0; c < 3; ++c) pgv_csv << "," << num(pgv_r.at({c, i, j}));
                pgv_csv << "," << num(pgv_re.at({i, j})) << "\n";
                if (pgv_re.at({i, j}) > 0.0) {
                    pgv_ratio_sum += pgv_pe.at({i, j}) / pgv_re.at({i, j});
                    pgv_under += pgv_pe.at({i, j}) < pgv_re.at({i, j}) ? 1.0 : 0.0;
                    ++pgv_count;
                }
            }

        const metrics::GofReport gof =
            metrics::gof_report(pred, ref, sample_rate, band_lo, band_hi, cfg.eval_n_freqs, workers);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < ny; ++j) {
                    const double env = gof.envelope.at({c, i, j});
                    const double ph = gof.phase.at({c, i, j});
                    // a defined phase score is at least 10/e, so (0, 0) only
                    // marks the zero-reference sentinel
                    const bool defined = !(env == 0.0 && ph == 0.0);
                    gof_csv << index << "," << comp_names[c] << "," << i << "," << j << "," << num(env) << ","
                            << num(ph) << "," << (defined ? 1 : 0) << "\n";
                    if (!defined) {
                        ++gof_undefined;
                        continue;
                    }
                    ++gof_defined;
                    if (env > 6.0) ++env_good;
                    if (ph > 8.0) ++phase_very_good;
                }

        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < ny; ++j) {
                    const double* tp = pred.data() + ((c * nx + i) * ny + j) * nt;
                    const double* tr = ref.data() + ((c * nx + i) * ny + j) * nt;
                    const metrics::Spectrum sp = metrics::fourier_amplitude_spectrum({tp, nt}, sample_rate);
                    const metrics::Spectrum sr = metrics::fourier_amplitude_spectrum({tr, nt}, sample_rate);
                    if (spec_pred[c].empty()) {
                        spec_pred[c].assign(sp.amplitude.size(), 0.0);
                        spec_ref[c].assign(sp.amplitude.size(), 0.0);
                        spec_freqs = sp.freq_hz;
                    }
                    for (std::size_t k = 0; k < sp.amplitude.size(); ++k) {
                        spec_pred[c][k] += sp.amplitude[k];
                        spec_ref[c][k] += sr.amplitude[k];
                    }
                }
        spec_count += nx * ny;

        if (!wrote_traces) {
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t i = 0; i < nx; ++i)
                    for (std::size_t j = 0; j < ny; ++j)
                        for (std::size_t t = 0; t < nt; ++t) {
                            const double time_s = t < times.size() ? times[t] : 0.0;
                            traces_csv << comp_names[c] << "," << i << "," << j << "," << t << "," << num(time_s)
                                       << "," << num(pred.at({c, i, j, t})) << "," << num(ref.at({c, i, j, t}))
                                       << "\n";
                        }
            wrote_traces = true;
        }
    }
    check(n_pairs > 0, "evaluate: no overlapping prediction/record samples");

    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < spec_freqs.size(); ++k)
            spectra_csv << comp_names[c] << "," << num(spec_freqs[k]) << ","
                        << num(spec_pred[c][k] / static_cast<double>(spec_count)) << ","
                        << num(spec_ref[c][k] / static_cast<double>(spec_count)) << "\n";

    json summary;
    summary["samples"] = n_pairs;
    summary["mae"] = {{"e", mae_sum[0] / n_pairs},
                      {"n", mae_sum[1] / n_pairs},
                      {"z", mae_sum[2] / n_pairs},
                      {"total", (mae_sum[0] + mae_sum[1] + mae_sum[2]) / n_pairs}};
    summary["pgv"] = {{"mean_ratio_euclid", pgv_count ? pgv_ratio_sum / pgv_count : 0.0},
                      {"underestimation_fraction", pgv_count ? pgv_under / pgv_count : 0.0}};
    summary["gof"] = {{"variant", "single-valued, reference-weighted Morlet time-frequency misfit"},
                      {"frac_envelope_good", gof_defined ? static_cast<double>(env_good) / gof_defined : 0.0},
                      {"frac_phase_very_good",
                       gof_defined ? static_cast<double>(phase_very_good) / gof_defined : 0.0},
                      {"undefined_traces", gof_undefined}};
    summary["band_hz"] = cfg.eval_band_hz;
    container::write_manifest(out_dir / "summary.json", summary);

    json manifest;
    manifest["format_version"] = container::kFormatVersion;
    manifest["kind"] = "evaluation-report";
    manifest["prediction_dataset"] = pred_dir.string();
    manifest["record_dataset"] = records_dir.string();
    manifest["config"] = cfg.to_json();
    manifest["outputs"] = {"summary.json", "mae.csv", "pgv.csv", "gof.csv", "traces.csv", "spectra.csv"};
    container::write_manifest(out_dir / "manifest.json", manifest);

    log << "evaluate: " << n_pairs << " samples, mean MAE "
        << num((mae_sum[0] + mae_sum[1] + mae_sum[2]) / n_pairs) << ", envelope>6 "
        << num(gof_defined ? static_cast<double>(env_good) / gof_defined : 0.0) << ", phase>8 "
        << num(gof_defined ? static_cast<double>(phase_very_good) / gof_defined : 0.0) << "\n";
    return kOk;
}

int cmd_info(const fs::path& path, std::ostream& log) {
    if (fs::is_directory(path)) {
        const json m = container::read_manifest(path / "manifest.json");
        log << "kind: " << m.value("kind", "unknown") << "\n";
        log << "format_version: " << m.value("format_version", 0) << "\n";
        if (m.contains("count")) log << "samples: " << m.at("count") << "\n";
        if (m.contains("failed") && !m.at("failed").empty()) log << "failed: " << m.at("failed").dump() << "\n";
        if (m.contains("seed")) log << "seed: " << m.at("seed") << "\n";
        if (m.contains("schedule")) {
            const json& s = m.at("schedule");
            if (s.is_object()) {
                log << "schedule: " << s.value("name", "?") << "\n";
                if (m.contains("params")) log << "parameter tensors: " << m.at("params").size() << "\n";
            } else {
                log << "schedule: " << s << "\n";
            }
        }
        if (m.contains("best_epoch"))
            log << "best epoch: " << m.at("best_epoch") << " (val_mae " << m.at("best_val_mae") << ")\n";
        if (m.contains("split"))
            log << "split: " << m.at("split").at("train").size() << " train / " << m.at("split").at("val").size()
                << " val\n";
        return kOk;
    }

    const Tensor t = container::read_tensor(path);
    log << "tensor rank " << t.rank() << ", shape (";
    for (std::size_t a = 0; a < t.rank(); ++a) log << (a ? ", " : "") << t.extent(a);
    log << "), " << t.numel() << " values\n";
    const auto [lo, hi] = std::minmax_element(t.data(), t.data() + t.numel());
    log << "min " << num(*lo) << ", max " << num(*hi) << ", mean " << num(mean(t)) << "\n";
    return kOk;
}

}  // namespace seisuno::pipeline
