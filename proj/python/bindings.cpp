#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "seisuno/container.hpp"
#include "seisuno/geology.hpp"
#include "seisuno/metrics.hpp"
#include "seisuno/training.hpp"
#include "seisuno/uno.hpp"
#include "seisuno/wavesim.hpp"

namespace py = pybind11;
using namespace seisuno;

namespace {

py::array_t<double> to_numpy(const Tensor& t) {
    const std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<double> arr(shape);
    std::copy(t.data(), t.data() + t.numel(), arr.mutable_data());
    return arr;
}

py::array_t<std::complex<double>> to_numpy(const CTensor& t) {
    const std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<std::complex<double>> arr(shape);
    std::copy(t.data(), t.data() + t.numel(), arr.mutable_data());
    return arr;
}

Tensor from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    std::vector<std::size_t> shape(static_cast<std::size_t>(arr.ndim()));
    for (py::ssize_t a = 0; a < arr.ndim(); ++a) shape[static_cast<std::size_t>(a)] = arr.shape(a);
    Tensor t(std::move(shape));
    std::copy(arr.data(), arr.data() + arr.size(), t.data());
    return t;
}

std::vector<training::Sample> to_samples(const std::vector<std::pair<py::array_t<double>, py::array_t<double>>>& pairs) {
    std::vector<training::Sample> out;
    out.reserve(pairs.size());
    for (const auto& [vs, rec] : pairs) out.push_back({from_numpy(vs), from_numpy(rec)});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Neural-operator pipeline: random geologies, elastic wave simulation, "
              "operator training, and ground-motion metrics";

    // ---- geology ----
    py::class_<geology::GeologyConfig>(m, "GeologyConfig")
        .def(py::init<>())
        .def_readwrite("grid", &geology::GeologyConfig::grid)
        .def_readwrite("domain_size_m", &geology::GeologyConfig::domain_size_m)
        .def_readwrite("n_layers_range", &geology::GeologyConfig::n_layers_range)
        .def_readwrite("mean_vs_low", &geology::GeologyConfig::mean_vs_low)
        .def_readwrite("mean_vs_high", &geology::GeologyConfig::mean_vs_high)
        .def_readwrite("corr_len_range_m", &geology::GeologyConfig::corr_len_range_m)
        .def_readwrite("cv_mean", &geology::GeologyConfig::cv_mean)
        .def_readwrite("cv_std", &geology::GeologyConfig::cv_std)
        .def_readwrite("clip_low", &geology::GeologyConfig::clip_low)
        .def_readwrite("clip_high", &geology::GeologyConfig::clip_high)
        .def_readwrite("bottom_vs", &geology::GeologyConfig::bottom_vs)
        .def_readwrite("hurst", &geology::GeologyConfig::hurst)
        .def_readwrite("bottom_fraction", &geology::GeologyConfig::bottom_fraction)
        .def_readwrite("seed", &geology::GeologyConfig::seed)
        .def("spacing_m", &geology::GeologyConfig::spacing_m);

    m.def(
        "generate_geology",
        [](const geology::GeologyConfig& cfg) {
            py::gil_scoped_release release;
            const geology::GeologyField field = geology::generate(cfg);
            py::gil_scoped_acquire acquire;
            return to_numpy(field.vs);
        },
        py::arg("config"), "Random layered shear-velocity volume, shape config.grid, m/s");

    // ---- wave simulation ----
    py::class_<wavesim::SourceSpec>(m, "SourceSpec")
        .def(py::init<>())
        .def_readwrite("position_m", &wavesim::SourceSpec::position_m)
        .def_readwrite("strike_deg", &wavesim::SourceSpec::strike_deg)
        .def_readwrite("dip_deg", &wavesim::SourceSpec::dip_deg)
        .def_readwrite("rake_deg", &wavesim::SourceSpec::rake_deg)
        .def_readwrite("tau_s", &wavesim::SourceSpec::tau_s)
        .def_readwrite("moment_scale", &wavesim::SourceSpec::moment_scale);

    py::class_<wavesim::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("h_m", &wavesim::SimConfig::h_m)
        .def_readwrite("dt_s", &wavesim::SimConfig::dt_s)
        .def_readwrite("duration_s", &wavesim::SimConfig::duration_s)
        .def_readwrite("vp_vs_ratio", &wavesim::SimConfig::vp_vs_ratio)
        .def_readwrite("density", &wavesim::SimConfig::density)
        .def_readwrite("sponge_width", &wavesim::SimConfig::sponge_width)
        .def_readwrite("sponge_strength", &wavesim::SimConfig::sponge_strength)
        .def_readwrite("sensor_grid", &wavesim::SimConfig::sensor_grid)
        .def_readwrite("sensor_spacing_m", &wavesim::SimConfig::sensor_spacing_m)
        .def_readwrite("record_rate_hz", &wavesim::SimConfig::record_rate_hz)
        .def_readwrite("record_window_s", &wavesim::SimConfig::record_window_s)
        .def("cfl_limit", &wavesim::SimConfig::cfl_limit, py::arg("max_vs"))
        .def("auto_dt", &wavesim::SimConfig::auto_dt, py::arg("max_vs"), py::arg("safety") = 1.0)
        .def("record_points", &wavesim::SimConfig::record_points);

    py::class_<wavesim::SurfaceRecord>(m, "SurfaceRecord")
        .def_property_readonly("data", [](const wavesim::SurfaceRecord& r) { return to_numpy(r.data); })
        .def_readonly("times_s", &wavesim::SurfaceRecord::times_s)
        .def_readonly("sensor_x_m", &wavesim::SurfaceRecord::sensor_x_m)
        .def_readonly("sensor_y_m", &wavesim::SurfaceRecord::sensor_y_m);

    m.def(
        "run_simulation",
        [](const py::array_t<double>& vs, const wavesim::SourceSpec& source, const wavesim::SimConfig& config) {
            geology::GeologyField field;
            field.vs = from_numpy(vs);
            py::gil_scoped_release release;
            return wavesim::run_simulation(field, source, config);
        },
        py::arg("vs"), py::arg("source"), py::arg("config"),
        "Elastic wavefield over the volume; 3-component surface velocities at the sensor grid");

    m.def(
        "interpolate_surface",
        [](const py::array_t<double>& record, std::size_t nx, std::size_t ny) {
            return to_numpy(wavesim::interpolate_surface(from_numpy(record), nx, ny));
        },
        py::arg("record"), py::arg("nx"), py::arg("ny"),
        "Catmull-Rom resampling of a (3, nx, ny, nt) record's sensor grid");

    m.def("source_time_function", &wavesim::source_time_function, py::arg("t"), py::arg("tau"));
    m.def("moment_tensor_from_angles", &wavesim::moment_tensor_from_angles, py::arg("strike_deg"),
          py::arg("dip_deg"), py::arg("rake_deg"), py::arg("scale"));

    // ---- neural operator ----
    py::class_<uno::UnoSchedule>(m, "UnoSchedule")
        .def_static("by_name", &uno::UnoSchedule::by_name, py::arg("name"), py::arg("with_activations") = true)
        .def_readonly("name", &uno::UnoSchedule::name)
        .def_readonly("entry_res", &uno::UnoSchedule::entry_res)
        .def("parameter_count", &uno::UnoSchedule::parameter_count)
        .def("output_res", &uno::UnoSchedule::output_res)
        .def("scaled_output_res", &uno::UnoSchedule::scaled_output_res, py::arg("in_res"));

    py::class_<uno::UnoModel>(m, "UnoModel")
        .def(py::init<const uno::UnoSchedule&, std::uint64_t>(), py::arg("schedule"), py::arg("seed"))
        .def("parameter_count", &uno::UnoModel::parameter_count)
        .def_property_readonly("schedule", &uno::UnoModel::schedule)
        .def("set_norm",
             [](uno::UnoModel& model, double mean, double stddev, double target) {
                 model.set_norm({mean, stddev, target});
             },
             py::arg("mean"), py::arg("stddev"), py::arg("target") = 0.25)
        .def("norm",
             [](const uno::UnoModel& model) {
                 return py::make_tuple(model.norm().mean, model.norm().stddev, model.norm().target);
             })
        .def(
            "predict",
            [](const uno::UnoModel& model, const py::array_t<double>& vs) {
                const Tensor input = from_numpy(vs);
                py::gil_scoped_release release;
                const Tensor out = model.predict(input);
                py::gil_scoped_acquire acquire;
                return to_numpy(out);
            },
            py::arg("vs"), "Surface record (3, x, y, 2 z) for a shear-velocity volume (x, y, z)")
        .def("save", &uno::UnoModel::save, py::arg("directory"))
        .def_static("load", &uno::UnoModel::load, py::arg("directory"));

    // ---- training ----
    py::class_<training::TrainingConfig>(m, "TrainingConfig")
        .def(py::init<>())
        .def_readwrite("split_fraction", &training::TrainingConfig::split_fraction)
        .def_readwrite("lr_initial", &training::TrainingConfig::lr_initial)
        .def_readwrite("lr_factor", &training::TrainingConfig::lr_factor)
        .def_readwrite("plateau_patience_epochs", &training::TrainingConfig::plateau_patience_epochs)
        .def_readwrite("epochs", &training::TrainingConfig::epochs)
        .def_readwrite("batch_size", &training::TrainingConfig::batch_size)
        .def_readwrite("adam_beta1", &training::TrainingConfig::adam_beta1)
        .def_readwrite("adam_beta2", &training::TrainingConfig::adam_beta2)
        .def_readwrite("adam_epsilon", &training::TrainingConfig::adam_epsilon)
        .def_readwrite("input_norm_std_target", &training::TrainingConfig::input_norm_std_target)
        .def_readwrite("seed", &training::TrainingConfig::seed)
        .def_readwrite("workers", &training::TrainingConfig::workers);

    py::class_<training::EpochStats>(m, "EpochStats")
        .def_readonly("epoch", &training::EpochStats::epoch)
        .def_readonly("train_mae", &training::EpochStats::train_mae)
        .def_readonly("val_mae", &training::EpochStats::val_mae)
        .def_readonly("lr", &training::EpochStats::lr);

    py::class_<training::TrainResult>(m, "TrainResult")
        .def_readonly("curve", &training::TrainResult::curve)
        .def_readonly("best_epoch", &training::TrainResult::best_epoch)
        .def_readonly("best_val", &training::TrainResult::best_val)
        .def_readonly("diverged", &training::TrainResult::diverged);

    m.def(
        "compute_norm_stats",
        [](const std::vector<py::array_t<double>>& volumes) {
            std::vector<Tensor> tensors;
            tensors.reserve(volumes.size());
            for (const auto& v : volumes) tensors.push_back(from_numpy(v));
            const training::NormStats s = training::compute_norm_stats(tensors);
            return py::make_tuple(s.mean, s.stddev);
        },
        py::arg("volumes"), "(mean, stddev) of squared shear velocity over the given volumes");

    m.def(
        "split_dataset",
        [](std::size_t n, double fraction, std::uint64_t seed) {
            const training::SplitIndices s = training::split_dataset(n, fraction, seed);
            return py::make_tuple(s.train, s.val);
        },
        py::arg("n"), py::arg("split_fraction") = 0.9, py::arg("seed") = 0);

    m.def(
        "mae_loss",
        [](const py::array_t<double>& pred, const py::array_t<double>& target) {
            return training::mae_loss(from_numpy(pred), from_numpy(target));
        },
        py::arg("pred"), py::arg("target"));

    m.def(
        "train",
        [](uno::UnoModel& model, const std::vector<std::pair<py::array_t<double>, py::array_t<double>>>& train_pairs,
           const std::vector<std::pair<py::array_t<double>, py::array_t<double>>>& val_pairs,
           const training::TrainingConfig& config) {
            const std::vector<training::Sample> train_set = to_samples(train_pairs);
            const std::vector<training::Sample> val_set = to_samples(val_pairs);
            py::gil_scoped_release release;
            return training::train(model, train_set, val_set, config);
        },
        py::arg("model"), py::arg("train_pairs"), py::arg("val_pairs"), py::arg("config"),
        "Adam + plateau schedule on (vs, record) pairs; the model keeps the best-validation weights");

    // ---- metrics ----
    m.def(
        "mae_per_component",
        [](const py::array_t<double>& pred, const py::array_t<double>& ref) {
            return metrics::mae_per_component(from_numpy(pred), from_numpy(ref));
        },
        py::arg("pred"), py::arg("ref"));

    m.def(
        "pgv_per_component",
        [](const py::array_t<double>& record) { return to_numpy(metrics::pgv_per_component(from_numpy(record))); },
        py::arg("record"));

    m.def(
        "pgv_euclidean",
        [](const py::array_t<double>& record) { return to_numpy(metrics::pgv_euclidean(from_numpy(record))); },
        py::arg("record"));

    m.def("log_spaced_freqs", &metrics::log_spaced_freqs, py::arg("f_lo_hz"), py::arg("f_hi_hz"), py::arg("count"));

    m.def(
        "cwt_morlet",
        [](const std::vector<double>& signal, double sample_rate_hz, const std::vector<double>& freqs_hz) {
            return to_numpy(metrics::cwt_morlet(signal, sample_rate_hz, freqs_hz));
        },
        py::arg("signal"), py::arg("sample_rate_hz"), py::arg("freqs_hz"),
        "Analytic Morlet transform, shape (len(freqs), len(signal))");

    py::class_<metrics::GofScores>(m, "GofScores")
        .def_readonly("envelope", &metrics::GofScores::envelope)
        .def_readonly("phase", &metrics::GofScores::phase)
        .def_readonly("defined", &metrics::GofScores::defined);

    m.def(
        "gof_envelope_phase",
        [](const std::vector<double>& pred, const std::vector<double>& ref, double sample_rate_hz, double band_lo_hz,
           double band_hi_hz, std::size_t n_freqs) {
            return metrics::gof_envelope_phase(pred, ref, sample_rate_hz, band_lo_hz, band_hi_hz, n_freqs);
        },
        py::arg("pred"), py::arg("ref"), py::arg("sample_rate_hz"), py::arg("band_lo_hz"), py::arg("band_hi_hz"),
        py::arg("n_freqs") = 24);

    py::class_<metrics::GofReport>(m, "GofReport")
        .def_property_readonly("envelope", [](const metrics::GofReport& r) { return to_numpy(r.envelope); })
        .def_property_readonly("phase", [](const metrics::GofReport& r) { return to_numpy(r.phase); })
        .def_readonly("undefined_traces", &metrics::GofReport::undefined_traces)
        .def_readonly("frac_envelope_good", &metrics::GofReport::frac_envelope_good)
        .def_readonly("frac_phase_very_good", &metrics::GofReport::frac_phase_very_good)
        .def_readonly("band_lo_hz", &metrics::GofReport::band_lo_hz)
        .def_readonly("band_hi_hz", &metrics::GofReport::band_hi_hz);

    m.def(
        "gof_report",
        [](const py::array_t<double>& pred, const py::array_t<double>& ref, double sample_rate_hz, double band_lo_hz,
           double band_hi_hz, std::size_t n_freqs, int workers) {
            const Tensor p = from_numpy(pred), r = from_numpy(ref);
            py::gil_scoped_release release;
            return metrics::gof_report(p, r, sample_rate_hz, band_lo_hz, band_hi_hz, n_freqs, workers);
        },
        py::arg("pred"), py::arg("ref"), py::arg("sample_rate_hz"), py::arg("band_lo_hz"), py::arg("band_hi_hz"),
        py::arg("n_freqs") = 24, py::arg("workers") = 0);

    m.def(
        "fourier_amplitude_spectrum",
        [](const std::vector<double>& trace, double sample_rate_hz, bool taper) {
            const metrics::Spectrum s = metrics::fourier_amplitude_spectrum(trace, sample_rate_hz, taper);
            return py::make_tuple(s.freq_hz, s.amplitude, s.tapered);
        },
        py::arg("trace"), py::arg("sample_rate_hz"), py::arg("taper") = false,
        "(freq_hz, one-sided raw |DFT| amplitudes, tapered flag)");

    // ---- containers ----
    m.def(
        "read_tensor",
        [](const std::filesystem::path& path) { return to_numpy(container::read_tensor(path)); },
        py::arg("path"));
    m.def(
        "write_tensor",
        [](const std::filesystem::path& path, const py::array_t<double>& t, bool as_f32) {
            container::write_tensor(path, from_numpy(t), as_f32);
        },
        py::arg("path"), py::arg("tensor"), py::arg("as_f32") = false);
}
