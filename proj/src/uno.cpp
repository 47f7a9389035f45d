#include "seisuno/uno.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <utility>

#include "seisuno/container.hpp"
#include "seisuno/fft.hpp"
#include "seisuno/random.hpp"

namespace seisuno::uno {

namespace {

constexpr std::size_t kLayers = 8;

std::vector<std::size_t> box_shape(std::size_t ci, std::size_t co, const std::array<std::size_t, 3>& m) {
    return {ci, co, 2 * m[0] - 1, 2 * m[1] - 1, 2 * m[2] - 1};
}

void check_modes_fit(const std::array<std::size_t, 3>& m, const std::array<std::size_t, 3>& res,
                     const std::string& what) {
    for (int a = 0; a < 3; ++a) {
        check(m[static_cast<std::size_t>(a)] >= 1, what + ": modes must be at least 1");
        check(m[static_cast<std::size_t>(a)] - 1 <= (res[static_cast<std::size_t>(a)] - 1) / 2,
              what + ": retained modes exceed the alias-free band of the grid");
    }
}

}  // namespace

void UnoSchedule::validate() const {
    check(!name.empty(), "schedule: name must not be empty");
    check(layers.size() == kLayers, "schedule: expected 8 Fourier layers");
    check(v0_channels > 0 && lift_hidden > 0 && q_hidden > 0, "schedule: channel widths must be positive");
    for (int a = 0; a < 3; ++a) check(entry_res[static_cast<std::size_t>(a)] > 0, "schedule: entry resolution must be positive");
    for (std::size_t l = 0; l < kLayers; ++l) {
        const LayerPlan& p = layers[l];
        check(p.channels > 0, "schedule: layer channels must be positive");
        const auto in_res = layer_in_res(l);
        check_modes_fit(p.modes, in_res, "schedule layer " + std::to_string(l + 1));
        check_modes_fit(p.modes, p.out_res, "schedule layer " + std::to_string(l + 1));
        for (int a = 0; a < 3; ++a) {
            const auto ax = static_cast<std::size_t>(a);
            if (l < 4) check(p.out_res[ax] <= in_res[ax], "schedule: encoder resolution must not grow");
            else check(p.out_res[ax] >= in_res[ax], "schedule: decoder resolution must not shrink");
        }
    }
}

std::size_t UnoSchedule::layer_in_channels(std::size_t l) const {
    check(l < layers.size(), "schedule: layer index out of range");
    if (l == 0) return v0_channels;
    std::size_t c = layers[l - 1].channels;
    if (l >= 4) c += layers[7 - l].channels;  // concatenated encoder skip
    return c;
}

std::array<std::size_t, 3> UnoSchedule::layer_in_res(std::size_t l) const {
    check(l < layers.size(), "schedule: layer index out of range");
    return l == 0 ? entry_res : layers[l - 1].out_res;
}

std::array<std::size_t, 3> UnoSchedule::scaled_output_res(const std::array<std::size_t, 3>& in_res) const {
    std::array<std::size_t, 3> out{};
    for (std::size_t a = 0; a < 3; ++a) {
        const std::size_t scaled = layers.back().out_res[a] * in_res[a];
        check(scaled % entry_res[a] == 0, "schedule: input resolution must scale the output grid to whole extents");
        out[a] = scaled / entry_res[a];
    }
    return out;
}

std::size_t UnoSchedule::parameter_count() const {
    std::size_t n = 0;
    // lift: 4 input features -> hidden -> v0
    n += 4 * lift_hidden + lift_hidden;
    n += lift_hidden * v0_channels + v0_channels;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::size_t ci = layer_in_channels(l);
        const std::size_t co = layers[l].channels;
        n += ci * co;  // pointwise path
        std::size_t box = 1;
        for (int a = 0; a < 3; ++a) box *= 2 * layers[l].modes[static_cast<std::size_t>(a)] - 1;
        n += 2 * ci * co * box;  // complex spectral weights, two reals each
    }
    const std::size_t cl = layers.back().channels;
    n += 3 * (cl * q_hidden + q_hidden + q_hidden * 1 + 1);  // one head per component
    return n;
}

UnoSchedule UnoSchedule::full64(bool with_activations) {
    UnoSchedule s;
    s.name = "full64";
    s.entry_res = {64, 64, 64};
    s.v0_channels = 16;
    s.lift_hidden = 64;
    s.q_hidden = 64;
    s.pointwise_relu = with_activations;
    s.layers = {
        {32, {8, 8, 8}, {32, 32, 32}, with_activations},
        {64, {8, 8, 8}, {16, 16, 16}, with_activations},
        {64, {4, 4, 4}, {8, 8, 8}, with_activations},
        {64, {4, 4, 4}, {8, 8, 8}, with_activations},
        {64, {4, 4, 4}, {16, 16, 16}, with_activations},
        {64, {6, 6, 6}, {32, 32, 32}, with_activations},
        {32, {8, 8, 8}, {64, 64, 64}, with_activations},
        {16, {8, 8, 8}, {64, 64, 128}, false},
    };
    return s;
}

UnoSchedule UnoSchedule::desk32(bool with_activations) {
    UnoSchedule s;
    s.name = "desk32";
    s.entry_res = {32, 32, 32};
    s.v0_channels = 8;
    s.lift_hidden = 16;
    s.q_hidden = 16;
    s.pointwise_relu = with_activations;
    s.layers = {
        {12, {2, 2, 2}, {16, 16, 16}, with_activations},
        {16, {2, 2, 2}, {8, 8, 8}, with_activations},
        {16, {2, 2, 2}, {4, 4, 4}, with_activations},
        {16, {2, 2, 2}, {4, 4, 4}, with_activations},
        {16, {2, 2, 2}, {8, 8, 8}, with_activations},
        {12, {2, 2, 2}, {16, 16, 16}, with_activations},
        {12, {2, 2, 2}, {32, 32, 32}, with_activations},
        {8, {2, 2, 2}, {32, 32, 64}, false},
    };
    return s;
}

UnoSchedule UnoSchedule::desk16(bool with_activations) {
    UnoSchedule s;
    s.name = "desk16";
    s.entry_res = {16, 16, 16};
    s.v0_channels = 8;
    s.lift_hidden = 16;
    s.q_hidden = 16;
    s.pointwise_relu = with_activations;
    s.layers = {
        {12, {2, 2, 2}, {8, 8, 8}, with_activations},
        {16, {2, 2, 2}, {4, 4, 4}, with_activations},
        {16, {2, 2, 2}, {4, 4, 4}, with_activations},
        {16, {2, 2, 2}, {4, 4, 4}, with_activations},
        {16, {2, 2, 2}, {8, 8, 8}, with_activations},
        {12, {2, 2, 2}, {16, 16, 16}, with_activations},
        {12, {2, 2, 2}, {16, 16, 16}, with_activations},
        {8, {2, 2, 2}, {16, 16, 32}, false},
    };
    return s;
}

UnoSchedule UnoSchedule::tiny4(bool with_activations) {
    UnoSchedule s;
    s.name = "tiny4";
    s.entry_res = {4, 4, 4};
    s.v0_channels = 4;
    s.lift_hidden = 8;
    s.q_hidden = 8;
    s.pointwise_relu = with_activations;
    s.layers = {
        {6, {2, 2, 2}, {4, 4, 4}, with_activations},
        {6, {2, 2, 2}, {4, 4, 4}, with_activations},
        {6, {2, 2, 2}, {4, 4, 4}, with_activations},
        {6, {2, 2, 2}, {4, 4, 4}, with_activations},
        {6, {2, 2, 2}, {4, 4, 4}, with_activations},
        {6, {2, 2, 2}, {4, 4, 4}, with_activations},
        {6, {2, 2, 2}, {4, 4, 4}, with_activations},
        {4, {2, 2, 2}, {4, 4, 8}, false},
    };
    return s;
}

UnoSchedule UnoSchedule::by_name(const std::string& name, bool with_activations) {
    if (name == "full64") return full64(with_activations);
    if (name == "desk32") return desk32(with_activations);
    if (name == "desk16") return desk16(with_activations);
    if (name == "tiny4") return tiny4(with_activations);
    fail("unknown schedule name: " + name);
}

Tensor InputNorm::apply(const Tensor& vs) const {
    check(stddev > 0.0 && std::isfinite(stddev), "input norm: stddev must be positive and finite");
    check(std::isfinite(mean) && std::isfinite(target), "input norm: parameters must be finite");
    Tensor out(vs.shape());
    const double inv = target / stddev;
    for (std::size_t i = 0; i < vs.numel(); ++i) out[i] = (vs[i] * vs[i] - mean) * inv;
    return out;
}

Tensor positional_encoding(const std::array<std::size_t, 3>& extents) {
    const std::size_t nx = extents[0], ny = extents[1], nz = extents[2];
    Tensor out({3, nx, ny, nz});
    const std::size_t vol = nx * ny * nz;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t k = 0; k < nz; ++k, ++flat) {
                out[flat] = (static_cast<double>(i) + 0.5) / static_cast<double>(nx);
                out[vol + flat] = (static_cast<double>(j) + 0.5) / static_cast<double>(ny);
                out[2 * vol + flat] = (static_cast<double>(k) + 0.5) / static_cast<double>(nz);
            }
    return out;
}

UnoModel::UnoModel(UnoSchedule schedule, std::uint64_t seed)
    : schedule_(std::move(schedule)), seed_(seed) {
    schedule_.validate();
    init_weights();
}

void UnoModel::set_norm(const InputNorm& n) {
    check(n.stddev > 0.0 && std::isfinite(n.stddev), "input norm: stddev must be positive and finite");
    norm_ = n;
}

void UnoModel::init_weights() {
    rng::RandomStream stream(rng::derive_seed(seed_, "uno-init"));
    auto fill_uniform = [&stream](Tensor& t, double bound) {
        for (std::size_t i = 0; i < t.numel(); ++i) t[i] = stream.uniform(-bound, bound);
    };
    auto fan_in_bound = [](std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };

    p_w1_ = Tensor({4, schedule_.lift_hidden});
    p_b1_ = Tensor({schedule_.lift_hidden});
    p_w2_ = Tensor({schedule_.lift_hidden, schedule_.v0_channels});
    p_b2_ = Tensor({schedule_.v0_channels});
    fill_uniform(p_w1_, fan_in_bound(4));
    fill_uniform(p_w2_, fan_in_bound(schedule_.lift_hidden));

    w_.clear();
    r_.clear();
    for (std::size_t l = 0; l < kLayers; ++l) {
        const std::size_t ci = schedule_.layer_in_channels(l);
        const std::size_t co = schedule_.layers[l].channels;
        Tensor w({ci, co});
        fill_uniform(w, fan_in_bound(ci));
        w_.push_back(std::move(w));
        CTensor r(box_shape(ci, co, schedule_.layers[l].modes));
        const double s = 1.0 / static_cast<double>(ci * co);
        for (std::size_t i = 0; i < r.numel(); ++i) {
            const double re = stream.uniform(-s, s);
            const double im = stream.uniform(-s, s);
            r[i] = cdouble(re, im);
        }
        r_.push_back(std::move(r));
    }

    const std::size_t cl = schedule_.layers.back().channels;
    for (std::size_t h = 0; h < 3; ++h) {
        q_w1_[h] = Tensor({cl, schedule_.q_hidden});
        q_b1_[h] = Tensor({schedule_.q_hidden});
        q_w2_[h] = Tensor({schedule_.q_hidden, 1});
        q_b2_[h] = Tensor({1});
        fill_uniform(q_w1_[h], fan_in_bound(cl));
        fill_uniform(q_w2_[h], fan_in_bound(schedule_.q_hidden));
    }
}

UnoModel::ParamRefs UnoModel::params() {
    ParamRefs refs;
    auto real = [&refs](Tensor& t, const std::string& name) {
        refs.real.push_back(&t);
        refs.real_names.push_back(name);
    };
    real(p_w1_, "lift.w1");
    real(p_b1_, "lift.b1");
    real(p_w2_, "lift.w2");
    real(p_b2_, "lift.b2");
    static const char* kHead[3] = {"e", "n", "z"};
    for (std::size_t l = 0; l < kLayers; ++l) {
        real(w_[l], "layer" + std::to_string(l + 1) + ".w");
        refs.complex.push_back(&r_[l]);
        refs.complex_names.push_back("layer" + std::to_string(l + 1) + ".r");
    }
    for (std::size_t h = 0; h < 3; ++h) {
        const std::string base = std::string("head_") + kHead[h];
        real(q_w1_[h], base + ".w1");
        real(q_b1_[h], base + ".b1");
        real(q_w2_[h], base + ".w2");
        real(q_b2_[h], base + ".b2");
    }
    return refs;
}

std::size_t UnoModel::parameter_count() const {
    auto& self = const_cast<UnoModel&>(*this);
    const ParamRefs refs = self.params();
    std::size_t n = 0;
    for (const Tensor* t : refs.real) n += t->numel();
    for (const CTensor* t : refs.complex) n += 2 * t->numel();
    return n;
}

Tensor UnoModel::input_features(const Tensor& vs) const {
    check(vs.rank() == 3, "input features: expected a rank-3 velocity volume");
    const std::array<std::size_t, 3> res{vs.extent(0), vs.extent(1), vs.extent(2)};
    Tensor coords = positional_encoding(schedule_.entry_res);
    if (res != schedule_.entry_res)
        coords = fft::spectral_resample(coords, {1, 2, 3}, res);
    const Tensor a = norm_.apply(vs);
    Tensor out({4, res[0], res[1], res[2]});
    const std::size_t vol = vs.numel();
    std::copy(a.data(), a.data() + vol, out.data());
    std::copy(coords.data(), coords.data() + 3 * vol, out.data() + vol);
    return out;
}

UnoModel::Graph UnoModel::forward(ad::Tape& tape, const Tensor& vs, bool needs_grad) const {
    const Tensor features = input_features(vs);
    const std::array<std::size_t, 3> in_res{vs.extent(0), vs.extent(1), vs.extent(2)};

    // The interior grids are fixed by the schedule, so the spectral
    // truncations are the same operator whatever the input sampling; only the
    // first layer consumes the input grid and only the last layer's output
    // grid scales with it (T stays twice the input depth). Off-entry inputs
    // therefore produce finer or coarser samplings of the same output field.
    std::array<std::array<std::size_t, 3>, kLayers> out_res;
    for (std::size_t l = 0; l < kLayers; ++l) out_res[l] = schedule_.layers[l].out_res;
    out_res[kLayers - 1] = schedule_.scaled_output_res(in_res);
    check_modes_fit(schedule_.layers[0].modes, in_res, "forward layer 1");
    check_modes_fit(schedule_.layers[kLayers - 1].modes, out_res[kLayers - 1],
                    "forward layer " + std::to_string(kLayers));

    Graph g;
    const ad::Var feat = tape.leaf(features, false);
    const ad::Var pw1 = tape.leaf(p_w1_, needs_grad);
    const ad::Var pb1 = tape.leaf(p_b1_, needs_grad);
    const ad::Var pw2 = tape.leaf(p_w2_, needs_grad);
    const ad::Var pb2 = tape.leaf(p_b2_, needs_grad);
    std::vector<ad::Var> wl;
    std::vector<ad::CVar> rl;
    for (std::size_t l = 0; l < kLayers; ++l) {
        wl.push_back(tape.leaf(w_[l], needs_grad));
        rl.push_back(tape.leaf(r_[l], needs_grad));
    }
    std::array<ad::Var, 3> qw1, qb1, qw2, qb2;
    for (std::size_t h = 0; h < 3; ++h) {
        qw1[h] = tape.leaf(q_w1_[h], needs_grad);
        qb1[h] = tape.leaf(q_b1_[h], needs_grad);
        qw2[h] = tape.leaf(q_w2_[h], needs_grad);
        qb2[h] = tape.leaf(q_b2_[h], needs_grad);
    }

    ad::Var v = tape.channel_linear(feat, pw1, pb1);
    if (schedule_.pointwise_relu) v = tape.relu(v);
    v = tape.channel_linear(v, pw2, pb2);

    std::vector<ad::Var> encoder_out;
    auto cur_res = in_res;
    for (std::size_t l = 0; l < kLayers; ++l) {
        if (l >= 4) {
            ad::Var skip = encoder_out[7 - l];
            const auto skip_res = out_res[7 - l];
            if (skip_res != cur_res)
                skip = tape.field_from_spectrum(tape.fft3(skip), cur_res);
            v = tape.concat_channels(v, skip);
        }
        const ad::CVar spectrum = tape.fft3(v);
        const ad::CVar box = tape.extract_modes(spectrum, schedule_.layers[l].modes);
        const ad::Var spectral = tape.modes_to_field(tape.mode_mul(box, rl[l]), cur_res, out_res[l]);
        const ad::Var through =
            out_res[l] == cur_res ? v : tape.field_from_spectrum(spectrum, out_res[l]);
        const ad::Var zero_bias = tape.leaf(Tensor({schedule_.layers[l].channels}), false);
        v = tape.add(spectral, tape.channel_linear(through, wl[l], zero_bias));
        if (schedule_.layers[l].activation) v = tape.relu(v);
        if (l < 4) encoder_out.push_back(v);
        cur_res = out_res[l];
    }

    std::array<ad::Var, 3> component;
    for (std::size_t h = 0; h < 3; ++h) {
        ad::Var q = tape.channel_linear(v, qw1[h], qb1[h]);
        if (schedule_.pointwise_relu) q = tape.relu(q);
        component[h] = tape.channel_linear(q, qw2[h], qb2[h]);
    }
    g.output = tape.concat_channels(tape.concat_channels(component[0], component[1]), component[2]);

    g.real_params = {pw1, pb1, pw2, pb2};
    for (std::size_t l = 0; l < kLayers; ++l) g.real_params.push_back(wl[l]);
    for (std::size_t h = 0; h < 3; ++h) {
        g.real_params.push_back(qw1[h]);
        g.real_params.push_back(qb1[h]);
        g.real_params.push_back(qw2[h]);
        g.real_params.push_back(qb2[h]);
    }
    g.complex_params = rl;
    return g;
}

Tensor UnoModel::predict(const Tensor& vs) const {
    ad::Tape tape;
    const Graph g = forward(tape, vs, false);
    return tape.value(g.output);
}

void UnoModel::save(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto& self = const_cast<UnoModel&>(*this);
    const ParamRefs refs = self.params();

    container::json manifest;
    manifest["format_version"] = container::kFormatVersion;
    manifest["kind"] = "uno-model";
    manifest["seed"] = seed_;
    container::json sched;
    sched["name"] = schedule_.name;
    sched["entry_res"] = schedule_.entry_res;
    sched["v0_channels"] = schedule_.v0_channels;
    sched["lift_hidden"] = schedule_.lift_hidden;
    sched["q_hidden"] = schedule_.q_hidden;
    sched["pointwise_relu"] = schedule_.pointwise_relu;
    sched["layers"] = container::json::array();
    for (const LayerPlan& p : schedule_.layers) {
        container::json layer;
        layer["channels"] = p.channels;
        layer["modes"] = p.modes;
        layer["out_res"] = p.out_res;
        layer["activation"] = p.activation;
        sched["layers"].push_back(layer);
    }
    manifest["schedule"] = sched;
    manifest["norm"] = {{"mean", norm_.mean}, {"stddev", norm_.stddev}, {"target", norm_.target}};

    container::json params = container::json::array();
    std::size_t file_index = 0;
    auto record = [&params, &file_index](const std::string& name, bool complex_valued) {
        container::json entry;
        entry["name"] = name;
        entry["file"] = container::sample_file_name("param", file_index++);
        entry["complex"] = complex_valued;
        params.push_back(entry);
        return entry["file"].get<std::string>();
    };
    for (std::size_t i = 0; i < refs.real.size(); ++i) {
        const std::string file = record(refs.real_names[i], false);
        container::write_tensor((fs::path(dir) / file).string(), *refs.real[i]);
    }
    for (std::size_t i = 0; i < refs.complex.size(); ++i) {
        const std::string file = record(refs.complex_names[i], true);
        container::write_complex_tensor((fs::path(dir) / file).string(), *refs.complex[i]);
    }
    manifest["params"] = params;
    container::write_manifest((fs::path(dir) / "manifest.json").string(), manifest);
}

UnoModel UnoModel::load(const std::string& dir) {
    namespace fs = std::filesystem;
    const container::json manifest = container::read_manifest((fs::path(dir) / "manifest.json").string());
    check(manifest.value("kind", "") == "uno-model", "model load: manifest kind is not uno-model");
    check(manifest.value("format_version", 0) == container::kFormatVersion,
          "model load: unsupported manifest format version");

    const container::json& sched = manifest.at("schedule");
    UnoSchedule schedule;
    schedule.name = sched.at("name").get<std::string>();
    schedule.entry_res = sched.at("entry_res").get<std::array<std::size_t, 3>>();
    schedule.v0_channels = sched.at("v0_channels").get<std::size_t>();
    schedule.lift_hidden = sched.at("lift_hidden").get<std::size_t>();
    schedule.q_hidden = sched.at("q_hidden").get<std::size_t>();
    schedule.pointwise_relu = sched.at("pointwise_relu").get<bool>();
    for (const container::json& layer : sched.at("layers")) {
        LayerPlan p;
        p.channels = layer.at("channels").get<std::size_t>();
        p.modes = layer.at("modes").get<std::array<std::size_t, 3>>();
        p.out_res = layer.at("out_res").get<std::array<std::size_t, 3>>();
        p.activation = layer.at("activation").get<bool>();
        schedule.layers.push_back(p);
    }

    UnoModel model(std::move(schedule), manifest.value("seed", std::uint64_t{0}));
    const container::json& norm = manifest.at("norm");
    InputNorm n;
    n.mean = norm.at("mean").get<double>();
    n.stddev = norm.at("stddev").get<double>();
    n.target = norm.at("target").get<double>();
    model.set_norm(n);

    ParamRefs refs = model.params();
    std::size_t real_seen = 0, complex_seen = 0;
    for (const container::json& entry : manifest.at("params")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::string file = entry.at("file").get<std::string>();
        const bool complex_valued = entry.at("complex").get<bool>();
        const std::string path = (fs::path(dir) / file).string();
        if (complex_valued) {
            check(complex_seen < refs.complex.size(), "model load: too many complex parameters");
            check(name == refs.complex_names[complex_seen], "model load: parameter order mismatch at " + name);
            CTensor t = container::read_complex_tensor(path);
            check(t.same_shape(*refs.complex[complex_seen]), "model load: shape mismatch for " + name);
            *refs.complex[complex_seen++] = std::move(t);
        } else {
            check(real_seen < refs.real.size(), "model load: too many real parameters");
            check(name == refs.real_names[real_seen], "model load: parameter order mismatch at " + name);
            Tensor t = container::read_tensor(path);
            check(t.same_shape(*refs.real[real_seen]), "model load: shape mismatch for " + name);
            *refs.real[real_seen++] = std::move(t);
        }
    }
    check(real_seen == refs.real.size() && complex_seen == refs.complex.size(),
          "model load: checkpoint is missing parameters");
    return model;
}

}  // namespace seisuno::uno
