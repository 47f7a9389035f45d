#include "seisuno/container.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace seisuno::container {

static_assert(std::endian::native == std::endian::little, "container format assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kMagic{'N', 'O', 'P', 'D'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& t, bool as_f32) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open for writing: " + path.string());
    out.write(kMagic.data(), kMagic.size());
    write_raw<std::uint16_t>(out, kFormatVersion);
    write_raw<std::uint8_t>(out, as_f32 ? 1 : 2);
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t e : t.shape()) write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(e));
    if (as_f32) {
        std::vector<float> buf(t.numel());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(t.data()[i]);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
        out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!out) fail("short write: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open for reading: " + path.string());
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) fail("not a tensor container file: " + path.string());
    const auto version = read_raw<std::uint16_t>(in);
    if (version != kFormatVersion)
        fail("unsupported container version " + std::to_string(version) + " in " + path.string());
    const auto dtype = read_raw<std::uint8_t>(in);
    if (dtype != 1 && dtype != 2) fail("unknown dtype code in " + path.string());
    const auto rank = read_raw<std::uint8_t>(in);
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) e = static_cast<std::size_t>(read_raw<std::uint64_t>(in));
    Tensor t(shape);
    if (dtype == 1) {
        std::vector<float> buf(t.numel());
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
        for (std::size_t i = 0; i < buf.size(); ++i) t.data()[i] = static_cast<double>(buf[i]);
    } else {
        in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!in) fail("short read: " + path.string());
    return t;
}

void write_complex_tensor(const std::filesystem::path& path, const CTensor& t) {
    std::vector<std::size_t> shape(t.shape().begin(), t.shape().end());
    shape.push_back(2);
    Tensor real(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) {
        real[2 * i] = t[i].real();
        real[2 * i + 1] = t[i].imag();
    }
    write_tensor(path, real, /*as_f32=*/false);
}

CTensor read_complex_tensor(const std::filesystem::path& path) {
    const Tensor real = read_tensor(path);
    check(real.rank() >= 1 && real.shape().back() == 2, "complex tensor file must have a trailing extent of 2");
    std::vector<std::size_t> shape(real.shape().begin(), real.shape().end() - 1);
    CTensor t(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = cdouble(real[2 * i], real[2 * i + 1]);
    return t;
}

void write_manifest(const std::filesystem::path& path, const json& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail("cannot open for writing: " + path.string());
    out << manifest.dump(2) << "\n";
    if (!out) fail("short write: " + path.string());
}

json read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open for reading: " + path.string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::parse_error& e) {
        fail("invalid manifest " + path.string() + ": " + e.what());
    }
    return manifest;
}

std::string sample_file_name(const std::string& stem, std::size_t index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 6) digits.insert(digits.begin(), 6 - digits.size(), '0');
    return stem + "_" + digits + ".nopd";
}

}  // namespace seisuno::container
