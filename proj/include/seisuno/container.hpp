#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "seisuno/tensor.hpp"

namespace seisuno::container {

using json = nlohmann::ordered_json;

/// Binary tensor file: magic "NOPD", u16 format version, u8 dtype code
/// (f32 = 1, f64 = 2), u8 rank, extents as u64 little endian, then the raw
/// little-endian values in row-major order.
inline constexpr std::uint16_t kFormatVersion = 1;

void write_tensor(const std::filesystem::path& path, const Tensor& t, bool as_f32 = false);
Tensor read_tensor(const std::filesystem::path& path);

/// Complex tensors travel as a real tensor with a trailing extent of 2
/// (re, im); the manifest records which entries use this encoding.
void write_complex_tensor(const std::filesystem::path& path, const CTensor& t);
CTensor read_complex_tensor(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const json& manifest);
json read_manifest(const std::filesystem::path& path);

/// Sample file naming shared by the dataset-producing commands.
std::string sample_file_name(const std::string& stem, std::size_t index);

}  // namespace seisuno::container
