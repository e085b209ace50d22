#pragma once

// Binary array files (row-major, little-endian IEEE-754) described by JSON
// manifest entries carrying shape, element type, and a SHA-256 content hash.

#include "qmcl/swe_fv.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>

namespace qmcl {

namespace fs = std::filesystem;

enum class Precision { Float64, Float32 };

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const fs::path& path);

/// Writes `<dir>/<name>.bin` and returns its manifest entry
/// {"file", "rows", "cols", "dtype", "sha256"}.
nlohmann::json write_array(const fs::path& dir, const std::string& name, const Mat& array,
                           Precision precision = Precision::Float64);

/// Reads an array described by a manifest entry; throws std::runtime_error on
/// a missing file, size mismatch, or hash mismatch.
Mat read_array(const fs::path& dir, const nlohmann::json& entry);

/// Writes JSON with two-space indentation and a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& value);
nlohmann::json read_json(const fs::path& path);

}  // namespace qmcl
