#pragma once

#include "greedynet/linalg.hpp"

#include <filesystem>

namespace greedynet {

/// Two-file matrix format.
///
/// The header is a small JSON document, e.g. `D.json`:
///
///     {"rows": 64, "cols": 128, "dtype": "f64", "byte_order": "little",
///      "layout": "row-major", "payload": "D.bin"}
///
/// The payload (`D.bin`, same directory, name taken from the header) holds
/// rows·cols IEEE-754 binary64 values in row-major order, little-endian, with
/// no padding, so its size is exactly 8·rows·cols bytes. Round trips are
/// bit-exact.
void save_matrix(const std::filesystem::path& header, const Matrix& m);

/// Reads a matrix written by save_matrix. Throws IoError when a file cannot be
/// read and CorruptHeader for malformed headers or payloads of the wrong size.
Matrix load_matrix(const std::filesystem::path& header);

/// Payload path that save_matrix pairs with `header` (extension replaced by .bin).
std::filesystem::path payload_path_for(const std::filesystem::path& header);

} // namespace greedynet
