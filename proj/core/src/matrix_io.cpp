#include "greedynet/matrix_io.hpp"

#include "greedynet/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace greedynet {

namespace {

static_assert(std::endian::native == std::endian::little,
              "matrix payloads are little-endian; big-endian hosts need byte swapping");

using nlohmann::json;

} // namespace

std::filesystem::path payload_path_for(const std::filesystem::path& header) {
  std::filesystem::path p = header;
  p.replace_extension(".bin");
  return p;
}

void save_matrix(const std::filesystem::path& header, const Matrix& m) {
  const auto payload = payload_path_for(header);
  if (payload == header) {
    throw ValidationError("save_matrix: header path must not end in .bin: " + header.string());
  }
  json h = {{"rows", m.rows()},           {"cols", m.cols()},
            {"dtype", "f64"},             {"byte_order", "little"},
            {"layout", "row-major"},      {"payload", payload.filename().string()}};

  std::ofstream hout(header);
  if (!hout) {
    throw IoError("cannot write " + header.string());
  }
  hout << h.dump(2) << '\n';

  std::vector<double> row_major(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      row_major[k++] = m(i, j);
    }
  }
  std::ofstream pout(payload, std::ios::binary);
  if (!pout) {
    throw IoError("cannot write " + payload.string());
  }
  pout.write(reinterpret_cast<const char*>(row_major.data()),
             static_cast<std::streamsize>(row_major.size() * sizeof(double)));
  if (!pout) {
    throw IoError("short write on " + payload.string());
  }
}

Matrix load_matrix(const std::filesystem::path& header) {
  std::ifstream hin(header);
  if (!hin) {
    throw IoError("cannot read " + header.string());
  }
  json h;
  try {
    hin >> h;
  } catch (const json::exception& e) {
    throw CorruptHeader("matrix header " + header.string() + ": " + e.what());
  }

  Index rows = 0;
  Index cols = 0;
  std::string payload_name;
  try {
    if (h.at("dtype").get<std::string>() != "f64") {
      throw CorruptHeader("matrix header " + header.string() + ": dtype must be f64");
    }
    if (h.at("byte_order").get<std::string>() != "little") {
      throw CorruptHeader("matrix header " + header.string() + ": byte_order must be little");
    }
    if (h.contains("layout") && h["layout"].get<std::string>() != "row-major") {
      throw CorruptHeader("matrix header " + header.string() + ": layout must be row-major");
    }
    rows = h.at("rows").get<Index>();
    cols = h.at("cols").get<Index>();
    payload_name = h.value("payload", payload_path_for(header).filename().string());
  } catch (const json::exception& e) {
    throw CorruptHeader("matrix header " + header.string() + ": " + e.what());
  }
  if (rows < 0 || cols < 0) {
    throw CorruptHeader("matrix header " + header.string() + ": negative dimensions");
  }

  const auto payload = header.parent_path() / payload_name;
  std::ifstream pin(payload, std::ios::binary | std::ios::ate);
  if (!pin) {
    throw IoError("cannot read " + payload.string());
  }
  const auto bytes = static_cast<std::uint64_t>(pin.tellg());
  const auto expected = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 8u;
  if (bytes != expected) {
    throw CorruptHeader("payload " + payload.string() + " has " + std::to_string(bytes) +
                        " bytes, header implies " + std::to_string(expected));
  }
  pin.seekg(0);
  std::vector<double> row_major(static_cast<std::size_t>(rows * cols));
  pin.read(reinterpret_cast<char*>(row_major.data()), static_cast<std::streamsize>(bytes));
  if (!pin) {
    throw IoError("short read on " + payload.string());
  }

  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = row_major[k++];
    }
  }
  return m;
}

} // namespace greedynet
