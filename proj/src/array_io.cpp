#include "qmcl/array_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qmcl {

static_assert(std::endian::native == std::endian::little, "array files assume little-endian hosts");

std::string sha256_hex(std::span<const unsigned char> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw std::runtime_error("sha256: digest computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < length; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

namespace {

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

nlohmann::json write_array(const fs::path& dir, const std::string& name, const Mat& array,
                           Precision precision) {
  fs::create_directories(dir);
  const auto rows = array.rows();
  const auto cols = array.cols();
  const std::size_t elem = precision == Precision::Float64 ? sizeof(double) : sizeof(float);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(rows * cols) * elem);
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (precision == Precision::Float64) {
        const double v = array(i, j);
        std::memcpy(bytes.data() + offset, &v, sizeof v);
      } else {
        const auto v = static_cast<float>(array(i, j));
        std::memcpy(bytes.data() + offset, &v, sizeof v);
      }
      offset += elem;
    }
  }
  const std::string file = name + ".bin";
  std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + (dir / file).string());
  return {{"file", file},
          {"rows", rows},
          {"cols", cols},
          {"dtype", precision == Precision::Float64 ? "float64" : "float32"},
          {"sha256", sha256_hex(bytes)}};
}

Mat read_array(const fs::path& dir, const nlohmann::json& entry) {
  const fs::path path = dir / entry.at("file").get<std::string>();
  const auto rows = entry.at("rows").get<Eigen::Index>();
  const auto cols = entry.at("cols").get<Eigen::Index>();
  const auto dtype = entry.at("dtype").get<std::string>();
  const std::size_t elem = dtype == "float64" ? sizeof(double)
                           : dtype == "float32" ? sizeof(float)
                                                : 0;
  if (elem == 0) throw std::runtime_error("unsupported dtype '" + dtype + "' in " + path.string());
  const std::vector<unsigned char> bytes = read_bytes(path);
  if (bytes.size() != static_cast<std::size_t>(rows * cols) * elem) {
    throw std::runtime_error("size mismatch reading " + path.string());
  }
  if (entry.contains("sha256") && sha256_hex(bytes) != entry.at("sha256").get<std::string>()) {
    throw std::runtime_error("content hash mismatch for " + path.string());
  }
  Mat out(rows, cols);
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (elem == sizeof(double)) {
        double v;
        std::memcpy(&v, bytes.data() + offset, sizeof v);
        out(i, j) = v;
      } else {
        float v;
        std::memcpy(&v, bytes.data() + offset, sizeof v);
        out(i, j) = v;
      }
      offset += elem;
    }
  }
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& value) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace qmcl
