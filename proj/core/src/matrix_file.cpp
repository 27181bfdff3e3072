#include <fstream>

#include "binary_io.hpp"
#include "ctp/embed.hpp"
#include "ctp/error.hpp"

namespace ctp {

namespace {
constexpr char kMagic[4] = {'C', 'T', 'P', 'M'};
}

void FeatureMatrix::append(std::string id, std::span<const double> row) {
  if (ids.empty() && dim == 0) dim = row.size();
  if (row.size() != dim) {
    throw DimensionMismatch("row of length " + std::to_string(row.size()) +
                            " appended to matrix of dimension " + std::to_string(dim));
  }
  ids.push_back(std::move(id));
  values.insert(values.end(), row.begin(), row.end());
}

void save_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  detail::BinaryWriter w(out);
  out.write(kMagic, 4);
  w.u32(kMatrixFormatVersion);
  w.u64(m.rows());
  w.u64(m.dim);
  w.str(m.metadata);
  for (const auto& id : m.ids) w.str(id);
  for (double v : m.values) w.f64(v);
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  detail::BinaryReader r(in, path.string());
  if (r.bytes(4) != std::string(kMagic, 4)) {
    throw CorruptFile(path.string() + ": not a feature matrix file");
  }
  const auto version = r.u32();
  if (version != kMatrixFormatVersion) {
    throw FormatVersionMismatch(path.string() + ": matrix format version " +
                                std::to_string(version) + ", expected " +
                                std::to_string(kMatrixFormatVersion));
  }
  FeatureMatrix m;
  const auto rows = r.u64();
  m.dim = r.u64();
  m.metadata = r.str();
  for (std::uint64_t i = 0; i < rows; ++i) m.ids.push_back(r.str());
  const std::uint64_t count = rows * m.dim;
  if (m.dim != 0 && count / m.dim != rows) throw CorruptFile(path.string() + ": bad shape");
  for (std::uint64_t i = 0; i < count; ++i) m.values.push_back(r.f64());
  if (!r.at_end()) throw CorruptFile(path.string() + ": trailing data");
  return m;
}

}  // namespace ctp
