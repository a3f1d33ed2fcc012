#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "countfuse/error.hpp"
#include "countfuse/vectorize.hpp"
#include "text_util.hpp"

namespace countfuse {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

bool is_text_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".tsv" || ext == ".txt";
}

EmbeddingTable load_binary(std::ifstream& in, const std::string& name) {
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorKind::BadMagic, name + " does not start with EMB1");
  }
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  if (!detail::read_le(in, dim) || !detail::read_le(in, count)) {
    throw Error(ErrorKind::TruncatedFile, name + ": header cut short");
  }
  EmbeddingTable table;
  table.dim = dim;
  std::string id;
  for (std::uint64_t r = 0; r < count; ++r) {
    std::uint16_t id_len = 0;
    if (!detail::read_le(in, id_len) || !detail::read_bytes(in, id, id_len)) {
      throw Error(ErrorKind::TruncatedFile,
                  name + ": record " + std::to_string(r) + " of " + std::to_string(count));
    }
    DenseVector v(dim);
    for (auto& x : v) {
      float f = 0.0F;
      if (!detail::read_le(in, f)) {
        throw Error(ErrorKind::TruncatedFile,
                    name + ": record " + std::to_string(r) + " of " + std::to_string(count));
      }
      if (!std::isfinite(f)) {
        throw Error(ErrorKind::CorruptPayload, name + ": non-finite value in '" + id + "'");
      }
      x = f;
    }
    table.add(id, std::move(v));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::CorruptPayload, name + ": trailing bytes after " +
                                               std::to_string(count) + " records");
  }
  return table;
}

EmbeddingTable load_tsv(std::ifstream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw RowError(ErrorKind::MalformedRow, line_no, line, "expected id<TAB>v1,v2,...");
    }
    DenseVector v;
    for (const auto& field : detail::split(std::string_view(line).substr(tab + 1), ',')) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(field, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used == 0 || used != field.size() || !std::isfinite(x)) {
        throw RowError(ErrorKind::MalformedRow, line_no, field, "bad number '" + field + "'");
      }
      v.push_back(x);
    }
    if (table.ids.empty() && table.dim == 0) table.dim = v.size();
    if (v.size() != table.dim) {
      throw RowError(ErrorKind::DimMismatch, line_no, line.substr(0, tab),
                     "vector has " + std::to_string(v.size()) + " values, expected " +
                         std::to_string(table.dim));
    }
    table.add(line.substr(0, tab), std::move(v));
  }
  return table;
}

}  // namespace

const DenseVector* EmbeddingTable::find(const std::string& id) const {
  const auto it = vectors.find(id);
  return it == vectors.end() ? nullptr : &it->second;
}

void EmbeddingTable::add(const std::string& id, DenseVector v) {
  if (v.size() != dim) {
    throw Error(ErrorKind::DimMismatch, "embedding for '" + id + "' has " +
                                            std::to_string(v.size()) + " values, expected " +
                                            std::to_string(dim));
  }
  if (!vectors.emplace(id, std::move(v)).second) {
    throw Error(ErrorKind::DuplicateId, "embedding id '" + id + "' appears twice");
  }
  ids.push_back(id);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  return is_text_path(path) ? load_tsv(in) : load_binary(in, path.string());
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  if (table.dim > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::InvalidArgument, "embedding dim does not fit in u32");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  detail::write_le(out, static_cast<std::uint32_t>(table.dim));
  detail::write_le(out, static_cast<std::uint64_t>(table.ids.size()));
  for (const auto& id : table.ids) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorKind::InvalidArgument, "embedding id longer than 65535 bytes");
    }
    detail::write_le(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (double x : table.vectors.at(id)) detail::write_le(out, static_cast<float>(x));
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace countfuse
