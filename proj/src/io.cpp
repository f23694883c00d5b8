#include "incdsi/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "incdsi/errors.hpp"

namespace incdsi::io {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

/// Bounds-checked little-endian reader over a byte buffer.
class Reader {
 public:
  Reader(std::string_view bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string(what_) + ": truncated (need " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ")");
    }
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
  const char* what_;
};

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

// ---------------------------------------------------------------------------
// Embedding matrices

std::string encode_embedding_matrix(const Matrix& m) {
  if (!m.all_finite()) throw InvalidArgument("cannot encode a matrix with non-finite entries");
  if (m.cols() > 0xffffffffu) throw InvalidArgument("matrix has too many columns");
  std::string out;
  out.reserve(kEmbeddingHeaderBytes + 4 * m.rows() * m.cols());
  out.append(kEmbeddingMagic, 4);
  put_u32(out, kEmbeddingVersion);
  put_u64(out, m.rows());
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (float x : m.data()) put_f32(out, x);
  return out;
}

Matrix decode_embedding_matrix(std::string_view bytes) {
  Reader in(bytes, "embedding file");
  if (in.take(4) != std::string_view(kEmbeddingMagic, 4)) {
    throw FormatError("embedding file: bad magic");
  }
  const std::uint32_t version = in.u32();
  if (version != kEmbeddingVersion) {
    throw FormatError("embedding file: unsupported version " + std::to_string(version));
  }
  const std::uint64_t rows = in.u64();
  const std::uint32_t cols = in.u32();
  if (cols != 0 && rows > in.remaining() / 4 / cols) {
    throw FormatError("embedding file: truncated payload for " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (in.remaining() != 4 * count) {
    throw FormatError("embedding file: payload is " + std::to_string(in.remaining()) +
                      " bytes, expected " + std::to_string(4 * count));
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = in.f32();
    if (!std::isfinite(data[i])) {
      throw FormatError("embedding file: non-finite entry at row " + std::to_string(i / cols) +
                        ", column " + std::to_string(i % cols));
    }
  }
  return Matrix(static_cast<std::size_t>(rows), cols, std::move(data));
}

void write_embedding_matrix(const Matrix& m, const std::filesystem::path& path) {
  write_file(path, encode_embedding_matrix(m));
}

Matrix read_embedding_matrix(const std::filesystem::path& path) {
  return decode_embedding_matrix(read_file(path));
}

// ---------------------------------------------------------------------------
// Query manifests

std::string to_string(QueryKind kind) {
  return kind == QueryKind::natural ? "natural" : "generated";
}

std::string to_string(QuerySplit split) {
  switch (split) {
    case QuerySplit::train: return "train";
    case QuerySplit::val: return "val";
    case QuerySplit::test: return "test";
  }
  return "train";
}

std::vector<QueryRecord> parse_query_manifest(std::string_view text,
                                              std::optional<std::size_t> rows) {
  std::vector<QueryRecord> out;
  std::unordered_set<std::size_t> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim_cr(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;

    auto fail = [&](const std::string& why) {
      return FormatError("manifest line " + std::to_string(line_no) + ": " + why);
    };
    std::string_view fields[4];
    std::size_t n = 0;
    for (std::size_t start = 0;;) {
      const auto tab = line.find('\t', start);
      if (n == 4) throw fail("expected 4 tab-separated fields");
      fields[n++] = line.substr(start, tab == std::string_view::npos ? tab : tab - start);
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (n != 4) throw fail("expected 4 tab-separated fields");

    QueryRecord rec;
    const auto* first = fields[0].data();
    const auto* last = first + fields[0].size();
    const auto [ptr, ec] = std::from_chars(first, last, rec.row_index);
    if (ec != std::errc() || ptr != last || fields[0].empty()) throw fail("bad row_index");
    if (rows && rec.row_index >= *rows) {
      throw fail("row_index " + std::to_string(rec.row_index) + " out of range (" +
                 std::to_string(*rows) + " rows)");
    }
    if (!seen.insert(rec.row_index).second) {
      throw fail("duplicate row_index " + std::to_string(rec.row_index));
    }
    if (fields[1].empty()) throw fail("empty doc_id");
    rec.doc_id = std::string(fields[1]);
    if (fields[2] == "natural") {
      rec.kind = QueryKind::natural;
    } else if (fields[2] == "generated") {
      rec.kind = QueryKind::generated;
    } else {
      throw fail("unknown kind '" + std::string(fields[2]) + "'");
    }
    if (fields[3] == "train") {
      rec.split = QuerySplit::train;
    } else if (fields[3] == "val") {
      rec.split = QuerySplit::val;
    } else if (fields[3] == "test") {
      rec.split = QuerySplit::test;
    } else {
      throw fail("unknown split '" + std::string(fields[3]) + "'");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<QueryRecord> read_query_manifest(const std::filesystem::path& path,
                                             std::optional<std::size_t> rows) {
  return parse_query_manifest(read_file(path), rows);
}

void write_query_manifest(const std::vector<QueryRecord>& records,
                          const std::filesystem::path& path) {
  std::string text;
  for (const auto& r : records) {
    if (r.doc_id.empty() || r.doc_id.find_first_of("\t\n\r") != std::string::npos) {
      throw InvalidArgument("doc id '" + r.doc_id + "' cannot be written to a manifest");
    }
    text += std::to_string(r.row_index);
    text += '\t';
    text += r.doc_id;
    text += '\t';
    text += to_string(r.kind);
    text += '\t';
    text += to_string(r.split);
    text += '\n';
  }
  write_file(path, text);
}

// ---------------------------------------------------------------------------
// Snapshots

std::string encode_snapshot(const IndexState& state, const Hyperparams& hp) {
  std::string ids;
  const auto id_list = state.ids();
  for (std::size_t i = 0; i < id_list.size(); ++i) {
    if (id_list[i].find('\n') != std::string::npos) {
      throw InvalidArgument("doc id contains a newline: cannot snapshot");
    }
    if (i) ids += '\n';
    ids += id_list[i];
  }
  const auto diag = state.stored_diag();
  const std::string sections[4] = {
      encode_embedding_matrix(state.doc_matrix()),
      encode_embedding_matrix(state.query_matrix()),
      encode_embedding_matrix(Matrix(diag.size(), 1, diag)),
      std::move(ids),
  };

  std::string out;
  out.append(kSnapshotMagic, 4);
  put_u32(out, kSnapshotVersion);
  put_u64(out, state.n0());
  put_f64(out, hp.lambda1);
  put_f64(out, hp.lambda2);
  put_f64(out, hp.gamma1);
  put_f64(out, hp.gamma2);
  put_u32(out, hp.loss_variant == LossVariant::hinge ? 1u : 0u);
  for (const auto& s : sections) {
    put_u64(out, s.size());
    out += s;
  }
  return out;
}

std::pair<IndexState, Hyperparams> decode_snapshot(std::string_view bytes) {
  Reader in(bytes, "snapshot");
  if (in.take(4) != std::string_view(kSnapshotMagic, 4)) throw FormatError("snapshot: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kSnapshotVersion) {
    throw FormatError("snapshot: format version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kSnapshotVersion) + ")");
  }
  const std::uint64_t n0 = in.u64();
  Hyperparams hp;
  hp.lambda1 = in.f64();
  hp.lambda2 = in.f64();
  hp.gamma1 = in.f64();
  hp.gamma2 = in.f64();
  const std::uint32_t variant = in.u32();
  if (variant > 1) throw FormatError("snapshot: unknown loss variant " + std::to_string(variant));
  hp.loss_variant = variant == 1 ? LossVariant::hinge : LossVariant::squared_hinge;

  std::string_view sections[4];
  for (auto& s : sections) {
    const std::uint64_t len = in.u64();
    if (len > in.remaining()) throw FormatError("snapshot: truncated section");
    s = in.take(static_cast<std::size_t>(len));
  }
  if (in.remaining() != 0) throw FormatError("snapshot: trailing bytes");

  const Matrix v = decode_embedding_matrix(sections[0]);
  const Matrix z = decode_embedding_matrix(sections[1]);
  const Matrix d = decode_embedding_matrix(sections[2]);
  if (v.rows() != z.rows() || v.cols() != z.cols()) {
    throw FormatError("snapshot: V and Z differ in shape");
  }
  if (d.rows() != v.rows() || (d.rows() > 0 && d.cols() != 1)) {
    throw FormatError("snapshot: diagonal length does not match the row count");
  }
  std::vector<std::string> ids;
  if (v.rows() > 0) {
    std::string_view rest = sections[3];
    for (;;) {
      const auto nl = rest.find('\n');
      ids.emplace_back(rest.substr(0, nl));
      if (nl == std::string_view::npos) break;
      rest = rest.substr(nl + 1);
    }
  } else if (!sections[3].empty()) {
    throw FormatError("snapshot: id table present for an empty index");
  }
  if (ids.size() != v.rows()) {
    throw FormatError("snapshot: " + std::to_string(ids.size()) + " ids for " +
                      std::to_string(v.rows()) + " rows");
  }
  if (n0 > v.rows()) throw FormatError("snapshot: n0 exceeds the row count");
  if (v.cols() == 0) throw FormatError("snapshot: zero embedding dimension");
  try {
    return {IndexState::restore(v, z, d.data(), std::move(ids), static_cast<std::size_t>(n0)),
            hp};
  } catch (const DuplicateIdError& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
}

void save_snapshot(const IndexState& state, const Hyperparams& hp,
                   const std::filesystem::path& path) {
  write_file(path, encode_snapshot(state, hp));
}

std::pair<IndexState, Hyperparams> load_snapshot(const std::filesystem::path& path) {
  return decode_snapshot(read_file(path));
}

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("error reading " + path.string());
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("error writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace incdsi::io
