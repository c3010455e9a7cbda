#include "tcal/label_io.hpp"

#include <bit>
#include <charconv>
#include <iterator>

#include "csv.hpp"
#include "tcal/error.hpp"

namespace tcal {
namespace {

constexpr std::string_view kMagic = "TCLB";
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void bad_binary(const std::string& why) {
  throw Error(ErrorCode::MalformedBinary, "TCLB: " + why);
}

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(p[i])) << (8 * i));
  }
  return v;
}

double decode_value(const char* p, TclbDtype dtype) {
  if (dtype == TclbDtype::F32) return static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)));
  return std::bit_cast<double>(get_le<std::uint64_t>(p));
}

// Parses the header from the leading bytes of a buffer or file.
TclbHeader decode_header(std::string_view bytes) {
  if (bytes.size() < 20 || bytes.substr(0, 4) != kMagic) bad_binary("bad magic");
  const char* p = bytes.data();
  if (get_le<std::uint32_t>(p + 4) != kVersion) bad_binary("unsupported version");
  TclbHeader h;
  h.sample_count = get_le<std::uint64_t>(p + 8);
  const auto rank = get_le<std::uint32_t>(p + 16);
  if (rank > 16) bad_binary("rank " + std::to_string(rank) + " too large");
  if (bytes.size() < 20 + 4 * std::size_t{rank} + 1) bad_binary("truncated header");
  for (std::uint32_t i = 0; i < rank; ++i) h.shape.push_back(get_le<std::uint32_t>(p + 20 + 4 * i));
  const auto dtype = static_cast<unsigned char>(p[20 + 4 * rank]);
  if (dtype > 1) bad_binary("unknown dtype " + std::to_string(dtype));
  h.dtype = static_cast<TclbDtype>(dtype);
  return h;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string encode_tclb(const DenseLabels& labels, TclbDtype dtype) {
  std::string out(kMagic);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(labels.values.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(labels.shape.size()));
  for (auto d : labels.shape) put_le<std::uint32_t>(out, d);
  out.push_back(static_cast<char>(dtype));
  for (Eigen::Index i = 0; i < labels.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < labels.values.cols(); ++j) {
      const double v = labels.values(i, j);
      if (dtype == TclbDtype::F32) {
        put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      } else {
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
      }
    }
  }
  return out;
}

DenseLabels decode_tclb(std::string_view bytes) {
  const TclbHeader h = decode_header(bytes);
  const std::size_t elements = element_count(h.shape);
  const std::size_t body = bytes.size() - h.header_bytes();
  if (elements != 0 && h.sample_count > body / (elements * h.value_bytes())) bad_binary("truncated body");
  if (body != h.sample_count * elements * h.value_bytes()) bad_binary("trailing bytes after samples");

  DenseLabels out{h.shape, SampleMatrix(static_cast<Eigen::Index>(h.sample_count),
                                        static_cast<Eigen::Index>(elements))};
  const char* p = bytes.data() + h.header_bytes();
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
      out.values(i, j) = decode_value(p, h.dtype);
      p += h.value_bytes();
    }
  }
  return out;
}

void write_tclb(const std::filesystem::path& path, const DenseLabels& labels, TclbDtype dtype) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const std::string bytes = encode_tclb(labels, dtype);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

DenseLabels read_tclb(const std::filesystem::path& path) { return decode_tclb(slurp(path)); }

TclbFileSource::TclbFileSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::string head(20 + 4 * 16 + 1, '\0');
  in_.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in_.gcount()));
  in_.clear();
  header_ = decode_header(head);
  elements_ = element_count(header_.shape);

  in_.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in_.tellg());
  if (size != header_.header_bytes() + header_.sample_count * elements_ * header_.value_bytes()) {
    bad_binary("file size does not match header");
  }
}

void TclbFileSource::read_elements(std::size_t first, std::size_t count, Eigen::ArrayXXd& out) {
  const auto rows = static_cast<Eigen::Index>(header_.sample_count);
  out.resize(rows, static_cast<Eigen::Index>(count));
  const std::size_t width = header_.value_bytes();
  std::string buf(count * width, '\0');
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto offset = header_.header_bytes() + (static_cast<std::size_t>(i) * elements_ + first) * width;
    in_.seekg(static_cast<std::streamoff>(offset));
    in_.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in_) throw Error(ErrorCode::Io, "short read from TCLB file");
    for (std::size_t j = 0; j < count; ++j) {
      out(i, static_cast<Eigen::Index>(j)) = decode_value(buf.data() + j * width, header_.dtype);
    }
  }
}

ClassLabels parse_class_labels(std::string_view document) {
  const auto rows = csv::read(document);
  if (rows.empty()) throw Error(ErrorCode::MalformedRow, "class-label CSV has no header");
  const auto& header = rows.front().fields;
  if (header.size() != 2 || header[0] != "sample_id" || header[1] != "class") {
    throw Error(ErrorCode::MalformedRow, "class-label CSV header must be 'sample_id,class'");
  }
  ClassLabels out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 2) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(row.line) + ": expected 2 fields");
    }
    std::int64_t c = 0;
    const auto& f = row.fields[1];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), c);
    if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size()) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(row.line) + ": class must be an integer");
    }
    out.classes.push_back(c);
  }
  return out;
}

std::string serialize_class_labels(const ClassLabels& labels) {
  std::string out = "sample_id,class\n";
  for (std::size_t i = 0; i < labels.classes.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(labels.classes[i]) + '\n';
  }
  return out;
}

LabelCollection load_labels(const std::filesystem::path& path) {
  std::string bytes = slurp(path);
  if (bytes.starts_with(kMagic)) return LabelCollection(decode_tclb(bytes));
  return LabelCollection(parse_class_labels(bytes));
}

}  // namespace tcal
