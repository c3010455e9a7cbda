#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "tcal/baselines.hpp"

namespace tcal {

// Dense-label binary ("TCLB"), little-endian:
//   magic "TCLB" | version u32 = 1 | sample_count u64 | rank u32 |
//   dims u32 x rank | dtype u8 (0 = f32, 1 = f64) | samples, contiguous.
enum class TclbDtype : std::uint8_t { F32 = 0, F64 = 1 };

struct TclbHeader {
  std::uint64_t sample_count{};
  Shape shape;
  TclbDtype dtype{TclbDtype::F64};

  std::size_t header_bytes() const { return 4 + 4 + 8 + 4 + 4 * shape.size() + 1; }
  std::size_t value_bytes() const { return dtype == TclbDtype::F32 ? 4 : 8; }
};

std::string encode_tclb(const DenseLabels& labels, TclbDtype dtype = TclbDtype::F64);
DenseLabels decode_tclb(std::string_view bytes);

void write_tclb(const std::filesystem::path& path, const DenseLabels& labels,
                TclbDtype dtype = TclbDtype::F64);
DenseLabels read_tclb(const std::filesystem::path& path);

/// Streams element ranges of a TCLB file without loading it whole.
class TclbFileSource final : public DenseLabelSource {
 public:
  explicit TclbFileSource(const std::filesystem::path& path);

  std::uint64_t sample_count() const override { return header_.sample_count; }
  const Shape& shape() const override { return header_.shape; }
  void read_elements(std::size_t first, std::size_t count, Eigen::ArrayXXd& out) override;

 private:
  std::ifstream in_;
  TclbHeader header_;
  std::size_t elements_{};
};

// Class-label CSV with header `sample_id,class`.
ClassLabels parse_class_labels(std::string_view document);
std::string serialize_class_labels(const ClassLabels& labels);

/// Loads a label file, choosing the format by its leading bytes.
LabelCollection load_labels(const std::filesystem::path& path);

}  // namespace tcal
