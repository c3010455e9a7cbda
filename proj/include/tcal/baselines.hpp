#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "tcal/curves.hpp"

namespace tcal {

enum class LossKind { ZeroOne, L1, L2 };

std::string_view to_string(LossKind loss) noexcept;
// Accepts "zero-one"/"zero_one", "l1", "l2".
LossKind parse_loss_kind(std::string_view text);

using Shape = std::vector<std::uint32_t>;

// Samples x elements, one row per sample.
using SampleMatrix = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t element_count(const Shape& shape);

struct ClassLabels {
  std::vector<std::int64_t> classes;
};

/// Dense numeric labels of a fixed per-sample shape. A scalar label set has
/// an empty (rank-0) shape and one element per sample.
struct DenseLabels {
  Shape shape;
  SampleMatrix values;

  static DenseLabels scalars(std::span<const double> values);
};

class LabelCollection {
 public:
  LabelCollection(ClassLabels labels) : data_(std::move(labels)) {}
  LabelCollection(DenseLabels labels);

  std::size_t count() const;
  bool is_class() const { return std::holds_alternative<ClassLabels>(data_); }

  const ClassLabels& classes() const { return std::get<ClassLabels>(data_); }
  const DenseLabels& dense() const { return std::get<DenseLabels>(data_); }

 private:
  std::variant<ClassLabels, DenseLabels> data_;
};

/// A constant, input-agnostic output: a class index or a dense array laid out
/// like one label sample.
struct Prediction {
  std::variant<std::int64_t, Eigen::ArrayXd> value;

  static Prediction of_class(std::int64_t c) { return {c}; }
  static Prediction of_array(Eigen::ArrayXd a) { return {std::move(a)}; }
  static Prediction of_scalar(double v) { return {Eigen::ArrayXd::Constant(1, v)}; }

  bool is_class() const { return std::holds_alternative<std::int64_t>(value); }
  std::int64_t class_index() const { return std::get<std::int64_t>(value); }
  const Eigen::ArrayXd& array() const { return std::get<Eigen::ArrayXd>(value); }
};

struct BlindGuess {
  Prediction prediction;
  LossKind loss;
};

/// Mean per-sample loss of a constant prediction.
Risk empirical_risk(const Prediction& constant, const LabelCollection& labels, LossKind loss);

/// Mean per-sample loss of stored per-sample predictions.
Risk empirical_risk(const LabelCollection& predictions, const LabelCollection& labels,
                    LossKind loss);

/// Best constant prediction under `loss`:
///  - zero_one: most frequent class (smallest index on ties); for dense labels
///    the most frequent whole sample (lexicographically smallest on ties).
///  - l1: elementwise median, lower middle value for even counts.
///  - l2: elementwise mean.
BlindGuess blind_guess(const LabelCollection& labels, LossKind loss);

/// Exhaustive argmin of empirical_risk over `candidates`; first wins ties.
BlindGuess brute_force_blind(const LabelCollection& labels, LossKind loss,
                             std::span<const Prediction> candidates);

// ---------------------------------------------------------------------------
// Streaming dense labels
// ---------------------------------------------------------------------------

/// Single-consumer provider of dense labels that can hand out a contiguous
/// range of elements for every sample.
class DenseLabelSource {
 public:
  virtual ~DenseLabelSource() = default;

  virtual std::uint64_t sample_count() const = 0;
  virtual const Shape& shape() const = 0;

  /// Fills `out` (resized to sample_count x count) with elements
  /// [first, first + count) of every sample.
  virtual void read_elements(std::size_t first, std::size_t count, Eigen::ArrayXXd& out) = 0;
};

class InMemoryLabelSource final : public DenseLabelSource {
 public:
  explicit InMemoryLabelSource(const DenseLabels& labels) : labels_(labels) {}

  std::uint64_t sample_count() const override {
    return static_cast<std::uint64_t>(labels_.values.rows());
  }
  const Shape& shape() const override { return labels_.shape; }
  void read_elements(std::size_t first, std::size_t count, Eigen::ArrayXXd& out) override;

 private:
  const DenseLabels& labels_;
};

/// Exact per-element median (l1) or mean (l2) computed in element chunks so
/// that at most `memory_budget` bytes of label values are resident at once.
/// The result does not depend on the budget.
BlindGuess elementwise_blind_guess(DenseLabelSource& source, LossKind loss,
                                   std::size_t memory_budget);

}  // namespace tcal
