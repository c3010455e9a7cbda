#include "tcal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "tcal/error.hpp"

namespace tcal {
namespace {

void require_nonempty(const LabelCollection& labels) {
  if (labels.count() == 0) throw Error(ErrorCode::EmptyCollection, "label collection is empty");
}

void require_finite_labels(const DenseLabels& labels) {
  if (!labels.values.isFinite().all()) {
    throw Error(ErrorCode::NonFiniteLabel, "label values must be finite");
  }
}

std::string shape_text(Eigen::Index elements) { return std::to_string(elements) + " elements"; }

// Correctly rounded floating-point sum (Shewchuk's non-overlapping partials).
// Rounding once at the end keeps the result monotone in the exact sum, so two
// predictions with equal exact risk get identical doubles.
class ExactSum {
 public:
  void add(double x) {
    if (!std::isfinite(x)) {
      special_ += x;
      return;
    }
    std::size_t used = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[used++] = lo;
      x = hi;
    }
    partials_.resize(used);
    partials_.push_back(x);
  }

  double value() const {
    if (special_ != 0.0 || std::isnan(special_)) return special_;
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    // Half-way case: the remaining partials decide the rounding direction.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
  double special_ = 0.0;
};

// Adds the per-element loss of prediction p against label y to `sum` exactly:
// p - y is split into s + e with no rounding, and squares use fused products.
void add_loss(ExactSum& sum, double p, double y, LossKind loss) {
  double s = p - y;
  const double t = s - p;
  double e = (p - (s - t)) + (-y - t);
  if (s < 0.0 || (s == 0.0 && e < 0.0)) {
    s = -s;
    e = -e;
  }
  if (loss == LossKind::L1) {
    sum.add(s);
    sum.add(e);
    return;
  }
  auto add_product = [&sum](double a, double b) {
    const double ab = a * b;
    sum.add(ab);
    sum.add(std::fma(a, b, -ab));
  };
  add_product(s, s);
  add_product(2.0 * s, e);
  add_product(e, e);
}

// Mean loss over samples where sample i's prediction is produced by `pred(i)`.
template <typename PredictionOf>
Risk dense_risk(const DenseLabels& labels, LossKind loss, PredictionOf pred) {
  const Eigen::Index rows = labels.values.rows();
  const Eigen::Index cols = labels.values.cols();
  if (loss == LossKind::ZeroOne) {
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if ((pred(i) != labels.values.row(i).transpose()).any()) ++wrong;
    }
    return {static_cast<double>(wrong) / static_cast<double>(rows)};
  }
  ExactSum total;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& p = pred(i);
    for (Eigen::Index j = 0; j < cols; ++j) add_loss(total, p[j], labels.values(i, j), loss);
  }
  return {total.value() / (static_cast<double>(rows) * static_cast<double>(cols))};
}

Risk class_risk(const ClassLabels& labels, LossKind loss, auto pred) {
  if (loss != LossKind::ZeroOne) {
    throw Error(ErrorCode::UnsupportedLoss, "class labels support only the zero-one loss");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.classes.size(); ++i) {
    if (pred(i) != labels.classes[i]) ++wrong;
  }
  return {static_cast<double>(wrong) / static_cast<double>(labels.classes.size())};
}

Prediction majority_class(const ClassLabels& labels) {
  std::map<std::int64_t, std::size_t> counts;
  for (auto c : labels.classes) ++counts[c];
  // std::map iterates in ascending class order, so the first maximum is the
  // smallest tied index.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return Prediction::of_class(best->first);
}

Prediction modal_sample(const DenseLabels& labels) {
  std::map<std::vector<double>, std::size_t> counts;
  for (Eigen::Index i = 0; i < labels.values.rows(); ++i) {
    std::vector<double> key(labels.values.row(i).begin(), labels.values.row(i).end());
    ++counts[std::move(key)];
  }
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return Prediction::of_array(Eigen::Map<const Eigen::ArrayXd>(
      best->first.data(), static_cast<Eigen::Index>(best->first.size())));
}

}  // namespace

std::string_view to_string(LossKind loss) noexcept {
  switch (loss) {
    case LossKind::ZeroOne: return "zero-one";
    case LossKind::L1: return "l1";
    case LossKind::L2: return "l2";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "zero-one" || text == "zero_one") return LossKind::ZeroOne;
  if (text == "l1") return LossKind::L1;
  if (text == "l2") return LossKind::L2;
  throw Error(ErrorCode::UnsupportedLoss, "unknown loss kind '" + std::string(text) + "'");
}

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t d) { return a * d; });
}

DenseLabels DenseLabels::scalars(std::span<const double> values) {
  DenseLabels out{{}, SampleMatrix(static_cast<Eigen::Index>(values.size()), 1)};
  for (std::size_t i = 0; i < values.size(); ++i) out.values(static_cast<Eigen::Index>(i), 0) = values[i];
  return out;
}

LabelCollection::LabelCollection(DenseLabels labels) : data_(std::move(labels)) {
  const auto& d = std::get<DenseLabels>(data_);
  if (static_cast<std::size_t>(d.values.cols()) != element_count(d.shape)) {
    throw Error(ErrorCode::ShapeMismatch, "dense label matrix width does not match its shape");
  }
}

std::size_t LabelCollection::count() const {
  if (is_class()) return classes().classes.size();
  return static_cast<std::size_t>(dense().values.rows());
}

Risk empirical_risk(const Prediction& constant, const LabelCollection& labels, LossKind loss) {
  require_nonempty(labels);
  if (labels.is_class()) {
    if (!constant.is_class()) {
      throw Error(ErrorCode::ShapeMismatch, "class labels need a class prediction");
    }
    const auto c = constant.class_index();
    return class_risk(labels.classes(), loss, [c](std::size_t) { return c; });
  }
  const auto& dense = labels.dense();
  if (constant.is_class() || constant.array().size() != dense.values.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "prediction does not match label shape of " + shape_text(dense.values.cols()));
  }
  const Eigen::ArrayXd& p = constant.array();
  return dense_risk(dense, loss, [&p](Eigen::Index) -> const Eigen::ArrayXd& { return p; });
}

Risk empirical_risk(const LabelCollection& predictions, const LabelCollection& labels,
                    LossKind loss) {
  require_nonempty(labels);
  if (predictions.count() != labels.count() || predictions.is_class() != labels.is_class()) {
    throw Error(ErrorCode::ShapeMismatch, "predictions and labels differ in count or kind");
  }
  if (labels.is_class()) {
    const auto& p = predictions.classes().classes;
    return class_risk(labels.classes(), loss, [&p](std::size_t i) { return p[i]; });
  }
  const auto& pv = predictions.dense().values;
  if (pv.cols() != labels.dense().values.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and label shapes differ");
  }
  return dense_risk(labels.dense(), loss,
                    [&pv](Eigen::Index i) -> Eigen::ArrayXd { return pv.row(i).transpose(); });
}

BlindGuess blind_guess(const LabelCollection& labels, LossKind loss) {
  require_nonempty(labels);
  if (labels.is_class()) {
    if (loss != LossKind::ZeroOne) {
      throw Error(ErrorCode::UnsupportedLoss, "class labels support only the zero-one loss");
    }
    return {majority_class(labels.classes()), loss};
  }
  const auto& dense = labels.dense();
  require_finite_labels(dense);
  if (loss == LossKind::ZeroOne) return {modal_sample(dense), loss};
  InMemoryLabelSource source(dense);
  return elementwise_blind_guess(source, loss, std::numeric_limits<std::size_t>::max());
}

BlindGuess brute_force_blind(const LabelCollection& labels, LossKind loss,
                             std::span<const Prediction> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidates given");
  std::size_t best = 0;
  double best_risk = empirical_risk(candidates[0], labels, loss).value;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double r = empirical_risk(candidates[i], labels, loss).value;
    if (r < best_risk) {
      best = i;
      best_risk = r;
    }
  }
  return {candidates[best], loss};
}

void InMemoryLabelSource::read_elements(std::size_t first, std::size_t count,
                                        Eigen::ArrayXXd& out) {
  out = labels_.values.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
}

BlindGuess elementwise_blind_guess(DenseLabelSource& source, LossKind loss,
                                   std::size_t memory_budget) {
  if (loss == LossKind::ZeroOne) {
    throw Error(ErrorCode::UnsupportedLoss, "elementwise blind guess needs l1 or l2");
  }
  const std::uint64_t samples = source.sample_count();
  if (samples == 0) throw Error(ErrorCode::EmptyCollection, "label source is empty");

  const std::size_t elements = element_count(source.shape());
  const std::size_t column_bytes = static_cast<std::size_t>(samples) * sizeof(double);
  const std::size_t chunk = memory_budget / column_bytes;
  if (chunk == 0) {
    throw Error(ErrorCode::BudgetTooSmall,
                "one element column needs " + std::to_string(column_bytes) + " bytes, budget is " +
                    std::to_string(memory_budget));
  }

  const auto rows = static_cast<Eigen::Index>(samples);
  const Eigen::Index lower_middle = (rows - 1) / 2;
  Eigen::ArrayXd result(static_cast<Eigen::Index>(elements));
  Eigen::ArrayXXd block;

  for (std::size_t first = 0; first < elements; first += chunk) {
    const std::size_t width = std::min(chunk, elements - first);
    source.read_elements(first, width, block);
    if (!block.isFinite().all()) {
      throw Error(ErrorCode::NonFiniteLabel, "label values must be finite");
    }
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      double* col = block.col(j).data();
      double stat = 0.0;
      if (loss == LossKind::L1) {
        std::nth_element(col, col + lower_middle, col + rows);
        stat = col[lower_middle];
      } else {
        // Sequential sum in sample order keeps the mean independent of chunking.
        for (Eigen::Index i = 0; i < rows; ++i) stat += col[i];
        stat /= static_cast<double>(rows);
      }
      result[static_cast<Eigen::Index>(first) + j] = stat;
    }
  }
  return {Prediction::of_array(std::move(result)), loss};
}

}  // namespace tcal
