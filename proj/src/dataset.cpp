#include "glmscale/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glmscale/errors.hpp"

namespace glmscale {

std::size_t Dataset::test_count() const {
  return static_cast<std::size_t>(std::count(test_mask.begin(), test_mask.end(), true));
}

std::vector<std::size_t> Dataset::train_rows() const {
  std::vector<std::size_t> rows;
  rows.reserve(n() - test_count());
  for (std::size_t i = 0; i < n(); ++i) {
    if (!is_test(i)) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> Dataset::test_rows() const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < test_mask.size(); ++i) {
    if (test_mask[i]) rows.push_back(i);
  }
  return rows;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(y.size()) != n()) {
    throw Error(ErrorKind::InvalidArgument, "dataset: y has " + std::to_string(y.size()) +
                                                " entries but X has " + std::to_string(n()) +
                                                " rows");
  }
  if (p() < 1 || n() <= p()) {
    throw Error(ErrorKind::InvalidArgument, "dataset: need n > p >= 1, got n = " +
                                                std::to_string(n()) + ", p = " +
                                                std::to_string(p()));
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "dataset: X and y must be finite");
  }
  if (!test_mask.empty()) {
    if (test_mask.size() != n()) {
      throw Error(ErrorKind::InvalidArgument, "dataset: test mask length differs from n");
    }
    const double count = static_cast<double>(test_count());
    const double rows = static_cast<double>(n());
    if (count > 0.0 && (count < 0.05 * rows - 1.0 || count > 0.15 * rows + 1.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  "dataset: test mask marks " + std::to_string(test_count()) + " of " +
                      std::to_string(n()) + " rows, outside 5%..15%");
    }
    if (n() - test_count() <= p()) {
      throw Error(ErrorKind::InsufficientData, "dataset: too few training rows for p");
    }
  }
}

TrainTestView::TrainTestView(const Dataset& data)
    : data_(&data), has_test_(data.test_count() > 0) {
  const Eigen::Index p = data.X.cols();
  train_index_ = data.train_rows();
  if (!has_test_) {
    X_test_.resize(0, p);
    y_test_.resize(0);
    return;
  }
  const auto test_index = data.test_rows();
  X_train_.resize(static_cast<Eigen::Index>(train_index_.size()), p);
  y_train_.resize(static_cast<Eigen::Index>(train_index_.size()));
  for (std::size_t i = 0; i < train_index_.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(train_index_[i]);
    X_train_.row(static_cast<Eigen::Index>(i)) = data.X.row(r);
    y_train_(static_cast<Eigen::Index>(i)) = data.y(r);
  }
  X_test_.resize(static_cast<Eigen::Index>(test_index.size()), p);
  y_test_.resize(static_cast<Eigen::Index>(test_index.size()));
  for (std::size_t i = 0; i < test_index.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(test_index[i]);
    X_test_.row(static_cast<Eigen::Index>(i)) = data.X.row(r);
    y_test_(static_cast<Eigen::Index>(i)) = data.y(r);
  }
}

}  // namespace glmscale
