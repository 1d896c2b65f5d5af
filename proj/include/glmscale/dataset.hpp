#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace glmscale {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DatasetInfo {
  std::string source;
  // Poisson responses: number of rows whose linear predictor was clamped.
  std::size_t clamped_rows = 0;
  double predictor_clamp = 0.0;
};

// Dense design (n x p) with response and an optional held-out mask. Training
// operations only ever read rows whose mask entry is false.
struct Dataset {
  MatrixXd X;
  VectorXd y;
  std::vector<bool> test_mask;  // empty: no held-out rows
  DatasetInfo info;

  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
  bool is_test(std::size_t row) const { return !test_mask.empty() && test_mask[row]; }
  std::size_t test_count() const;
  std::vector<std::size_t> train_rows() const;
  std::vector<std::size_t> test_rows() const;

  // Throws InvalidArgument when shapes disagree, n <= p, entries are not
  // finite, or the mask marks outside 5%..15% of rows (one row of slack).
  void validate() const;
};

// Training and test rows materialized once. With no mask the training part
// aliases the dataset, so the view must not outlive it.
class TrainTestView {
 public:
  explicit TrainTestView(const Dataset& data);

  const MatrixXd& X_train() const { return has_test_ ? X_train_ : data_->X; }
  const VectorXd& y_train() const { return has_test_ ? y_train_ : data_->y; }
  const MatrixXd& X_test() const { return X_test_; }
  const VectorXd& y_test() const { return y_test_; }

  std::size_t n_train() const { return static_cast<std::size_t>(X_train().rows()); }
  std::size_t n_test() const { return static_cast<std::size_t>(X_test_.rows()); }
  std::size_t p() const { return data_->p(); }
  const Dataset& dataset() const { return *data_; }
  // Dataset row index of each training row.
  const std::vector<std::size_t>& train_index() const { return train_index_; }

 private:
  const Dataset* data_;
  bool has_test_;
  MatrixXd X_train_;
  VectorXd y_train_;
  MatrixXd X_test_;
  VectorXd y_test_;
  std::vector<std::size_t> train_index_;
};

}  // namespace glmscale
