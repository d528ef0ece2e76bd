#pragma once

#include <Eigen/Dense>

namespace gcx {

/// Row-per-sample labeled dataset with features already scaled to the range
/// the consumer expects (for images, [0, 1]).
struct Dataset {
  Eigen::MatrixXd x;       // n x d
  Eigen::VectorXi labels;  // n, values in [0, num_classes)
  int num_classes = 0;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
};

struct SplitDataset {
  Dataset train;
  Dataset validation;
};

}  // namespace gcx
