#include "ckdprog/explain/linear_shap.hpp"

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

Eigen::VectorXd linear_shap(const LinearModel& model, const Eigen::RowVectorXd& x,
                            const Background& background) {
  background.validate();
  if (x.size() != model.weights.size())
    throw ValidationError("input has " + std::to_string(x.size()) +
                          " features but the model expects " + std::to_string(model.weights.size()));
  if (background.rows.cols() != x.size())
    throw ValidationError("background column count does not match the input");
  const Eigen::RowVectorXd mean = background.rows.colwise().mean();
  return model.weights.cwiseProduct((x - mean).transpose());
}

}  // namespace ckdprog
