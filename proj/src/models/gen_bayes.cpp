#include "dhmc/models/gen_bayes.hpp"

#include <cmath>

namespace dhmc::models {

namespace {

// Margins y_i x_i' beta for the coefficients in `beta`. Moves are applied
// lazily: the next call diffs the caller's beta against the stored copy.
class MarginWorkspace final : public ModelWorkspace {
 public:
  std::vector<double> beta;
  Eigen::VectorXd margins;
  std::size_t since_refresh = 0;
  bool ready = false;
};

constexpr std::size_t kRefreshEvery = 2000;

}  // namespace

void ClassificationData::validate() const {
  if (X.rows() == 0 || X.cols() == 0) throw DataError("classification data is empty");
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw DataError("labels and predictors have different lengths");
  for (int v : y) {
    if (v != 1 && v != -1) throw DataError("labels must be -1 or +1");
  }
  if (!X.allFinite()) throw DataError("predictors must be finite");
}

GenBayesTarget::GenBayesTarget(ClassificationData data) {
  data.validate();
  z_ = data.X;
  for (Eigen::Index i = 0; i < z_.rows(); ++i) z_.row(i) *= static_cast<double>(data.y[static_cast<std::size_t>(i)]);
}

std::vector<std::string> GenBayesTarget::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < dim(); ++j) names.push_back("beta" + std::to_string(j + 1));
  return names;
}

std::vector<double> GenBayesTarget::initial_point() const {
  const Eigen::VectorXd dir = z_.colwise().sum().transpose();
  const double norm = dir.norm();
  std::vector<double> x(dim(), 0.0);
  if (!(norm > 0.0)) return x;
  const double scale = std::sqrt(static_cast<double>(dim())) / norm;
  for (std::size_t j = 0; j < dim(); ++j) x[j] = scale * dir(static_cast<Eigen::Index>(j));
  return x;
}

std::int64_t GenBayesTarget::misclassification_count(std::span<const double> beta) const {
  const Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const Eigen::VectorXd s = z_ * b;
  return (s.array() < 0.0).count();
}

double GenBayesTarget::potential(std::span<const double> theta) const {
  double quad = 0.0;
  for (double b : theta) quad += b * b;
  return static_cast<double>(misclassification_count(theta)) + 0.5 * quad;
}

void GenBayesTarget::derived(std::span<const double> theta, std::vector<double>& out) const {
  out.assign(1, static_cast<double>(misclassification_count(theta)));
}

std::unique_ptr<ModelWorkspace> GenBayesTarget::make_workspace() const { return std::make_unique<MarginWorkspace>(); }

double GenBayesTarget::potential_diff(std::span<const double> theta, std::size_t j, double value,
                                      ModelWorkspace* ws) const {
  auto* mw = dynamic_cast<MarginWorkspace*>(ws);
  const Eigen::Index n = z_.rows();
  Eigen::VectorXd local;
  const Eigen::VectorXd* margins = nullptr;

  if (mw) {
    if (!mw->ready || mw->since_refresh >= kRefreshEvery) {
      mw->beta.assign(theta.begin(), theta.end());
      mw->margins = z_ * Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
      mw->since_refresh = 0;
      mw->ready = true;
    } else {
      for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta[k] != mw->beta[k]) {
          mw->margins += (theta[k] - mw->beta[k]) * z_.col(static_cast<Eigen::Index>(k));
          mw->beta[k] = theta[k];
          ++mw->since_refresh;
        }
      }
    }
    margins = &mw->margins;
  } else {
    local = z_ * Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    margins = &local;
  }

  const double delta = value - theta[j];
  const auto col = z_.col(static_cast<Eigen::Index>(j));
  std::int64_t change = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double before = (*margins)(i);
    const double after = before + delta * col(i);
    change += static_cast<int>(after < 0.0) - static_cast<int>(before < 0.0);
  }
  return static_cast<double>(change) + 0.5 * (value * value - theta[j] * theta[j]);
}

}  // namespace dhmc::models
