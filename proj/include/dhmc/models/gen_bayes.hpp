#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dhmc/core.hpp"

namespace dhmc::models {

struct ClassificationData {
  Eigen::MatrixXd X;  // n x k, standardized columns
  std::vector<int> y;  // labels in {-1, +1}

  void validate() const;
};

// Error-rate pseudo-posterior: U(beta) = #{i : y_i x_i' beta < 0} + |beta|^2 / 2.
// Every coordinate is discontinuous.
class GenBayesTarget final : public TargetModel {
 public:
  explicit GenBayesTarget(ClassificationData data);

  std::size_t dim() const override { return static_cast<std::size_t>(z_.cols()); }
  std::string name() const override { return "gen_bayes"; }
  double potential(std::span<const double> theta) const override;
  bool has_potential_diff() const override { return true; }
  // O(n) per call with a workspace that tracks the margins y_i x_i' beta.
  double potential_diff(std::span<const double> theta, std::size_t j, double value,
                        ModelWorkspace* ws) const override;
  std::unique_ptr<ModelWorkspace> make_workspace() const override;
  Partition default_partition() const override { return Partition::all_disc(dim()); }
  // sqrt(k) times the unit mean-difference direction sum_i y_i x_i; beta = 0
  // puts every margin on the decision boundary.
  std::vector<double> initial_point() const override;
  std::vector<std::string> parameter_names() const override;
  std::vector<std::string> derived_names() const override { return {"loss"}; }
  void derived(std::span<const double> theta, std::vector<double>& out) const override;

  std::int64_t misclassification_count(std::span<const double> beta) const;
  double log_posterior(std::span<const double> beta) const { return -potential(beta); }
  std::size_t observations() const { return static_cast<std::size_t>(z_.rows()); }

 private:
  Eigen::MatrixXd z_;  // rows y_i x_i
};

}  // namespace dhmc::models
