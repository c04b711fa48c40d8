#pragma once

#include <vector>

#include "dhmc/core.hpp"
#include "dhmc/embedding.hpp"

namespace dhmc::models {

// Independent Gaussian, U = sum theta_i^2 / (2 sd_i^2).
class GaussianTarget final : public TargetModel {
 public:
  explicit GaussianTarget(std::vector<double> sd);
  static GaussianTarget standard(std::size_t d) { return GaussianTarget(std::vector<double>(d, 1.0)); }

  std::size_t dim() const override { return sd_.size(); }
  std::string name() const override { return "gaussian"; }
  double potential(std::span<const double> theta) const override;
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> theta, std::span<double> grad) const override;
  bool has_potential_diff() const override { return true; }
  double potential_diff(std::span<const double> theta, std::size_t j, double value,
                        ModelWorkspace* ws) const override;

 private:
  std::vector<double> sd_;
};

// Ordinal pmf embedded on uniform knots: value n in first..first+K-1 at (n, n+1].
class DiscretePmfTarget final : public TargetModel {
 public:
  explicit DiscretePmfTarget(std::vector<double> pmf, std::int64_t first = 1);
  // The 3-state pmf (0.2, 0.5, 0.3) on {1, 2, 3}.
  static DiscretePmfTarget three_state() { return DiscretePmfTarget({0.2, 0.5, 0.3}); }

  std::size_t dim() const override { return 1; }
  std::string name() const override { return "discrete_pmf"; }
  double potential(std::span<const double> theta) const override;
  std::vector<double> initial_point() const override;
  std::vector<std::string> parameter_names() const override { return {"n"}; }
  const EmbeddingMap* embedding(std::size_t) const override { return &map_; }

  const std::vector<double>& pmf() const { return pmf_; }
  const EmbeddingMap& map() const { return map_; }

 private:
  std::vector<double> pmf_;
  EmbeddingMap map_;
};

// U = (quadratic ? |theta|^2 / 2 : 0) + height * #{i : theta_i >= threshold}.
// The gradient is the almost-everywhere derivative.
class StepTarget final : public TargetModel {
 public:
  StepTarget(std::size_t d, double height, double threshold, bool quadratic);

  std::size_t dim() const override { return d_; }
  std::string name() const override { return "step"; }
  double potential(std::span<const double> theta) const override;
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> theta, std::span<double> grad) const override;
  Partition default_partition() const override { return Partition::all_disc(d_); }

 private:
  std::size_t d_;
  double height_, threshold_;
  bool quadratic_;
};

// theta_0 | n ~ Normal(c n, 1) with n ~ pmf embedded in theta_1.
class MixedToyTarget final : public TargetModel {
 public:
  MixedToyTarget(std::vector<double> pmf, double coupling);

  std::size_t dim() const override { return 2; }
  std::string name() const override { return "mixed_toy"; }
  double potential(std::span<const double> theta) const override;
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> theta, std::span<double> grad) const override;
  Partition default_partition() const override { return Partition{{0}, {1}}; }
  std::vector<double> initial_point() const override;
  std::vector<std::string> parameter_names() const override { return {"x", "n"}; }
  const EmbeddingMap* embedding(std::size_t j) const override { return j == 1 ? &map_ : nullptr; }

 private:
  std::vector<double> pmf_;
  double coupling_;
  EmbeddingMap map_;
};

// Banana-shaped density quantized to a square grid of cell size h over
// [-half_width, half_width]^2; +inf outside the box. Constant on each cell.
class BananaTarget final : public TargetModel {
 public:
  explicit BananaTarget(double cell = 0.5, double half_width = 10.0);

  std::size_t dim() const override { return 2; }
  std::string name() const override { return "banana"; }
  double potential(std::span<const double> theta) const override;
  Partition default_partition() const override { return Partition::all_disc(2); }
  std::vector<double> initial_point() const override { return {0.1, 0.1}; }
  const EmbeddingMap* embedding(std::size_t) const override { return &map_; }
  // Unquantized potential at (x, y).
  static double smooth_potential(double x, double y);

 private:
  EmbeddingMap map_;
};

}  // namespace dhmc::models
