#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dhmc/core.hpp"
#include "dhmc/embedding.hpp"

namespace dhmc::testing {

using Fn = std::function<double(std::span<const double>)>;
using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

// Target assembled from closures so each test states its potential inline.
class FnTarget final : public TargetModel {
 public:
  FnTarget(std::size_t d, Fn u, GradFn g = nullptr) : d_(d), u_(std::move(u)), g_(std::move(g)) {}

  std::size_t dim() const override { return d_; }
  std::string name() const override { return "fn"; }
  double potential(std::span<const double> theta) const override { return u_(theta); }
  bool has_gradient() const override { return static_cast<bool>(g_); }
  void gradient(std::span<const double> theta, std::span<double> grad) const override { g_(theta, grad); }
  Partition default_partition() const override {
    return g_ ? Partition::all_smooth(d_) : Partition::all_disc(d_);
  }
  const EmbeddingMap* embedding(std::size_t j) const override {
    return j < maps_.size() ? maps_[j].get() : nullptr;
  }
  void set_embeddings(const EmbeddingMap& m) {
    maps_.clear();
    for (std::size_t j = 0; j < d_; ++j) maps_.push_back(std::make_shared<EmbeddingMap>(m));
  }

 private:
  std::size_t d_;
  Fn u_;
  GradFn g_;
  std::vector<std::shared_ptr<EmbeddingMap>> maps_;
};

inline FnTarget flat(std::size_t d) {
  return FnTarget(d, [](std::span<const double>) { return 0.0; },
                  [](std::span<const double>, std::span<double> g) {
                    for (auto& v : g) v = 0.0;
                  });
}

inline FnTarget quadratic(std::size_t d) {
  return FnTarget(
      d,
      [](std::span<const double> t) {
        double s = 0.0;
        for (double x : t) s += 0.5 * x * x;
        return s;
      },
      [](std::span<const double> t, std::span<double> g) {
        for (std::size_t i = 0; i < t.size(); ++i) g[i] = t[i];
      });
}

// U = height * #{theta_i >= threshold}.
inline FnTarget step(std::size_t d, double height, double threshold) {
  return FnTarget(d, [=](std::span<const double> t) {
    double s = 0.0;
    for (double x : t) s += x >= threshold ? height : 0.0;
    return s;
  });
}

inline double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace dhmc::testing
