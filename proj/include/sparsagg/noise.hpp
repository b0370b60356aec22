#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "sparsagg/measure.hpp"
#include "sparsagg/random.hpp"
#include "sparsagg/truth.hpp"

namespace sparsagg {

enum class NoiseFamily { none, uniform, rademacher, truncated_gaussian, laplace };

/// Symmetric zero-mean noise with a finite exponential moment.
struct NoiseModel {
  NoiseFamily family = NoiseFamily::uniform;
  double scale = 1.0;       // a for uniform and rademacher, sigma otherwise
  double truncation = 0.0;  // c for the truncated Gaussian

  /// Parses `none`, `uniform:<a>`, `rademacher:<a>`, `truncgauss:<sigma>:<c>`
  /// or `laplace:<sigma>`.
  static NoiseModel parse(const std::string& text);
  std::string name() const;

  void validate() const;

  /// b = E exp(|W|).
  double moment_bound() const;

  double draw(Rng& rng) const;
};

/// Regression sample. Simulated samples also carry f(X_i) and W_i.
struct Sample {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> truth_values;
  std::optional<Eigen::VectorXd> noise;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
};

/// X_i drawn from the measure, then W_i, all from one generator seeded by `seed`.
Sample generate(const TruthSpec& truth, const MeasureSpec& measure, const NoiseModel& noise, std::size_t n,
                std::uint64_t seed);

}  // namespace sparsagg
