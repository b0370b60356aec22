#include "sparsagg/noise.hpp"

#include <cmath>

#include "sparsagg/csv.hpp"
#include "sparsagg/error.hpp"

namespace sparsagg {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

NoiseModel NoiseModel::parse(const std::string& text) {
  const auto parts = io::split(text, ':');
  const std::string family = io::trim(parts.at(0));
  NoiseModel m;
  auto arg = [&](std::size_t i) {
    require(parts.size() > i, ErrorKind::config, "noise '" + text + "' is missing a parameter");
    return io::parse_double(parts[i]);
  };
  if (family == "none") {
    require(parts.size() == 1, ErrorKind::config, "noise 'none' takes no parameters");
    m.family = NoiseFamily::none;
    m.scale = 0.0;
  } else if (family == "uniform") {
    m.family = NoiseFamily::uniform;
    m.scale = arg(1);
  } else if (family == "rademacher") {
    m.family = NoiseFamily::rademacher;
    m.scale = arg(1);
  } else if (family == "truncgauss") {
    m.family = NoiseFamily::truncated_gaussian;
    m.scale = arg(1);
    m.truncation = arg(2);
  } else if (family == "laplace") {
    m.family = NoiseFamily::laplace;
    m.scale = arg(1);
  } else {
    fail(ErrorKind::config, "unknown noise family '" + family + "'");
  }
  const std::size_t expected = m.family == NoiseFamily::none                 ? 1
                               : m.family == NoiseFamily::truncated_gaussian ? 3
                                                                             : 2;
  require(parts.size() == expected, ErrorKind::config, "noise '" + text + "' has the wrong number of parameters");
  m.validate();
  return m;
}

std::string NoiseModel::name() const {
  switch (family) {
    case NoiseFamily::none:
      return "none";
    case NoiseFamily::uniform:
      return "uniform:" + io::format_double(scale);
    case NoiseFamily::rademacher:
      return "rademacher:" + io::format_double(scale);
    case NoiseFamily::truncated_gaussian:
      return "truncgauss:" + io::format_double(scale) + ":" + io::format_double(truncation);
    case NoiseFamily::laplace:
      return "laplace:" + io::format_double(scale);
  }
  return "?";
}

void NoiseModel::validate() const {
  require(std::isfinite(scale) && scale >= 0.0, ErrorKind::config, "noise scale must be finite and nonnegative");
  switch (family) {
    case NoiseFamily::none:
      break;
    case NoiseFamily::uniform:
    case NoiseFamily::rademacher:
      break;
    case NoiseFamily::truncated_gaussian:
      require(scale > 0.0, ErrorKind::config, "truncated Gaussian needs sigma > 0");
      require(std::isfinite(truncation) && truncation > 0.0, ErrorKind::config,
              "truncated Gaussian needs a positive truncation level");
      break;
    case NoiseFamily::laplace:
      require(scale < 1.0, ErrorKind::config, "Laplace noise needs sigma < 1 for a finite exponential moment");
      break;
  }
}

double NoiseModel::moment_bound() const {
  validate();
  switch (family) {
    case NoiseFamily::none:
      return 1.0;
    case NoiseFamily::uniform:
      return scale == 0.0 ? 1.0 : std::expm1(scale) / scale;
    case NoiseFamily::rademacher:
      return std::exp(scale);
    case NoiseFamily::laplace:
      return 1.0 / (1.0 - scale);
    case NoiseFamily::truncated_gaussian: {
      const double s = scale, c = truncation;
      const double mass = 2.0 * normal_cdf(c / s) - 1.0;
      return 2.0 * std::exp(0.5 * s * s) * (normal_cdf(c / s - s) - normal_cdf(-s)) / mass;
    }
  }
  return 1.0;
}

double NoiseModel::draw(Rng& rng) const {
  switch (family) {
    case NoiseFamily::none:
      return 0.0;
    case NoiseFamily::uniform:
      return rng.uniform(-scale, scale);
    case NoiseFamily::rademacher:
      return (rng.bits() >> 63) ? scale : -scale;
    case NoiseFamily::laplace: {
      const double e = -std::log(rng.uniform_open_low());
      return (rng.bits() >> 63) ? scale * e : -scale * e;
    }
    case NoiseFamily::truncated_gaussian: {
      const double z = truncation / scale;
      if (2.0 * normal_cdf(z) - 1.0 >= 0.25) {
        while (true) {
          const double w = scale * rng.normal();
          if (std::abs(w) <= truncation) return w;
        }
      }
      while (true) {
        const double w = rng.uniform(-truncation, truncation);
        if (rng.uniform() < std::exp(-0.5 * (w / scale) * (w / scale))) return w;
      }
    }
  }
  return 0.0;
}

Sample generate(const TruthSpec& truth, const MeasureSpec& measure, const NoiseModel& noise, std::size_t n,
                std::uint64_t seed) {
  require(n >= 1, ErrorKind::config, "sample size must be at least 1");
  noise.validate();
  measure.validate();
  Rng rng(seed);
  Sample s;
  s.x = sample_points(measure, n, rng);
  s.truth_values = truth.values(s.x);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = noise.draw(rng);
  s.y = *s.truth_values + w;
  s.noise = std::move(w);
  return s;
}

}  // namespace sparsagg
