#include "lpwalk/analytic_limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lpwalk/increments.hpp"

namespace lpwalk {

namespace {

void require_psd(const CovarianceMatrix2& cov) {
  if (!std::isfinite(cov.s11) || !std::isfinite(cov.s12) || !std::isfinite(cov.s22) ||
      !cov.is_psd()) {
    throw std::invalid_argument("covariance matrix is not positive semidefinite");
  }
}

bool rank_deficient(const CovarianceMatrix2& cov) {
  const double det = cov.s11 * cov.s22 - cov.s12 * cov.s12;
  return det < 1e-12 * cov.s11 * cov.s22 || cov.s11 == 0.0 || cov.s22 == 0.0;
}

}  // namespace

double mp_closed_form(double p) {
  if (!std::isfinite(p) || p < 0.0) {
    throw std::invalid_argument("mp_closed_form: p must be finite and >= 0");
  }
  const double log_mp = 0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0)) -
                        0.5 * std::log(std::numbers::pi);
  return std::exp(log_mp);
}

LimitSpace::LimitSpace(double sigma, double p) : sigma_(sigma), p_(p) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("LimitSpace: sigma must be finite and > 0");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("LimitSpace: p must be finite and >= 1");
  }
  m_p_ = mp_closed_form(p);
  scale_ = sigma * std::pow(m_p_, 1.0 / p);
}

double limit_distance(double t, double s, const LimitSpace& space) {
  if (!(t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("limit_distance: times must lie in [0, 1]");
  }
  return space.scale() * std::sqrt(std::abs(t - s));
}

bool CovarianceMatrix2::is_psd() const {
  return s11 >= 0.0 && s22 >= 0.0 && s11 * s22 - s12 * s12 >= -1e-12;
}

double bivariate_gaussian_abs_moment(double p, const CovarianceMatrix2& cov) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("bivariate_gaussian_abs_moment: p must be >= 1");
  }
  require_psd(cov);
  if (rank_deficient(cov)) {
    // eta2 = (s12 / s11) eta1, so |eta1 eta2|^p = |s12 / s11|^p |eta1|^{2p}.
    return std::pow(std::abs(cov.s12), p) * mp_closed_form(2.0 * p);
  }

  const double l11 = std::sqrt(cov.s11);
  const double l21 = cov.s12 / l11;
  const double l22 = std::sqrt(cov.s22 - l21 * l21);
  // l21 cos + l22 sin = sqrt(s22) sin(theta + phi)
  const double phi = std::atan2(l21, l22);
  const double pi = std::numbers::pi;

  auto integrand = [p, phi](double theta) {
    return std::pow(std::abs(std::cos(theta) * std::sin(theta + phi)), p);
  };

  // The integrand has period pi; its zeros there are pi/2 and -phi mod pi.
  std::vector<double> cuts{0.0, pi / 2, pi};
  double z = std::fmod(-phi, pi);
  if (z < 0.0) z += pi;
  if (z > 0.0 && z < pi && std::abs(z - pi / 2) > 1e-15) cuts.push_back(z);
  std::sort(cuts.begin(), cuts.end());

  boost::math::quadrature::tanh_sinh<double> quad;
  double angular = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    angular += quad.integrate(integrand, cuts[i], cuts[i + 1], 1e-14);
  }
  angular /= pi;

  const double radial = std::exp(p * std::numbers::ln2 + std::lgamma(p + 1.0));
  return radial * std::pow(cov.s11 * cov.s22, 0.5 * p) * angular;
}

MonteCarloEstimate bivariate_moment_mc_oracle(double p, const CovarianceMatrix2& cov,
                                              std::uint64_t reps, std::uint64_t seed) {
  require_psd(cov);
  if (reps < 10'000) throw std::invalid_argument("bivariate_moment_mc_oracle: reps must be >= 1e4");

  double l11 = 0.0, l21 = 0.0, l22 = std::sqrt(cov.s22);
  if (cov.s11 > 0.0) {
    l11 = std::sqrt(cov.s11);
    l21 = cov.s12 / l11;
    l22 = std::sqrt(std::max(0.0, cov.s22 - l21 * l21));
  }

  const CounterStream stream(SeedSpec{seed, 0});
  const IncrementLaw normal = IncrementLaw::normal();
  constexpr std::size_t kChunk = 8192;
  std::vector<double> z(2 * kChunk);

  // Welford accumulation keeps the variance stable for heavy p.
  double mean = 0.0, m2 = 0.0;
  std::uint64_t count = 0;
  for (std::uint64_t done = 0; done < reps;) {
    const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, reps - done));
    sample_xi_block(normal, stream, 2 * done, std::span(z.data(), 2 * take));
    for (std::size_t k = 0; k < take; ++k) {
      const double eta1 = l11 * z[2 * k];
      const double eta2 = l21 * z[2 * k] + l22 * z[2 * k + 1];
      const double v = std::pow(std::abs(eta1 * eta2), p);
      ++count;
      const double delta = v - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (v - mean);
    }
    done += take;
  }
  const double var = m2 / static_cast<double>(count - 1);
  return {mean, std::sqrt(var / static_cast<double>(count))};
}

}  // namespace lpwalk
