#pragma once

#include <cstdint>

namespace lpwalk {

/// M_p = E|Z|^p for standard normal Z, i.e. 2^{p/2} Gamma((p+1)/2) / sqrt(pi),
/// evaluated in log space. Throws std::invalid_argument for negative or
/// non-finite p.
double mp_closed_form(double p);

/// The deterministic limit space ([0,1], sigma * M_p^{1/p} * sqrt|t-s|).
class LimitSpace {
 public:
  LimitSpace(double sigma, double p);

  double sigma() const { return sigma_; }
  double p() const { return p_; }
  double m_p() const { return m_p_; }
  /// sigma * M_p^{1/p}; the diameter of the space.
  double scale() const { return scale_; }

 private:
  double sigma_;
  double p_;
  double m_p_;
  double scale_;
};

/// sigma * M_p^{1/p} * sqrt|t - s| for t, s in [0, 1].
double limit_distance(double t, double s, const LimitSpace& space);

struct CovarianceMatrix2 {
  double s11 = 1.0;
  double s12 = 0.0;
  double s22 = 1.0;

  static CovarianceMatrix2 correlation(double rho) { return {1.0, rho, 1.0}; }
  bool is_psd() const;
};

/// E|eta1 eta2|^p for (eta1, eta2) ~ N(0, cov).
///
/// With eta = L z, z = R (cos theta, sin theta), R^2 ~ chi^2_2 independent of
/// theta, the moment factors into E R^{2p} = 2^p Gamma(p + 1) times the
/// angular mean of |cos theta * sin(theta + phi)|^p. The angular integrand
/// is analytic between its zeros, so each zero-free piece goes to tanh-sinh.
/// Rank-one covariances (det < 1e-12 s11 s22) use |s12|^p M_{2p} directly.
double bivariate_gaussian_abs_moment(double p, const CovarianceMatrix2& cov);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Plain Monte Carlo estimate of E|eta1 eta2|^p, deterministic in seed.
/// Requires reps >= 10^4.
MonteCarloEstimate bivariate_moment_mc_oracle(double p, const CovarianceMatrix2& cov,
                                              std::uint64_t reps, std::uint64_t seed);

}  // namespace lpwalk
