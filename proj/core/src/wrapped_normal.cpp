#include "curvgraph/wrapped_normal.hpp"

#include <cmath>
#include <numbers>

#include "curvgraph/errors.hpp"

namespace curvgraph {

std::vector<double> draw_standard_normal(int dim, Rng& rng) {
  std::vector<double> eps(dim);
  for (double& e : eps) e = rng.normal();
  return eps;
}

Vec wrapped_normal_sample(const WrappedNormalParams& params, Rng& rng) {
  const auto eps = draw_standard_normal(static_cast<int>(params.mu.size()), rng);
  return wrapped_normal_push<double>(params.mu, params.sigma, eps, params.k);
}

namespace {

// log(t / sinh t) and log(t / sin t), stable through t -> 0.
double log_t_over_sinh(double t) {
  if (t < 1e-4) return -t * t / 6.0;
  return std::log(t / std::sinh(t));
}

double log_t_over_sin(double t) {
  if (t < 1e-4) return t * t / 6.0;
  return std::log(t / std::sin(t));
}

}  // namespace

double wrapped_normal_log_density(std::span<const double> z,
                                  const WrappedNormalParams& params) {
  if (!(params.sigma > 0.0)) {
    throw DomainError("wrapped_normal_log_density: sigma must be positive");
  }
  if (!geometry::in_domain(z, params.k)) {
    throw DomainError("wrapped_normal_log_density: point outside the domain");
  }
  const auto d = static_cast<double>(params.mu.size());
  const std::vector<double> log_uz =
      geometry::log_map<double>(params.mu, z, params.k);
  const double lam = geometry::conformal_factor<double>(params.mu, params.k);
  double u2 = 0.0;
  for (double c : log_uz) u2 += lam * c * lam * c;
  const double gaussian =
      -0.5 * d * std::log(2.0 * std::numbers::pi * params.sigma * params.sigma) -
      u2 / (2.0 * params.sigma * params.sigma);
  if (params.k.flat()) return gaussian;

  // Radial distance equals |lambda_mu * log_mu(z)|.
  const double dist = std::sqrt(u2);
  const double t = std::sqrt(std::abs(params.k.kappa)) * dist;
  const double correction = params.k.kappa < 0.0
                                ? (d - 1.0) * log_t_over_sinh(t)
                                : (d - 1.0) * log_t_over_sin(t);
  return gaussian + correction;
}

}  // namespace curvgraph
