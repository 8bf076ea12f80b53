#pragma once

#include <span>
#include <vector>

#include "curvgraph/geometry.hpp"
#include "curvgraph/rng.hpp"

namespace curvgraph {

struct WrappedNormalParams {
  Vec mu;
  double sigma = 1.0;
  Curvature k;
};

// Pushes a fixed standard-normal draw `eps` through the reparameterized
// sampler: v = sigma * eps in the tangent space at mu, z = exp_mu(v / lambda_mu).
// Gradients flow through mu and sigma; eps stays constant.
template <class S>
std::vector<S> wrapped_normal_push(std::span<const S> mu, const S& sigma,
                                   std::span<const double> eps, Curvature k) {
  const S lam = geometry::conformal_factor(mu, k);
  const S scale = sigma / lam;
  std::vector<S> v(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) v[i] = scale * S(eps[i]);
  return geometry::exp_map<S>(mu, v, k);
}

std::vector<double> draw_standard_normal(int dim, Rng& rng);

Vec wrapped_normal_sample(const WrappedNormalParams& params, Rng& rng);

// Log density of the wrapped normal with respect to the Riemannian volume
// measure: Gaussian log density of lambda_mu * log_mu(z) plus the radial
// volume-change term (d-1) * log(t / sinh t) (sin for positive curvature),
// t = sqrt(|kappa|) * d(mu, z).
double wrapped_normal_log_density(std::span<const double> z,
                                  const WrappedNormalParams& params);

}  // namespace curvgraph
