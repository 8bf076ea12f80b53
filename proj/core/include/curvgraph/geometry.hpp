#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "curvgraph/ad.hpp"
#include "curvgraph/errors.hpp"

namespace curvgraph {

// Sectional curvature of the embedding space. The sign selects the geometry:
// negative is a Poincare ball of radius 1/sqrt(-kappa), zero is Euclidean,
// positive is the stereographic sphere. Magnitudes below kFlatTol are treated
// as exactly flat to avoid the removable 0/0 singularities of the general
// formulas.
struct Curvature {
  double kappa = 0.0;

  static constexpr double kFlatTol = 1e-10;

  bool flat() const { return std::abs(kappa) < kFlatTol; }
  bool hyperbolic() const { return kappa <= -kFlatTol; }
  bool spherical() const { return kappa >= kFlatTol; }

  // Euclidean radius of the open ball domain; +inf when the domain is all
  // of R^d (kappa >= 0).
  double ball_radius() const {
    return hyperbolic() ? 1.0 / std::sqrt(-kappa)
                        : std::numeric_limits<double>::infinity();
  }
};

using Vec = std::vector<double>;

// A coordinate vector constrained to -kappa * |x|^2 < 1.
struct ManifoldPoint {
  Vec coords;
};

// A vector attached to the tangent space at `base`.
struct TangentVector {
  Vec base;
  Vec components;
};

namespace geometry {

// Relative margin kept between points and the ball boundary when projecting.
inline constexpr double kBoundaryEps = 1e-5;
// Mobius denominators below this magnitude are treated as the singular
// (antipodal) configuration.
inline constexpr double kSingularTol = 1e-12;

template <class S>
inline double scalar_value(const S& s) {
  if constexpr (std::is_same_v<S, ad::Var>) {
    return s.value();
  } else {
    return static_cast<double>(s);
  }
}

template <class S>
S dot(std::span<const S> a, std::span<const S> b) {
  S acc(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a[i] * b[i];
  return acc;
}

template <class S>
S squared_norm(std::span<const S> a) {
  return dot(a, a);
}

template <class S>
S norm(std::span<const S> a) {
  using std::sqrt;
  return sqrt(squared_norm(a));
}

template <class S>
std::vector<S> scaled(std::span<const S> a, const S& factor) {
  std::vector<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  return out;
}

template <class S>
std::vector<S> negated(std::span<const S> a) {
  std::vector<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return out;
}

template <class S>
std::vector<S> added(std::span<const S> a, std::span<const S> b) {
  std::vector<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <class S>
std::vector<S> subtracted(std::span<const S> a, std::span<const S> b) {
  std::vector<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline bool in_domain(std::span<const double> x, Curvature k,
                      double slack = 0.0) {
  double n2 = 0.0;
  for (double c : x) {
    if (!std::isfinite(c)) return false;
    n2 += c * c;
  }
  return -k.kappa * n2 < 1.0 + slack;
}

// Pulls a raw coordinate vector into the open domain. For negative curvature
// a vector at or beyond (1 - eps) of the ball radius is rescaled onto that
// shell; positive and zero curvature leave the whole space valid.
template <class S>
std::vector<S> project_to_domain(std::span<const S> x, Curvature k) {
  for (const S& c : x) {
    if (!std::isfinite(scalar_value(c))) {
      throw std::invalid_argument("project_to_domain: non-finite coordinate");
    }
  }
  std::vector<S> out(x.begin(), x.end());
  if (!k.hyperbolic()) return out;
  const double rmax = (1.0 - kBoundaryEps) / std::sqrt(-k.kappa);
  const S n2 = squared_norm(x);
  if (scalar_value(n2) < rmax * rmax) return out;
  using std::sqrt;
  const S factor = S(rmax) / sqrt(n2);
  return scaled(x, factor);
}

// Conformal factor lambda_x = 2 / (1 + kappa |x|^2).
template <class S>
S conformal_factor(std::span<const S> x, Curvature k) {
  const S denom = S(1.0) + S(k.kappa) * squared_norm(x);
  if (scalar_value(denom) <= 0.0) {
    throw DomainError("conformal_factor: point outside the ball domain");
  }
  return S(2.0) / denom;
}

// Curvature-scaled tangent: tan(sqrt(k) u)/sqrt(k) for k > 0,
// tanh(sqrt(-k) u)/sqrt(-k) for k < 0, identity in the flat limit.
template <class S>
S tan_k(const S& u, Curvature k) {
  if (k.flat()) return u;
  const double sk = std::sqrt(std::abs(k.kappa));
  if (k.kappa > 0.0) {
    using std::tan;
    return tan(S(sk) * u) / S(sk);
  }
  using std::tanh;
  return tanh(S(sk) * u) / S(sk);
}

// Exact inverse of tan_k. For negative curvature the argument must satisfy
// sqrt(-k) |u| < 1.
template <class S>
S arctan_k(const S& u, Curvature k) {
  if (k.flat()) return u;
  const double sk = std::sqrt(std::abs(k.kappa));
  if (k.kappa > 0.0) {
    using std::atan;
    return atan(S(sk) * u) / S(sk);
  }
  if (std::abs(sk * scalar_value(u)) >= 1.0) {
    throw DomainError("arctan_k: argument outside (-1, 1)/sqrt(-kappa)");
  }
  using std::atanh;
  return atanh(S(sk) * u) / S(sk);
}

// Mobius gyrovector addition. The result is projected back into the domain
// to absorb floating-point overshoot near the boundary.
template <class S>
std::vector<S> mobius_add(std::span<const S> x, std::span<const S> y,
                          Curvature k) {
  if (k.flat()) return added(x, y);
  const double kap = k.kappa;
  const S xy = dot(x, y);
  const S x2 = squared_norm(x);
  const S y2 = squared_norm(y);
  const S ca = S(1.0) - S(2.0 * kap) * xy - S(kap) * y2;
  const S cb = S(1.0) + S(kap) * x2;
  const S den = S(1.0) - S(2.0 * kap) * xy + S(kap * kap) * x2 * y2;
  if (std::abs(scalar_value(den)) < kSingularTol) {
    throw SingularPairError("mobius_add: singular (antipodal) pair");
  }
  std::vector<S> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (ca * x[i] + cb * y[i]) / den;
  }
  return project_to_domain<S>(out, k);
}

template <class S>
bool coordinates_equal(std::span<const S> x, std::span<const S> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (scalar_value(x[i]) != scalar_value(y[i])) return false;
  }
  return true;
}

// Geodesic distance, 2 * arctan_k(|(-x) + y|). Reduces to 2 |x - y| in the
// flat limit (the factor-2 convention makes the limit continuous in kappa).
// Coincident points short-circuit to exactly zero.
template <class S>
S distance(std::span<const S> x, std::span<const S> y, Curvature k) {
  if (coordinates_equal(x, y)) return S(0.0);
  if (k.flat()) {
    const S n2 = squared_norm<S>(subtracted(x, y));
    if (scalar_value(n2) == 0.0) return S(0.0);
    using std::sqrt;
    return S(2.0) * sqrt(n2);
  }
  const std::vector<S> nx = negated(x);
  const std::vector<S> w = mobius_add<S>(nx, y, k);
  const S n2 = squared_norm<S>(w);
  if (scalar_value(n2) == 0.0) return S(0.0);
  using std::sqrt;
  return S(2.0) * arctan_k(sqrt(n2), k);
}

template <class S>
std::vector<S> exp_map(std::span<const S> x, std::span<const S> v,
                       Curvature k) {
  const S v2 = squared_norm(v);
  if (scalar_value(v2) == 0.0) return {x.begin(), x.end()};
  if (k.flat()) return added(x, v);
  using std::sqrt;
  const S vn = sqrt(v2);
  const S lam = conformal_factor(x, k);
  const S t = tan_k(lam * vn * S(0.5), k);
  const std::vector<S> dir = scaled(v, t / vn);
  return mobius_add<S>(x, dir, k);
}

template <class S>
std::vector<S> log_map(std::span<const S> x, std::span<const S> y,
                       Curvature k) {
  if (coordinates_equal(x, y)) return std::vector<S>(x.size(), S(0.0));
  if (k.flat()) return subtracted(y, x);
  const std::vector<S> nx = negated(x);
  const std::vector<S> w = mobius_add<S>(nx, y, k);
  const S w2 = squared_norm<S>(w);
  if (scalar_value(w2) == 0.0) return std::vector<S>(x.size(), S(0.0));
  using std::sqrt;
  const S wn = sqrt(w2);
  const S lam = conformal_factor(x, k);
  const S factor = S(2.0) / lam * arctan_k(wn, k) / wn;
  return scaled<S>(w, factor);
}

// -- double-precision conveniences over the strong types ---------------------

inline double conformal_factor(const ManifoldPoint& x, Curvature k) {
  return conformal_factor<double>(x.coords, k);
}

inline ManifoldPoint mobius_add(const ManifoldPoint& x, const ManifoldPoint& y,
                                Curvature k) {
  return {mobius_add<double>(x.coords, y.coords, k)};
}

inline double distance(const ManifoldPoint& x, const ManifoldPoint& y,
                       Curvature k) {
  return distance<double>(x.coords, y.coords, k);
}

inline ManifoldPoint exp_map(const TangentVector& v, Curvature k) {
  return {exp_map<double>(v.base, v.components, k)};
}

inline TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y,
                             Curvature k) {
  return {x.coords, log_map<double>(x.coords, y.coords, k)};
}

inline ManifoldPoint project_to_domain(const Vec& raw, Curvature k) {
  return {project_to_domain<double>(raw, k)};
}

}  // namespace geometry
}  // namespace curvgraph
