#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "curvgraph/ad.hpp"

using curvgraph::ad::Tape;
using curvgraph::ad::Var;

namespace {

// Central-difference oracle for a scalar function of one coordinate.
double fd(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double ad_derivative(const std::function<Var(Var)>& f, double x) {
  Tape tape;
  auto scope = tape.activate();
  Var v = tape.leaf(x);
  Var y = f(v);
  return tape.gradient(y)[v.index()];
}

}  // namespace

TEST_CASE("elementary derivatives match finite differences") {
  struct Case {
    std::function<Var(Var)> f;
    std::function<double(double)> g;
    double at;
  };
  const std::vector<Case> cases = {
      {[](Var x) { return x * x * x; }, [](double x) { return x * x * x; }, 0.7},
      {[](Var x) { return curvgraph::ad::sqrt(x); },
       [](double x) { return std::sqrt(x); }, 2.3},
      {[](Var x) { return curvgraph::ad::exp(x); },
       [](double x) { return std::exp(x); }, -0.4},
      {[](Var x) { return curvgraph::ad::log(x); },
       [](double x) { return std::log(x); }, 1.9},
      {[](Var x) { return curvgraph::ad::tanh(x); },
       [](double x) { return std::tanh(x); }, 0.3},
      {[](Var x) { return curvgraph::ad::atanh(x); },
       [](double x) { return std::atanh(x); }, 0.5},
      {[](Var x) { return curvgraph::ad::tan(x); },
       [](double x) { return std::tan(x); }, 0.4},
      {[](Var x) { return curvgraph::ad::atan(x); },
       [](double x) { return std::atan(x); }, 1.1},
      {[](Var x) { return curvgraph::ad::sin(x) * curvgraph::ad::cos(x); },
       [](double x) { return std::sin(x) * std::cos(x); }, 0.9},
      {[](Var x) { return curvgraph::ad::sinh(x); },
       [](double x) { return std::sinh(x); }, 0.6},
      {[](Var x) { return Var(3.0) / (x + Var(1.0)) - x * Var(2.0); },
       [](double x) { return 3.0 / (x + 1.0) - 2.0 * x; }, 0.25},
      {[](Var x) { return curvgraph::ad::pow(x, 3.5); },
       [](double x) { return std::pow(x, 3.5); }, 1.4},
      {[](Var x) { return curvgraph::ad::abs(x); },
       [](double x) { return std::abs(x); }, -0.8},
  };
  for (const auto& c : cases) {
    const double a = ad_derivative(c.f, c.at);
    const double n = fd(c.g, c.at);
    CHECK(a == doctest::Approx(n).epsilon(1e-6));
  }
}

TEST_CASE("constants stay off the tape and contribute zero gradient") {
  Tape tape;
  auto scope = tape.activate();
  const std::size_t before = tape.size();
  Var c = Var(2.0) * Var(3.0) + Var(1.0);
  CHECK(c.is_const());
  CHECK(c.value() == 7.0);
  CHECK(tape.size() == before);

  Var x = tape.leaf(4.0);
  Var y = x * c;
  auto adj = tape.gradient(y);
  CHECK(adj[x.index()] == doctest::Approx(7.0));
}

TEST_CASE("clamp saturates to a constant outside the interval") {
  Tape tape;
  auto scope = tape.activate();
  Var x = tape.leaf(2.0);
  Var inside = curvgraph::ad::clamp(x, 0.0, 3.0);
  Var outside = curvgraph::ad::clamp(x, 0.0, 1.5);
  CHECK_FALSE(inside.is_const());
  CHECK(outside.is_const());
  CHECK(outside.value() == 1.5);

  Var y = inside * Var(2.0) + outside;
  auto adj = tape.gradient(y);
  CHECK(adj[x.index()] == doctest::Approx(2.0));
}

TEST_CASE("shared subexpressions accumulate adjoints") {
  Tape tape;
  auto scope = tape.activate();
  Var x = tape.leaf(0.5);
  Var s = curvgraph::ad::sin(x);
  Var y = s * s + s;  // dy/dx = (2 sin x + 1) cos x
  auto adj = tape.gradient(y);
  const double expected = (2.0 * std::sin(0.5) + 1.0) * std::cos(0.5);
  CHECK(adj[x.index()] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("multi-variable gradient") {
  Tape tape;
  auto scope = tape.activate();
  Var x = tape.leaf(1.2);
  Var y = tape.leaf(-0.7);
  Var f = curvgraph::ad::exp(x * y) + x / y;
  auto adj = tape.gradient(f);
  const double e = std::exp(1.2 * -0.7);
  CHECK(adj[x.index()] == doctest::Approx(-0.7 * e + 1.0 / -0.7));
  CHECK(adj[y.index()] == doctest::Approx(1.2 * e - 1.2 / (0.7 * 0.7)));
}

TEST_CASE("tape clear allows reuse") {
  Tape tape;
  auto scope = tape.activate();
  Var x = tape.leaf(2.0);
  (void)(x * x);
  tape.clear();
  Var z = tape.leaf(3.0);
  Var w = z * z;
  auto adj = tape.gradient(w);
  CHECK(adj[z.index()] == doctest::Approx(6.0));
}
