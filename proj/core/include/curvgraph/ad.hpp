#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace curvgraph::ad {

// Reverse-mode autodiff on a flat tape. Every operation stores its local
// partial derivatives at forward time, so the backward pass is a single
// reverse sweep with no re-evaluation. Constants never touch the tape:
// subexpressions built purely from constants cost nothing and carry no
// gradient, which doubles as the semantics of value clamping.
//
// Usage:
//   Tape tape;
//   auto scope = tape.activate();
//   Var x = tape.leaf(0.3);
//   Var y = sin(x) * x;
//   auto adj = tape.gradient(y);        // adj[x.index()] == dy/dx
//
// Tapes are single-threaded; each worker owns its own tape.

class Tape;

class Var {
 public:
  static constexpr std::uint32_t kConst = 0xffffffffu;

  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT: implicit by design

  double value() const { return value_; }
  std::uint32_t index() const { return index_; }
  bool is_const() const { return index_ == kConst; }

 private:
  friend class Tape;
  Var(double value, std::uint32_t index) : value_(value), index_(index) {}

  double value_ = 0.0;
  std::uint32_t index_ = kConst;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(double value) {
    nodes_.push_back(Node{kConstParent, kConstParent, 0.0, 0.0});
    return Var(value, static_cast<std::uint32_t>(nodes_.size() - 1));
  }

  std::size_t size() const { return nodes_.size(); }

  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  // Adjoint of every tape node with respect to `output`. Index the result
  // with Var::index(). A constant output yields all-zero adjoints.
  std::vector<double> gradient(const Var& output) const {
    std::vector<double> adjoint(nodes_.size(), 0.0);
    if (output.is_const()) return adjoint;
    adjoint[output.index()] = 1.0;
    for (std::uint32_t i = output.index() + 1; i-- > 0;) {
      const double a = adjoint[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.p0 != kConstParent) adjoint[n.p0] += n.w0 * a;
      if (n.p1 != kConstParent) adjoint[n.p1] += n.w1 * a;
    }
    return adjoint;
  }

  class Scope {
   public:
    explicit Scope(Tape* tape) : previous_(current_) { current_ = tape; }
    ~Scope() { current_ = previous_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

  [[nodiscard]] Scope activate() { return Scope(this); }

  static Tape* current() {
    if (current_ == nullptr) throw std::logic_error("ad: no active tape");
    return current_;
  }

  static Var record_unary(const Var& a, double value, double da) {
    if (a.is_const()) return Var(value);
    Tape* t = current();
    t->nodes_.push_back(Node{a.index(), kConstParent, da, 0.0});
    return Var(value, static_cast<std::uint32_t>(t->nodes_.size() - 1));
  }

  static Var record_binary(const Var& a, const Var& b, double value, double da,
                           double db) {
    if (a.is_const() && b.is_const()) return Var(value);
    Tape* t = current();
    t->nodes_.push_back(Node{a.is_const() ? kConstParent : a.index(),
                             b.is_const() ? kConstParent : b.index(),
                             a.is_const() ? 0.0 : da, b.is_const() ? 0.0 : db});
    return Var(value, static_cast<std::uint32_t>(t->nodes_.size() - 1));
  }

 private:
  struct Node {
    std::uint32_t p0, p1;
    double w0, w1;
  };
  static constexpr std::uint32_t kConstParent = 0xffffffffu;

  std::vector<Node> nodes_;
  inline static thread_local Tape* current_ = nullptr;
};

inline Var operator+(const Var& a, const Var& b) {
  return Tape::record_binary(a, b, a.value() + b.value(), 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return Tape::record_binary(a, b, a.value() - b.value(), 1.0, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return Tape::record_binary(a, b, a.value() * b.value(), b.value(), a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.value();
  return Tape::record_binary(a, b, a.value() * inv, inv,
                             -a.value() * inv * inv);
}
inline Var operator-(const Var& a) {
  return Tape::record_unary(a, -a.value(), -1.0);
}
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  return Tape::record_unary(a, s, 0.5 / s);
}
inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return Tape::record_unary(a, e, e);
}
inline Var log(const Var& a) {
  return Tape::record_unary(a, std::log(a.value()), 1.0 / a.value());
}
inline Var sin(const Var& a) {
  return Tape::record_unary(a, std::sin(a.value()), std::cos(a.value()));
}
inline Var cos(const Var& a) {
  return Tape::record_unary(a, std::cos(a.value()), -std::sin(a.value()));
}
inline Var tan(const Var& a) {
  const double t = std::tan(a.value());
  return Tape::record_unary(a, t, 1.0 + t * t);
}
inline Var atan(const Var& a) {
  return Tape::record_unary(a, std::atan(a.value()),
                            1.0 / (1.0 + a.value() * a.value()));
}
inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return Tape::record_unary(a, t, 1.0 - t * t);
}
inline Var atanh(const Var& a) {
  return Tape::record_unary(a, std::atanh(a.value()),
                            1.0 / (1.0 - a.value() * a.value()));
}
inline Var sinh(const Var& a) {
  return Tape::record_unary(a, std::sinh(a.value()), std::cosh(a.value()));
}
inline Var abs(const Var& a) {
  const double sign = a.value() > 0.0 ? 1.0 : (a.value() < 0.0 ? -1.0 : 0.0);
  return Tape::record_unary(a, std::abs(a.value()), sign);
}
inline Var pow(const Var& a, double p) {
  return Tape::record_unary(a, std::pow(a.value(), p),
                            p * std::pow(a.value(), p - 1.0));
}

// Saturating clamp: outside [lo, hi] the result is a constant, so gradients
// vanish there exactly like the double-precision std::clamp would suggest.
inline Var clamp(const Var& a, double lo, double hi) {
  if (a.value() < lo) return Var(lo);
  if (a.value() > hi) return Var(hi);
  return a;
}

}  // namespace curvgraph::ad
