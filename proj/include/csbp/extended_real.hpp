#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace csbp {

/// Non-negative extended real with an explicit infinite marker.
/// Infinity here is a structural statement ("this integral diverges"),
/// never the result of floating-point overflow.
class ExtReal {
 public:
  ExtReal() : value_(0.0), infinite_(false) {}
  explicit ExtReal(double v) : value_(v), infinite_(false) {
    if (!std::isfinite(v)) throw std::invalid_argument("ExtReal: finite constructor got non-finite value");
  }
  static ExtReal infinity() {
    ExtReal e;
    e.infinite_ = true;
    return e;
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }

  /// Finite value; throws if infinite.
  double value() const {
    if (infinite_) throw std::domain_error("ExtReal: value() on infinite");
    return value_;
  }
  /// Finite value, or +inf double for the infinite marker (for printing/comparisons).
  double as_double() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ && b.infinite_;
    return a.value_ == b.value_;
  }
  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend std::ostream& operator<<(std::ostream& os, const ExtReal& e) {
    if (e.infinite_) return os << "inf";
    return os << e.value_;
  }

 private:
  double value_;
  bool infinite_;
};

}  // namespace csbp
