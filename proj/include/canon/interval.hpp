#pragma once

#include <cmath>
#include <string>

#include "canon/errors.hpp"

namespace canon {

// Closed window [h, h + delta].  Closed endpoints matter only for lattice
// laws; we use the closed convention everywhere.
struct Interval {
  double h = 0.0;
  double delta = 1.0;

  Interval() = default;
  Interval(double h_, double delta_) : h(h_), delta(delta_) {
    // delta = 0 is a point window, legal for conditioning on lattice laws
    if (!(delta >= 0.0) || !std::isfinite(h) || !std::isfinite(delta))
      fail(ErrorKind::BadConfig, "interval requires finite h and delta >= 0");
  }

  double left() const { return h; }
  double right() const { return h + delta; }

  // The set I - x, same width.
  Interval shift(double x) const { return Interval(h - x, delta); }

  bool contains(double x) const { return x >= left() && x <= right(); }

  std::string describe() const {
    return "[" + std::to_string(h) + ", " + std::to_string(h + delta) + "]";
  }
};

}  // namespace canon
