#pragma once

#include <functional>

namespace canon {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error bound
};

// Adaptive Gauss-Kronrod on a finite range.  rel_tol is relative to the
// accumulated integral (with an absolute floor for near-zero integrals).
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double rel_tol = 1e-12);

double integral(const std::function<double(double)>& f, double a, double b,
                double rel_tol = 1e-12);

}  // namespace canon
