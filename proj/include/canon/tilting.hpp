#pragma once

#include <functional>
#include <string>

#include "canon/distribution.hpp"
#include "canon/errors.hpp"
#include "canon/interval.hpp"

namespace canon {

enum class TiltRoute { BathSlope, RateFunction, MaxEntropy, User };
const char* to_string(TiltRoute r);
TiltRoute tilt_route_from_string(const std::string& s);

// A scalar canonical exponent.  The weight convention is always e^{-lambda x}
// with lambda > 0 meaning positive temperature; lambda already includes the
// scale multiplier, which is recorded separately for provenance.
struct TiltParam {
  double lambda = 0.0;
  TiltRoute provenance = TiltRoute::User;
  Interval window{0.0, 1.0};
  double scale = 1.0;
  std::string note;

  std::string to_json() const;
  static TiltParam from_json(const std::string& text);
};

// x-dependent exponent zeta(x) with a uniform bound.
struct TiltField {
  std::function<double(double)> zeta;
  double bound = 0.0;
};

// Multiplicative interaction corrections G (smooth scale) and R (large
// deviation scale) with their log-derivatives at zero coupling.
struct InteractionModel {
  std::function<double(double, const Interval&)> G;
  std::function<double(double, const Interval&)> R;
  double dlogG0 = 0.0;
  double dlogR0 = 0.0;
};

enum class CorrectionMode { Smooth, Ldp };

// Law proportional to density(x) e^{-lambda x}.  The result is a full
// distribution object; closed-form family results back cdf and sampling when
// the family is closed under tilting.
ContPtr tilt(const ContPtr& base, double lambda);
DiscPtr tilt(const DiscPtr& base, double lambda);
ContPtr tilt(const ContPtr& base, const TiltParam& p);
DiscPtr tilt(const DiscPtr& base, const TiltParam& p);

// Law proportional to density(x) e^{-zeta(x) x}.
ContPtr tilt_field(const ContPtr& base, const TiltField& f);
DiscPtr tilt_field(const DiscPtr& base, const TiltField& f);

// Normalizer A such that A * integral f(x) e^{-zeta(x) x} dx = 1.  Fails on
// distributions not produced by tilt/tilt_field.
double tilt_normalizer(const ContinuousDist& d);
double tilt_normalizer(const DiscreteDist& d);

// lambda = scale * d/dy log P(bath in [y, y+delta]) at y = I.h.
TiltParam bath_slope_param(const ContinuousDist& bath, const Interval& I,
                           double scale = 1.0);

// Interaction-corrected parameter: lambda - dlogG0 (smooth) or
// lambda - dlogR0 (large deviation).
TiltParam corrected_param(const TiltParam& base, const InteractionModel& m,
                          CorrectionMode mode);

// Law of X - support_lower, moving the support onto the nonnegative axis.
ContPtr shift_transform(const ContPtr& d);
// Law of -X for laws bounded above; tilting the reflection by lambda equals
// tilting the original by -lambda.
ContPtr reflect_transform(const ContPtr& d);

}  // namespace canon
