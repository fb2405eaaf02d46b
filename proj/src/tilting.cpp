#include "canon/tilting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "canon/quadrature.hpp"

namespace canon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kTailLog = -std::log(1e-16);

// Shared machinery for constant-lambda and field tilts of continuous laws.
class TiltedContDist final : public ContinuousDist {
 public:
  TiltedContDist(ContPtr base, double lambda)
      : base_(std::move(base)), constant_(true), lambda_(lambda) {
    check_base();
    auto [dlo, dhi] = base_->mgf_domain();
    if (!(-lambda_ > dlo) || !(-lambda_ < dhi))
      fail(ErrorKind::DivergentNormalizer,
           "tilt exponent " + std::to_string(lambda_) +
               " outside the MGF domain (" + std::to_string(dlo) + ", " +
               std::to_string(dhi) + ") of " + base_->describe());
    log_norm_ = base_->log_mgf(-lambda_);
    delegate_ = base_->tilted_family(lambda_);
    if (delegate_) {
      lo_ = delegate_->trunc_lower();
      hi_ = delegate_->trunc_upper();
    } else {
      set_range();
      build_cdf();
    }
  }

  TiltedContDist(ContPtr base, TiltField field)
      : base_(std::move(base)),
        constant_(false),
        field_(std::move(field)) {
    check_base();
    if (!field_.zeta) fail(ErrorKind::BadConfig, "tilt field has no exponent");
    if (!base_->has_density())
      fail(ErrorKind::BadConfig, "tilt field needs a density");
    // Tail-lightness guard: a bounded field behaves at worst like the
    // constant exponents 0 and bound on the two tails.
    auto [dlo, dhi] = base_->mgf_domain();
    double worst = std::max(0.0, field_.bound);
    if (!(worst > dlo) || !(0.0 < dhi))
      fail(ErrorKind::DivergentNormalizer,
           "field bound " + std::to_string(field_.bound) +
               " outside the MGF domain of " + base_->describe());
    set_range();
    double shift = scan_peak(lo_, hi_);
    if (!std::isfinite(shift))
      fail(ErrorKind::DivergentNormalizer,
           "tilted integrand vanishes for " + base_->describe());
    double z = integrate([&](double x) { return raw(x, shift); }, lo_, hi_)
                   .value;
    if (!(z > 0.0) || !std::isfinite(z))
      fail(ErrorKind::DivergentNormalizer,
           "tilt normalizer integral failed for " + base_->describe());
    log_norm_ = std::log(z) + shift;
    build_cdf();
  }

  double exponent(double x) const {
    return constant_ ? lambda_ * x : field_.zeta(x) * x;
  }

  double density(double x) const override {
    double f = base_->density(x);
    if (f <= 0.0) return f == 0.0 ? 0.0 : f;  // keep +inf endpoints
    if (!std::isfinite(f)) return f;
    return std::exp(std::log(f) - exponent(x) - log_norm_);
  }
  bool has_density() const override { return base_->has_density(); }
  double cdf(double x) const override {
    if (delegate_) return delegate_->cdf(x);
    if (x <= cum_x_.front()) return 0.0;
    if (x >= cum_x_.back()) return 1.0;
    auto it = std::upper_bound(cum_x_.begin(), cum_x_.end(), x);
    std::size_t i = it - cum_x_.begin() - 1;
    double t = (x - cum_x_[i]) / (cum_x_[i + 1] - cum_x_[i]);
    return std::clamp(cum_f_[i] + t * (cum_f_[i + 1] - cum_f_[i]), 0.0, 1.0);
  }
  double support_lower() const override { return base_->support_lower(); }
  double support_upper() const override { return base_->support_upper(); }
  double trunc_lower() const override { return lo_; }
  double trunc_upper() const override { return hi_; }
  double moment(int k) const override {
    if (delegate_) return delegate_->moment(k);
    return ContinuousDist::moment(k);
  }
  double sample(RngStream& rng) const override {
    if (delegate_) return delegate_->sample(rng);
    return ContinuousDist::sample(rng);
  }
  double log_mgf(double t) const override {
    if (constant_) return base_->log_mgf(t - lambda_) - log_norm_;
    return ContinuousDist::log_mgf(t);
  }
  double tilted_mean(double t) const override {
    if (constant_) return base_->tilted_mean(t - lambda_);
    return ContinuousDist::tilted_mean(t);
  }
  double tilted_variance(double t) const override {
    if (constant_) return base_->tilted_variance(t - lambda_);
    return ContinuousDist::tilted_variance(t);
  }
  std::pair<double, double> mgf_domain() const override {
    if (constant_) {
      auto [lo, hi] = base_->mgf_domain();
      return {lo + lambda_, hi + lambda_};
    }
    return ContinuousDist::mgf_domain();
  }
  ContPtr tilted_family(double lam) const override {
    if (!constant_) return nullptr;
    return base_->tilted_family(lambda_ + lam);
  }
  double normalizer() const { return std::exp(-log_norm_); }
  const ContPtr& base() const { return base_; }
  std::string family() const override { return "tilted"; }
  std::string describe() const override {
    if (constant_)
      return "tilted(lambda=" + std::to_string(lambda_) + ", base=" +
             base_->describe() + ")";
    return "tilted(field bound=" + std::to_string(field_.bound) + ", base=" +
           base_->describe() + ")";
  }

 private:
  void check_base() const {
    if (!base_) fail(ErrorKind::BadConfig, "tilt base is null");
  }
  double raw(double x, double shift) const {
    double f = base_->density(x);
    if (f <= 0.0 || !std::isfinite(f)) return 0.0;
    return std::exp(std::log(f) - exponent(x) - shift);
  }
  double logdens_unnorm(double x) const {
    double f = base_->density(x);
    if (f <= 0.0 || !std::isfinite(f)) return -kInf;
    return std::log(f) - exponent(x);
  }
  double scan_peak(double a, double b) const {
    double top = -kInf;
    for (int i = 0; i <= 512; ++i)
      top = std::max(top, logdens_unnorm(a + (b - a) * i / 512.0));
    return top;
  }
  void set_range() {
    lo_ = base_->trunc_lower();
    hi_ = base_->trunc_upper();
    double peak = scan_peak(lo_, hi_);
    if (!std::isfinite(peak)) return;
    double thresh = peak - kTailLog - 4.0;
    double step = std::max(1.0, (hi_ - lo_) / 8.0);
    for (int j = 0; j < 200 && lo_ > base_->support_lower(); ++j) {
      if (logdens_unnorm(lo_) <= thresh) break;
      lo_ = std::max(lo_ - step, std::nextafter(base_->support_lower(), 0.0));
      if (!std::isfinite(base_->support_lower()) || lo_ > base_->support_lower())
        step *= 2.0;
      else
        break;
    }
    for (int j = 0; j < 200 && hi_ < base_->support_upper(); ++j) {
      if (logdens_unnorm(hi_) <= thresh) break;
      hi_ = std::min(hi_ + step, std::nextafter(base_->support_upper(), 0.0));
      if (!std::isfinite(base_->support_upper()) || hi_ < base_->support_upper())
        step *= 2.0;
      else
        break;
    }
  }
  void build_cdf() {
    const std::size_t kPts = 4097;
    cum_x_.resize(kPts);
    cum_f_.assign(kPts, 0.0);
    double h = (hi_ - lo_) / (kPts - 1);
    for (std::size_t i = 0; i < kPts; ++i) cum_x_[i] = lo_ + h * i;
    double shift = log_norm_;
    double prev = raw(cum_x_[0], shift);
    for (std::size_t i = 1; i < kPts; ++i) {
      double mid = raw(0.5 * (cum_x_[i - 1] + cum_x_[i]), shift);
      double cur = raw(cum_x_[i], shift);
      cum_f_[i] = cum_f_[i - 1] + h / 6.0 * (prev + 4.0 * mid + cur);
      prev = cur;
    }
    double total = cum_f_.back();
    if (total > 0.0)
      for (auto& v : cum_f_) v /= total;
  }

  ContPtr base_;
  bool constant_;
  double lambda_ = 0.0;
  TiltField field_;
  double log_norm_ = 0.0;
  ContPtr delegate_;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> cum_x_, cum_f_;
};

class TiltedDiscDist final : public DiscreteDist {
 public:
  TiltedDiscDist(DiscPtr base, double lambda)
      : base_(std::move(base)), constant_(true), lambda_(lambda) {
    if (!base_) fail(ErrorKind::BadConfig, "tilt base is null");
    log_norm_ = base_->log_mgf(-lambda_);
    if (!std::isfinite(log_norm_))
      fail(ErrorKind::DivergentNormalizer,
           "tilt normalizer diverges for " + base_->describe());
    delegate_ = base_->tilted_family(lambda_);
    if (!delegate_) build_cum();
  }
  TiltedDiscDist(DiscPtr base, TiltField field)
      : base_(std::move(base)), constant_(false), field_(std::move(field)) {
    if (!base_) fail(ErrorKind::BadConfig, "tilt base is null");
    if (!field_.zeta) fail(ErrorKind::BadConfig, "tilt field has no exponent");
    double top = -kInf;
    for (std::int64_t k = base_->kmin(); k <= base_->kmax(); ++k) {
      double p = base_->pmf(k);
      if (p > 0.0) top = std::max(top, std::log(p) - exponent(k));
    }
    if (!std::isfinite(top))
      fail(ErrorKind::DivergentNormalizer,
           "tilted pmf vanishes for " + base_->describe());
    double acc = 0.0;
    for (std::int64_t k = base_->kmin(); k <= base_->kmax(); ++k) {
      double p = base_->pmf(k);
      if (p > 0.0) acc += std::exp(std::log(p) - exponent(k) - top);
    }
    log_norm_ = std::log(acc) + top;
    build_cum();
  }

  double exponent(std::int64_t k) const {
    double x = base_->position(k);
    return constant_ ? lambda_ * x : field_.zeta(x) * x;
  }
  double pmf(std::int64_t k) const override {
    double p = base_->pmf(k);
    if (p <= 0.0) return 0.0;
    return std::exp(std::log(p) - exponent(k) - log_norm_);
  }
  double cdf_index(std::int64_t k) const override {
    if (delegate_) return delegate_->cdf_index(k);
    if (k < kmin()) return 0.0;
    std::size_t i = std::min<std::int64_t>(k - kmin(), cum_.size() - 1);
    return cum_[i];
  }
  std::int64_t kmin() const override { return base_->kmin(); }
  std::int64_t kmax() const override { return base_->kmax(); }
  bool lattice() const override { return base_->lattice(); }
  double origin() const override { return base_->origin(); }
  double spacing() const override { return base_->spacing(); }
  double position(std::int64_t k) const override { return base_->position(k); }
  std::int64_t sample_index(RngStream& rng) const override {
    if (delegate_) return delegate_->sample_index(rng);
    double u = rng.uniform();
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    return it == cum_.end() ? kmax() : kmin() + (it - cum_.begin());
  }
  double log_mgf(double t) const override {
    if (constant_) return base_->log_mgf(t - lambda_) - log_norm_;
    return DiscreteDist::log_mgf(t);
  }
  double tilted_mean(double t) const override {
    if (constant_) return base_->tilted_mean(t - lambda_);
    return DiscreteDist::tilted_mean(t);
  }
  double tilted_variance(double t) const override {
    if (constant_) return base_->tilted_variance(t - lambda_);
    return DiscreteDist::tilted_variance(t);
  }
  DiscPtr tilted_family(double lam) const override {
    if (!constant_) return nullptr;
    return base_->tilted_family(lambda_ + lam);
  }
  double normalizer() const { return std::exp(-log_norm_); }
  const DiscPtr& base() const { return base_; }
  std::string family() const override { return "tilted"; }
  std::string describe() const override {
    if (constant_)
      return "tilted(lambda=" + std::to_string(lambda_) + ", base=" +
             base_->describe() + ")";
    return "tilted(field bound=" + std::to_string(field_.bound) + ", base=" +
           base_->describe() + ")";
  }

 private:
  void build_cum() {
    cum_.resize(std::size_t(base_->kmax() - base_->kmin() + 1));
    double acc = 0.0;
    for (std::int64_t k = base_->kmin(); k <= base_->kmax(); ++k) {
      acc += pmf(k);
      cum_[std::size_t(k - base_->kmin())] = std::min(acc, 1.0);
    }
  }

  DiscPtr base_;
  bool constant_;
  double lambda_ = 0.0;
  TiltField field_;
  double log_norm_ = 0.0;
  DiscPtr delegate_;
  std::vector<double> cum_;
};

}  // namespace

const char* to_string(TiltRoute r) {
  switch (r) {
    case TiltRoute::BathSlope: return "bath-slope";
    case TiltRoute::RateFunction: return "rate-function";
    case TiltRoute::MaxEntropy: return "max-entropy";
    case TiltRoute::User: return "user";
  }
  return "user";
}

TiltRoute tilt_route_from_string(const std::string& s) {
  if (s == "bath-slope") return TiltRoute::BathSlope;
  if (s == "rate-function") return TiltRoute::RateFunction;
  if (s == "max-entropy") return TiltRoute::MaxEntropy;
  if (s == "user") return TiltRoute::User;
  fail(ErrorKind::BadConfig, "unknown tilt provenance: " + s);
}

std::string TiltParam::to_json() const {
  nlohmann::json j;
  j["lambda"] = lambda;
  j["note"] = note;
  j["provenance"] = to_string(provenance);
  j["scale"] = scale;
  j["window"] = {{"delta", window.delta}, {"h", window.h}};
  return j.dump(2);
}

TiltParam TiltParam::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::BadConfig, "malformed tilt JSON");
  for (auto& [key, value] : j.items()) {
    (void)value;
    if (key != "lambda" && key != "note" && key != "provenance" &&
        key != "scale" && key != "window")
      fail(ErrorKind::BadConfig, "unknown tilt key: " + key);
  }
  TiltParam p;
  p.lambda = j.at("lambda").get<double>();
  p.provenance = tilt_route_from_string(j.at("provenance").get<std::string>());
  p.scale = j.value("scale", 1.0);
  p.note = j.value("note", std::string());
  if (j.contains("window"))
    p.window =
        Interval(j["window"].at("h").get<double>(),
                 j["window"].at("delta").get<double>());
  return p;
}

ContPtr tilt(const ContPtr& base, double lambda) {
  return std::make_shared<TiltedContDist>(base, lambda);
}

DiscPtr tilt(const DiscPtr& base, double lambda) {
  return std::make_shared<TiltedDiscDist>(base, lambda);
}

ContPtr tilt(const ContPtr& base, const TiltParam& p) {
  return tilt(base, p.lambda);
}

DiscPtr tilt(const DiscPtr& base, const TiltParam& p) {
  return tilt(base, p.lambda);
}

ContPtr tilt_field(const ContPtr& base, const TiltField& f) {
  return std::make_shared<TiltedContDist>(base, f);
}

DiscPtr tilt_field(const DiscPtr& base, const TiltField& f) {
  return std::make_shared<TiltedDiscDist>(base, f);
}

double tilt_normalizer(const ContinuousDist& d) {
  auto* t = dynamic_cast<const TiltedContDist*>(&d);
  if (!t) fail(ErrorKind::BadConfig, "not a tilted law: " + d.describe());
  return t->normalizer();
}

double tilt_normalizer(const DiscreteDist& d) {
  auto* t = dynamic_cast<const TiltedDiscDist*>(&d);
  if (!t) fail(ErrorKind::BadConfig, "not a tilted law: " + d.describe());
  return t->normalizer();
}

TiltParam bath_slope_param(const ContinuousDist& bath, const Interval& I,
                           double scale) {
  TiltParam p;
  p.lambda = scale * log_interval_prob_slope(bath, I);
  p.provenance = TiltRoute::BathSlope;
  p.window = I;
  p.scale = scale;
  return p;
}

TiltParam corrected_param(const TiltParam& base, const InteractionModel& m,
                          CorrectionMode mode) {
  TiltParam out = base;
  if (mode == CorrectionMode::Smooth) {
    out.lambda = base.lambda - m.dlogG0;
    out.note = base.note.empty() ? "corrected(smooth)"
                                 : base.note + "; corrected(smooth)";
  } else {
    out.lambda = base.lambda - m.dlogR0;
    out.note = base.note.empty() ? "corrected(ldp)"
                                 : base.note + "; corrected(ldp)";
  }
  return out;
}

ContPtr shift_transform(const ContPtr& d) {
  if (!d) fail(ErrorKind::BadConfig, "shift base is null");
  double c = d->support_lower();
  if (!std::isfinite(c))
    fail(ErrorKind::UnboundedBelow,
         "no finite lower bound for " + d->describe());
  if (c == 0.0) return d;
  return affine_of(d, 1.0, -c);
}

ContPtr reflect_transform(const ContPtr& d) {
  if (!d) fail(ErrorKind::BadConfig, "reflect base is null");
  double u = d->support_upper();
  if (!std::isfinite(u))
    fail(ErrorKind::UnboundedAbove,
         "no finite upper bound for " + d->describe());
  return affine_of(d, -1.0, 0.0);
}

}  // namespace canon
