#include "pbergman/confmap.hpp"

#include <algorithm>
#include <cmath>

#include "pbergman/error.hpp"

namespace pbergman {

namespace {

cplx principal_lift(cplx w) { return std::log(w) / (I * 2.0 * pi); }

class StripMap final : public AnnulusMap {
public:
  explicit StripMap(double h) : AnnulusMap(rectangle_cell(h)), rho_(std::exp(2.0 * pi * h)) {}

  double rho() const override { return rho_; }
  MapProvenance provenance() const override { return MapProvenance::builtin; }
  LiftPoint lift_point(cplx z) const override { return {z, 1.0}; }
  LiftPoint unlift_point(cplx t) const override { return {t, 1.0}; }

private:
  double rho_;
};

class RotatedMap final : public AnnulusMap {
public:
  RotatedMap(AnnulusMapPtr base, double alpha)
      : AnnulusMap(base->cell()), base_(std::move(base)), alpha_(alpha) {}

  double rho() const override { return base_->rho(); }
  MapProvenance provenance() const override { return base_->provenance(); }
  double rotation() const override { return base_->rotation() + alpha_; }
  LiftPoint lift_point(cplx z) const override {
    LiftPoint p = base_->lift_point(z);
    p.phi += alpha_ / (2.0 * pi);
    return p;
  }
  LiftPoint unlift_point(cplx t) const override {
    return base_->unlift_point(t - alpha_ / (2.0 * pi));
  }

private:
  AnnulusMapPtr base_;
  double alpha_;
};

}  // namespace

cplx AnnulusMap::forward(cplx w) const {
  if (w == cplx(0.0)) throw Error(ErrorKind::OutOfDomain, "phi is undefined at 0");
  return exp_map(lift_point(principal_lift(w)).phi);
}

cplx AnnulusMap::forward_derivative(cplx w) const {
  if (w == cplx(0.0)) throw Error(ErrorKind::OutOfDomain, "phi is undefined at 0");
  const LiftPoint p = lift_point(principal_lift(w));
  return p.dphi * exp_map(p.phi) / w;
}

cplx AnnulusMap::inverse(cplx zeta) const {
  if (zeta == cplx(0.0)) throw Error(ErrorKind::OutOfDomain, "psi is undefined at 0");
  return exp_map(unlift_point(principal_lift(zeta)).phi);
}

cplx AnnulusMap::inverse_derivative(cplx zeta) const {
  if (zeta == cplx(0.0)) throw Error(ErrorKind::OutOfDomain, "psi is undefined at 0");
  const LiftPoint p = unlift_point(principal_lift(zeta));
  return exp_map(p.phi) * p.dphi / zeta;
}

std::vector<cplx> AnnulusMap::gamma_curve(int samples) const {
  const double a = cell_.junction_low, b = cell_.junction_high;
  std::vector<cplx> out;
  out.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double y = a + (b - a) * (i + 0.5) / samples;
    out.push_back(forward(std::exp(-2.0 * pi * y)));
  }
  return out;
}

AnnulusMapPtr builtin_strip_map(double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "strip half-height must be positive");
  return std::make_shared<StripMap>(h);
}

AnnulusMapPtr rotated(AnnulusMapPtr base, double alpha) {
  return std::make_shared<RotatedMap>(std::move(base), alpha);
}

SectorReport check_sector_assumption(const AnnulusMap& map, double delta, int samples) {
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorKind::InvalidDelta, "delta must lie in (0, 1)");
  const auto gamma = map.gamma_curve(samples);
  SectorReport rep;
  rep.samples = samples;
  std::vector<double> args;
  double prev = std::arg(gamma.front());
  for (cplx g : gamma) {
    // continuity tracking along the curve
    double a = std::arg(g);
    a += 2.0 * pi * std::round((prev - a) / (2.0 * pi));
    args.push_back(a);
    prev = a;
  }
  double sum = 0.0;
  rep.min_arg = args.front();
  rep.max_arg = args.front();
  for (double a : args) {
    sum += a;
    rep.min_arg = std::min(rep.min_arg, a);
    rep.max_arg = std::max(rep.max_arg, a);
  }
  rep.mean_arg = sum / args.size();
  // Represent the curve with its mean argument in (-pi, pi].
  const double shift = 2.0 * pi * std::round(rep.mean_arg / (2.0 * pi));
  rep.mean_arg -= shift;
  rep.min_arg -= shift;
  rep.max_arg -= shift;
  rep.margin = std::min(rep.min_arg - delta, pi - delta - rep.max_arg);
  rep.ok = rep.margin > 0.0;
  rep.suggested_rotation = 0.5 * pi - rep.mean_arg;
  return rep;
}

LiftedMap::LiftedMap(AnnulusMapPtr map, double cut_angle)
    : map_(std::move(map)), cut_angle_(cut_angle) {}

LiftPoint LiftedMap::evaluate(cplx z) const {
  const double m = std::floor(z.real());
  const cplx w = exp_map(z);
  const cplx image = map_->forward(w);
  const cplx L = log_branch(image, tag_for(z));
  const cplx dphi = map_->forward_derivative(w) * w / image;
  return {L + m, dphi};
}

LiftedMap lift(AnnulusMapPtr map, double delta) {
  const SectorReport rep = check_sector_assumption(*map, delta);
  // After rotating by the suggested angle the curve is centred on pi/2.
  const double spread = std::max(rep.max_arg - rep.mean_arg, rep.mean_arg - rep.min_arg);
  const double rotated_margin = 0.5 * pi - spread - delta;
  if (!(rotated_margin > 0.0))
    throw Error(ErrorKind::SectorAssumptionFailed,
                "image of the junction spans too wide an argument range");
  return LiftedMap(std::move(map), rep.mean_arg);
}

cplx WeightEvaluators::v(cplx zeta) const {
  return map_->inverse_derivative(zeta) / (2.0 * pi * map_->inverse(zeta));
}

double WeightEvaluators::V(cplx zeta) const {
  const cplx d = map_->inverse_derivative(zeta);
  const cplx p = map_->inverse(zeta);
  return std::norm(d) / (4.0 * pi * pi * std::norm(p));
}

WeightEvaluators weight_evaluators(AnnulusMapPtr map) { return WeightEvaluators(std::move(map)); }

}  // namespace pbergman
