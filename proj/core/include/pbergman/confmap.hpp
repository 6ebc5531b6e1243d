#pragma once

// Conformal maps from the exponential image D of a period cell onto the
// annulus A = {1/rho < |w| < rho}, their lifts to the strip, and the weight
// functions that transport inner products between D, A and the cell.

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pbergman/cellgeom.hpp"
#include "pbergman/numerics.hpp"

namespace pbergman {

/// Value and derivative of a lifted map at one point.
struct LiftPoint {
  cplx phi;
  cplx dphi;
};

enum class MapProvenance { builtin, sc_solved };

/// Conformal pair phi: D -> A, psi = phi^{-1}. Implementations provide the
/// lift phi_L: Pi -> S (S the strip |Im t| < log(rho)/(2 pi)) and its inverse;
/// the annulus-level evaluators are derived from them through E.
class AnnulusMap {
public:
  explicit AnnulusMap(PeriodicCellSpec cell) : cell_(std::move(cell)) {}
  virtual ~AnnulusMap() = default;

  virtual double rho() const = 0;
  virtual MapProvenance provenance() const = 0;
  /// Lifted map and derivative at z in Pi (any period).
  virtual LiftPoint lift_point(cplx z) const = 0;
  /// Inverse of the lift: strip point t -> Pi, with d/dt.
  virtual LiftPoint unlift_point(cplx t) const = 0;
  /// Rotation applied on top of the underlying map (radians).
  virtual double rotation() const { return 0.0; }

  double log_rho() const { return std::log(rho()); }
  /// Half-width log(rho) / (2 pi) of the image strip.
  double strip_half_width() const { return log_rho() / (2.0 * pi); }
  const PeriodicCellSpec& cell() const noexcept { return cell_; }

  cplx forward(cplx w) const;             ///< phi(w), w in D
  cplx forward_derivative(cplx w) const;  ///< phi'(w)
  cplx inverse(cplx zeta) const;          ///< psi(zeta), zeta in A
  cplx inverse_derivative(cplx zeta) const;

  /// Samples of Gamma = phi(D intersected with the positive axis), i.e. the
  /// image of the junction segment, ordered from y = a to y = b.
  std::vector<cplx> gamma_curve(int samples = 65) const;

private:
  PeriodicCellSpec cell_;
};

using AnnulusMapPtr = std::shared_ptr<const AnnulusMap>;

/// Identity map of the rectangle cell (0,1) x (-h, h): D is already the
/// annulus of modulus rho = exp(2 pi h).
AnnulusMapPtr builtin_strip_map(double h);

/// phi composed with the rotation w -> exp(i alpha) w.
AnnulusMapPtr rotated(AnnulusMapPtr base, double alpha);

struct SectorReport {
  bool ok = false;
  double margin = 0.0;  ///< min distance of sampled arguments to the sector edges
  double min_arg = 0.0, max_arg = 0.0, mean_arg = 0.0;
  double suggested_rotation = 0.0;  ///< rotation recentering Gamma on arg = pi/2
  int samples = 0;
};

/// Checks that the sampled arguments of Gamma lie in (delta, pi - delta).
/// Throws InvalidDelta unless 0 < delta < 1.
SectorReport check_sector_assumption(const AnnulusMap& map, double delta, int samples = 65);

/// phi_L(z) = (i 2 pi)^{-1} log phi(E(z)) + [Re z], with the logarithm taken in
/// the argument window of the half cell containing z. The window is centred
/// on the mean argument of Gamma, which plays the role of the rotation that
/// moves Gamma into the upper half plane.
class LiftedMap {
public:
  LiftedMap(AnnulusMapPtr map, double cut_angle);

  LiftPoint evaluate(cplx z) const;
  /// The map's own lift (no logarithm); agrees with evaluate().
  LiftPoint evaluate_native(cplx z) const { return map_->lift_point(z); }
  BranchTag tag_for(cplx z) const { return BranchTag::for_point(z, cut_angle_); }

  double cut_angle() const noexcept { return cut_angle_; }
  const AnnulusMap& map() const noexcept { return *map_; }
  const AnnulusMapPtr& map_ptr() const noexcept { return map_; }

private:
  AnnulusMapPtr map_;
  double cut_angle_;
};

/// Builds the lift after the sector check. Throws SectorAssumptionFailed when
/// Gamma's arguments cannot be placed in (delta, pi - delta) by a rotation.
LiftedMap lift(AnnulusMapPtr map, double delta = 0.1);

/// W on D, V and v on A.
class WeightEvaluators {
public:
  explicit WeightEvaluators(AnnulusMapPtr map) : map_(std::move(map)) {}

  static double W(cplx z) { return 1.0 / (4.0 * pi * pi * std::norm(z)); }
  cplx v(cplx zeta) const;
  double V(cplx zeta) const;

private:
  AnnulusMapPtr map_;
};

WeightEvaluators weight_evaluators(AnnulusMapPtr map);

// ---------------------------------------------------------------------------
// Schwarz-Christoffel maps for polygonal channels
// ---------------------------------------------------------------------------

/// P(zeta, q) = (1 - zeta) prod_{k=1}^{K} (1 - q^{2k} zeta)(1 - q^{2k} / zeta).
/// Throws NonConvergentRatio unless 0 < q < 1.
cplx sc_product_P(cplx zeta, double q, int K_trunc);

/// Smallest K with q^{2K} < 1e-16.
int sc_truncation(double q);

/// Parameters of the annulus SC map. Prevertices are stored per physical
/// vertex in left-to-right order; index 0 on each circle is the junction.
struct SCParams {
  double rho = 1.0;
  std::vector<double> theta_lower;  ///< angles on |zeta| = rho
  std::vector<double> theta_upper;  ///< angles on |zeta| = 1/rho
  std::vector<double> beta_lower;   ///< physical exponents, same order
  std::vector<double> beta_upper;
  cplx scale{};  ///< A
  cplx base{};   ///< image of zeta = 1
  double q = 0.0;
  int K_trunc = 0;

  // residual report
  double max_vertex_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;
};

struct ScSolveOptions {
  double vertex_tol = 1e-8;
  SolverBudget budget{};
};

class ScAnnulusMap;

/// Solves the SC parameter problem for a polygonal cell.
/// Throws InvalidCell, DegenerateInitialization or NoConvergence.
SCParams solve_sc_parameters(const PeriodicCellSpec& spec,
                             const std::optional<SCParams>& init = std::nullopt,
                             const ScSolveOptions& options = {});

/// Map built from already-solved parameters (e.g. loaded from an archive).
std::shared_ptr<const ScAnnulusMap> make_sc_map(const PeriodicCellSpec& spec,
                                                const SCParams& params);

/// Image of zeta in A under A int_1^zeta prod P(.)^beta dzeta/zeta, integrated
/// along the radial segment from 1 to |zeta| followed by the counter-clockwise
/// arc to zeta (argument in [0, 2 pi)).
cplx sc_channel_map(cplx zeta, const SCParams& params, const PeriodicCellSpec& spec);

class ScAnnulusMap final : public AnnulusMap {
public:
  ScAnnulusMap(PeriodicCellSpec spec, SCParams params);

  double rho() const override { return params_.rho; }
  MapProvenance provenance() const override { return MapProvenance::sc_solved; }
  LiftPoint lift_point(cplx z) const override;
  LiftPoint unlift_point(cplx t) const override;

  const SCParams& params() const noexcept { return params_; }

  /// d/dt of the strip-to-channel map at t.
  cplx strip_derivative(cplx t) const;
  /// Integral of strip_derivative along the straight segment [t0, t1].
  /// Endpoints may be prevertices; interior points may not.
  cplx integrate_segment(cplx t0, cplx t1) const;
  /// Radial-then-arc channel map (see sc_channel_map).
  cplx channel(cplx zeta) const;
  /// Strip coordinates of the prevertices (lower then upper).
  const std::vector<cplx>& prevertices() const noexcept { return prevertex_t_; }
  /// Image of each prevertex minus its target vertex (lower then upper),
  /// each integrated from t = 0.
  std::vector<cplx> vertex_errors() const;
  /// Max of |vertex_errors()|.
  double vertex_residual() const;

private:
  void prepare();
  void ensure_table() const;
  /// log of the SC integrand at w; with t given (w = E-image of t) the
  /// prevertex factors are formed from t - p_k to keep digits near corners.
  cplx log_h(cplx w, const cplx* t = nullptr, int corner = -1, cplx delta = 0.0) const;
  /// Regular part H of the integrand at p_k + delta: h = delta^beta_k H.
  cplx corner_factor(int k, cplx delta) const;
  /// (g(p_k + delta) - g(p_k)) / delta^(1 + beta_k).
  cplx corner_integral(int k, cplx delta) const;
  /// Inversion in the local variable delta = t - p_k for points whose image
  /// lies close to a vertex; false when z0 is not near one.
  bool lift_near_corner(cplx z0, LiftPoint& out) const;
  /// Index of the prevertex at t (up to integer translation), or -1.
  int singular_index(cplx t) const;
  double nearest_singularity(cplx t, int exclude) const;
  const QuadratureRule& jacobi_rule(int index) const;

  SCParams params_;
  double mu_ = 0.0;
  std::vector<double> mu_pow_;  // mu^{2j}, j = 1..K
  std::vector<cplx> a_lower_, a_upper_;
  std::vector<cplx> prevertex_t_;
  std::vector<double> prevertex_beta_;
  std::vector<QuadratureRule> jacobi_;
  std::vector<cplx> targets_;  // vertex positions matching prevertex_t_
  std::vector<cplx> vertex_image_;  // map value at each prevertex
  double corner_radius_ = 0.0;      // switch to corner-adapted inversion inside this radius
  std::vector<double> corner_image_radius_;  // image of that disc, per prevertex
  cplx h0_{};

  // coarse table of the strip-to-channel map, built on first use
  mutable std::once_flag table_once_;
  mutable std::vector<cplx> table_t_, table_g_;
};

}  // namespace pbergman
