#pragma once

// Bergman kernels: model kernels, pullbacks, the periodic kernel on the
// domain (closed form, quasimomentum assembly, line integral), the cell
// kernels K_eta, their orthonormal bases and kernel projections.

#include <functional>
#include <memory>
#include <vector>

#include "pbergman/confmap.hpp"
#include "pbergman/floquet.hpp"
#include "pbergman/numerics.hpp"

namespace pbergman {

/// Stop rule for the two-sided basis series.
struct SeriesControl {
  double tol = 1e-12;   ///< term magnitude relative to the largest term seen
  int stop_count = 5;   ///< consecutive small terms required on each side
  int max_terms = 200000;
};

struct SeriesReport {
  int n_low = 0;   ///< smallest index summed
  int n_high = 0;  ///< largest index summed
  int terms = 0;
};

struct AssemblyReport {
  int points = 0;      ///< eta nodes used
  double error = 0.0;  ///< |I_N - I_{N/2}|
};

/// Evaluation context: lifted map, cell region, and numerical policies.
struct KernelContext {
  KernelContext(AnnulusMapPtr map, double delta = 0.1);

  LiftedMap lifted;
  WeightEvaluators weights;
  CellRegion region;
  SeriesControl series{};
  int eta_points = 256;      ///< initial eta grid for assembly
  double eta_tol = 1e-8;     ///< relative tolerance for eta assembly
  int eta_max_points = 1 << 14;
  LineCutoffPolicy line{};

  const AnnulusMap& map() const noexcept { return lifted.map(); }
  double rho() const { return lifted.map().rho(); }
  double log_rho() const { return lifted.map().log_rho(); }
  /// phi_L and phi_L' at z (map's native lift).
  LiftPoint lift_at(cplx z) const { return lifted.evaluate_native(z); }
  /// Lifts of points already reduced to the base cell, translated by m.
  std::vector<LiftPoint> lift_all(const std::vector<cplx>& points) const;
};

// ---------------------------------------------------------------------------
// Model kernels and pullbacks
// ---------------------------------------------------------------------------

/// Upper half plane: -1 / (pi (z - conj w)^2). Throws OutOfDomain for Im <= 0.
cplx halfplane_kernel(cplx z, cplx w);

/// Strip |Im| < pi: (1/(16 pi)) sech^2((z - conj w)/4). Throws OutOfDomain.
cplx strip_kernel_sigma(cplx z, cplx w);

using KernelFn = std::function<cplx(cplx, cplx)>;

/// Holomorphic map with derivative.
struct AnalyticMap {
  std::function<cplx(cplx)> f;
  std::function<cplx(cplx)> df;
};

/// K(f z, f w) f'(z) conj f'(w): kernel transported by a conformal map.
cplx pullback_kernel(const KernelFn& K, const AnalyticMap& f, cplx z, cplx w);

/// K(f z, f w) |f'(w)|^2: the same transport written against the image
/// measure when f is used as a change of variables in the second slot.
cplx pullback_kernel_weighted(const KernelFn& K, const AnalyticMap& f, cplx z, cplx w);

// ---------------------------------------------------------------------------
// Periodic kernel on the domain
// ---------------------------------------------------------------------------

/// Closed form from lifted values: phi'(z) conj phi'(w) pi^3 / (4 log^2 rho)
/// sech^2(pi^2 (phi(z) - conj phi(w)) / (2 log rho)).
cplx periodic_kernel_closed(const LiftPoint& lz, const LiftPoint& lw, double log_rho);
cplx periodic_kernel_closed(const KernelContext& ctx, cplx z, cplx w);

/// Quasimomentum assembly (2 pi)^{-1} int K_eta(z0, w0) e^{i eta (m_z - m_w)} d eta,
/// periodic trapezoid doubled until the relative change is below ctx.eta_tol.
/// Throws QuadratureFailure when ctx.eta_max_points is reached.
cplx periodic_kernel_eta_assembly(const KernelContext& ctx, cplx z, cplx w,
                                  AssemblyReport* report = nullptr);

/// 4 pi phi'(z) conj phi'(w) int t e^{i 2 pi t Delta} / (rho^{2t} - rho^{-2t}) dt.
cplx periodic_kernel_t_integral(const KernelContext& ctx, cplx z, cplx w, Estimate* est = nullptr);

// ---------------------------------------------------------------------------
// Cell kernels and bases
// ---------------------------------------------------------------------------

/// C_{n,eta}^{-2} = 2 pi (rho^x - rho^{-x}) / x with x = 2(n+1) + eta/pi;
/// the x -> 0 limit is 4 pi log rho.
double norm_const_inv_sq(int n, double eta, double rho);
double norm_const(int n, double eta, double rho);

/// Orthonormal basis of the weighted annulus space:
/// C zeta^{n + eta/(2 pi)} / v(zeta), the power taken with the argument in
/// [cut, cut + 2 pi). Throws BranchViolation on the cut ray or at 0.
cplx basis_fn(int n, double eta, cplx zeta, const KernelContext& ctx);
/// Same with v(zeta) supplied, for loops over (n, eta) at fixed zeta.
cplx basis_fn(int n, double eta, cplx zeta, cplx v, double rho, double cut_angle);

/// The same basis pulled back to the cell: 2 pi C phi'(z) e^{i (2 pi (n+1) + eta) phi(z)}.
cplx pulled_back_basis(int n, double eta, cplx z, const KernelContext& ctx);
cplx pulled_back_basis(int n, double eta, const LiftPoint& lz, double rho);

/// K_eta(z, w) = sum_n e_n(z) conj e_n(w) for z, w in the base cell, from lifts.
cplx cell_kernel_eta(const LiftPoint& lz, const LiftPoint& lw, double eta, double log_rho,
                     const SeriesControl& control, SeriesReport* report = nullptr);
cplx cell_kernel_eta(const KernelContext& ctx, cplx z, cplx w, double eta,
                     SeriesReport* report = nullptr);

/// Fourier identity int t e^{-i s t} / (e^{a t} - e^{-a t}) dt =
/// (pi^2 / (4 a^2)) sech^2(pi s / (2 a)); both sides computed independently.
struct FourierCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double error = 0.0;  ///< quadrature error estimate of lhs
};
FourierCheck sech_fourier_identity(double s, double a, const LineCutoffPolicy& policy = {});

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

enum class KernelMethod { closed, eta_assembly, t_integral };

struct ProjectionReport {
  int window = 0;
  double last_shell = 0.0;  ///< |contribution| of the two outermost cells
  Estimate value;
};

/// int_Pi K(z, w) f(w) dA(w) over cells |m| <= window with the closed-form
/// kernel (cell rule of the given order). Throws TailNotNegligible when the
/// outermost cells contribute more than tail_tol relative to the total.
cplx project(const KernelContext& ctx, const SampledFunction& f, cplx z, int window,
             int order = 32, double tail_tol = 1e-8, ProjectionReport* report = nullptr);

/// int_cell K_eta(z, w) f(w) dA(w) on the base cell.
cplx project_eta(const KernelContext& ctx, const std::function<cplx(cplx)>& f, double eta, cplx z,
                 int order = 32);

/// K_eta for many point pairs at one eta; the series coefficients are
/// tabulated once.
class CellKernelEvaluator {
public:
  CellKernelEvaluator(double eta, double log_rho, SeriesControl control = {});
  cplx operator()(const LiftPoint& lz, const LiftPoint& lw, SeriesReport* report = nullptr) const;
  double eta() const noexcept { return eta_; }

private:
  double eta_, log_rho_;
  SeriesControl control_;
  std::vector<double> log_coef_pos_;  // log(4 pi^2 C^2) for n = -1, 0, 1, ...
  std::vector<double> log_coef_neg_;  // for n = -2, -3, ...
};

}  // namespace pbergman
