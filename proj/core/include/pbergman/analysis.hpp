#pragma once

// Studies built on the periodic kernel: boundary behaviour of phi', the
// exponential decay of K(z, 0) along the period, weight admissibility and
// the Schur test for the weighted projection.

#include <functional>
#include <string>
#include <vector>

#include "pbergman/kernels.hpp"

namespace pbergman {

// ---------------------------------------------------------------------------
// phi' near the boundary
// ---------------------------------------------------------------------------

struct CollarLevel {
  double distance = 0.0;  ///< collar width
  double inf = 0.0;
  double sup = 0.0;
  int samples = 0;
};

struct PhiPrimeReport {
  double inf = 0.0;  ///< over all collars
  double sup = 0.0;
  std::vector<CollarLevel> levels;  ///< widest collar first
  bool blow_up = false;             ///< sup strictly increasing as the collar shrinks
};

/// |phi'| on D sampled at points of the cell at fixed distances from the
/// boundary polylines (edge midfields and corner bisectors). The value is
/// assembled from the lift as |phi_L'(z)| exp(-2 pi (Im phi_L(z) - Im z)).
PhiPrimeReport phi_prime_bounds(const KernelContext& ctx,
                                const std::vector<double>& collars = {0.1, 0.03, 0.01, 0.003});

// ---------------------------------------------------------------------------
// Decay of K(z, 0)
// ---------------------------------------------------------------------------

struct DecayFit {
  std::vector<int> n;
  std::vector<double> peak;  ///< max over g in G of |K(g + n, 0)|
  double rate = 0.0;         ///< fitted: log peak ~ intercept - rate n
  double intercept = 0.0;
  double residual = 0.0;     ///< rms residual of the log-linear fit
  double rate_half = 0.0;    ///< pi^2 / (2 log rho)
  double rate_full = 0.0;    ///< pi^2 / log rho (sech^2 asymptotics)
  double c_low = 0.0;        ///< min of peak e^{rate n}
  double c_high = 0.0;       ///< max of peak e^{rate n}
  bool truncated = false;    ///< values below 1e-300 cut the range
  /// Which reference the measured rate sits closer to, with the relative gaps.
  std::string comparison() const;
};

/// Fit over n = n_min..n_max of the per-period peak of the closed-form kernel.
/// Throws UnderflowBeyondN when fewer than three usable periods remain.
DecayFit decay_profile(const KernelContext& ctx, const std::vector<cplx>& probes, int n_max,
                       int n_min = 2);

/// A default compact probe set: a k x k grid in the middle of the cell.
std::vector<cplx> default_decay_probes(const KernelContext& ctx, int k = 5, double inset = 0.25);

// ---------------------------------------------------------------------------
// Weights depending on Re z
// ---------------------------------------------------------------------------

struct WeightSpec {
  enum class Profile { constant, stretched_exponential, custom };

  Profile profile = Profile::constant;
  double scale = 1.0;     ///< c in exp(c |x|^power)
  double power = 0.5;
  std::function<double(double)> custom;
  std::string name = "constant";

  double operator()(double x) const;
};

WeightSpec constant_weight();
/// W(x) = exp(scale |x|^power), power in (0, 1].
WeightSpec stretched_exponential_weight(double power, double scale = 1.0);
WeightSpec custom_weight(std::function<double(double)> w, std::string name);

struct WeightCheckReport {
  double C = 1.0;  ///< smallest constant satisfying both inequalities on the samples
  double worst_x = 0.0;
  int worst_n = 0;
  int samples = 0;
};

/// Smallest C with (1/C) W(x) e^{-a|n|^b} <= W(x+n) <= C W(x) e^{a|n|^b} over
/// x in [0, 1] and |n| <= n_range. Throws InvalidArgument unless 0 < b < 1 and
/// a > 0, and NotAWeight when C exceeds 1e6.
WeightCheckReport weight_check(const WeightSpec& spec, double a, double b, int n_range,
                               int x_samples = 101);

// ---------------------------------------------------------------------------
// Schur test
// ---------------------------------------------------------------------------

struct SchurReport {
  double sup_row = 0.0;          ///< at the requested window
  double sup_row_doubled = 0.0;  ///< at twice the window
  double stability = 0.0;        ///< relative change under doubling
  cplx sup_probe{};
  std::vector<double> row;       ///< per-probe row integrals at the doubled window
  std::vector<double> per_period;  ///< contributions of periods -2w..2w at sup_probe
  int window = 0;
};

/// Probes: 16 points across one period at mid-height plus 4 near the top and
/// bottom of the cell.
std::vector<cplx> schur_probes(const KernelContext& ctx);

/// sup over probes of sum_{|m| <= window} int_cell |K(z, w + m)| W(Re z) / W(Re w + m) dA(w).
/// Throws NotSummable when per-period contributions stop decreasing away from
/// the probe.
SchurReport schur_bound(const KernelContext& ctx, const WeightSpec& weight, int window,
                        int order = 32);

}  // namespace pbergman
