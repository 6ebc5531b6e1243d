#include "pbergman/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "pbergman/error.hpp"

namespace pbergman {

namespace {

// log sinh(y) for y > 0
double log_sinh(double y) { return y + std::log(-std::expm1(-2.0 * y)) - std::log(2.0); }

// log(4 pi^2 C^2) with C^2 = x / (4 pi sinh(x L)), x = 2(n+1) + eta/pi
double log_series_coef(int n, double eta, double L) {
  const double x = std::abs(2.0 * (n + 1) + eta / pi);
  const double base = std::log(4.0 * pi * pi);
  if (x * L < 1e-300) return base - std::log(4.0 * pi * L);
  return base + std::log(x / (4.0 * pi)) - log_sinh(x * L);
}

// Two-sided sum of exp(logcoef(n) + i pi x Delta), walking outward from n = -1.
template <class Coef>
cplx sum_series(Coef&& logcoef, cplx delta, double eta, const SeriesControl& control,
                SeriesReport* report) {
  double max_mag = 0.0;
  cplx right = 0.0, left = 0.0;
  int n_hi = -1, n_lo = -1, terms = 0;
  auto term = [&](int n) {
    const double alpha = pi * (2.0 * (n + 1) + eta / pi);
    return std::exp(cplx(logcoef(n) - alpha * delta.imag(), alpha * delta.real()));
  };
  auto walk = [&](int start, int step, cplx& acc, int& last) {
    int small = 0;
    for (int n = start;; n += step) {
      if (++terms > control.max_terms)
        throw Error(ErrorKind::SeriesNotConverged, "series window exhausted before the stop rule");
      const cplx t = term(n);
      const double mag = std::abs(t);
      if (!std::isfinite(mag))
        throw Error(ErrorKind::SeriesNotConverged, "series term overflow (point outside the cell?)");
      acc += t;
      last = n;
      max_mag = std::max(max_mag, mag);
      if (mag <= control.tol * max_mag) {
        if (++small >= control.stop_count) break;
      } else {
        small = 0;
      }
    }
  };
  walk(-1, 1, right, n_hi);
  walk(-2, -1, left, n_lo);
  if (report) *report = {n_lo, n_hi, terms};
  return right + left;
}

}  // namespace

KernelContext::KernelContext(AnnulusMapPtr map, double delta)
    : lifted(lift(map, delta)), weights(map), region(build_cell(map->cell())) {}

std::vector<LiftPoint> KernelContext::lift_all(const std::vector<cplx>& points) const {
  std::vector<LiftPoint> out;
  out.reserve(points.size());
  for (cplx z : points) out.push_back(lift_at(z));
  return out;
}

cplx halfplane_kernel(cplx z, cplx w) {
  if (!(z.imag() > 0.0 && w.imag() > 0.0))
    throw Error(ErrorKind::OutOfDomain, "half-plane kernel needs Im z, Im w > 0");
  const cplx d = z - std::conj(w);
  return -1.0 / (pi * d * d);
}

cplx strip_kernel_sigma(cplx z, cplx w) {
  if (!(std::abs(z.imag()) < pi && std::abs(w.imag()) < pi))
    throw Error(ErrorKind::OutOfDomain, "strip kernel needs |Im z|, |Im w| < pi");
  return sech2((z - std::conj(w)) / 4.0) / (16.0 * pi);
}

cplx pullback_kernel(const KernelFn& K, const AnalyticMap& f, cplx z, cplx w) {
  if (!f.df) throw Error(ErrorKind::DerivativeUnavailable, "map has no derivative");
  const cplx dz = f.df(z), dw = f.df(w);
  if (!std::isfinite(std::abs(dz)) || !std::isfinite(std::abs(dw)))
    throw Error(ErrorKind::DerivativeUnavailable, "non-finite derivative");
  return K(f.f(z), f.f(w)) * dz * std::conj(dw);
}

cplx pullback_kernel_weighted(const KernelFn& K, const AnalyticMap& f, cplx z, cplx w) {
  if (!f.df) throw Error(ErrorKind::DerivativeUnavailable, "map has no derivative");
  const cplx dw = f.df(w);
  if (!std::isfinite(std::abs(dw))) throw Error(ErrorKind::DerivativeUnavailable, "non-finite derivative");
  return K(f.f(z), f.f(w)) * std::norm(dw);
}

cplx periodic_kernel_closed(const LiftPoint& lz, const LiftPoint& lw, double log_rho) {
  const cplx delta = lz.phi - std::conj(lw.phi);
  const double c = pi * pi * pi / (4.0 * log_rho * log_rho);
  return lz.dphi * std::conj(lw.dphi) * c * sech2(pi * pi * delta / (2.0 * log_rho));
}

cplx periodic_kernel_closed(const KernelContext& ctx, cplx z, cplx w) {
  LiftPoint lz, lw;
  try {
    lz = ctx.lift_at(z);
    lw = ctx.lift_at(w);
  } catch (const Error& e) {
    throw Error(ErrorKind::MapEvaluationFailure, e.what());
  }
  return periodic_kernel_closed(lz, lw, ctx.log_rho());
}

double norm_const_inv_sq(int n, double eta, double rho) {
  if (!(rho > 1.0)) throw Error(ErrorKind::InvalidArgument, "rho must exceed 1");
  const double x = 2.0 * (n + 1) + eta / pi;
  const double L = std::log(rho);
  if (x == 0.0) return 4.0 * pi * L;
  // 2 pi (rho^x - rho^-x) / x = 4 pi sinh(x L) / x
  return 4.0 * pi * std::sinh(x * L) / x;
}

double norm_const(int n, double eta, double rho) { return 1.0 / std::sqrt(norm_const_inv_sq(n, eta, rho)); }

cplx basis_fn(int n, double eta, cplx zeta, cplx v, double rho, double cut_angle) {
  if (zeta == cplx(0.0)) throw Error(ErrorKind::BranchViolation, "basis function at 0");
  const double lo = cut_angle;
  const double a = arg_in_window(zeta, lo);
  if (a - lo < 1e-14 || lo + 2.0 * pi - a < 1e-14)
    throw Error(ErrorKind::BranchViolation, "point lies on the cut");
  const cplx log_zeta(std::log(std::abs(zeta)), a);
  const double p = n + eta / (2.0 * pi);
  if (v == cplx(0.0)) throw Error(ErrorKind::BranchViolation, "v vanishes");
  return norm_const(n, eta, rho) * std::exp(p * log_zeta) / v;
}

cplx basis_fn(int n, double eta, cplx zeta, const KernelContext& ctx) {
  if (zeta == cplx(0.0)) throw Error(ErrorKind::BranchViolation, "basis function at 0");
  return basis_fn(n, eta, zeta, ctx.weights.v(zeta), ctx.rho(), ctx.lifted.cut_angle());
}

cplx pulled_back_basis(int n, double eta, const LiftPoint& lz, double rho) {
  const double alpha = 2.0 * pi * (n + 1) + eta;
  return 2.0 * pi * norm_const(n, eta, rho) * lz.dphi * std::exp(I * alpha * lz.phi);
}

cplx pulled_back_basis(int n, double eta, cplx z, const KernelContext& ctx) {
  return pulled_back_basis(n, eta, ctx.lift_at(z), ctx.rho());
}

cplx cell_kernel_eta(const LiftPoint& lz, const LiftPoint& lw, double eta, double log_rho,
                     const SeriesControl& control, SeriesReport* report) {
  const cplx delta = lz.phi - std::conj(lw.phi);
  const cplx s = sum_series([&](int n) { return log_series_coef(n, eta, log_rho); }, delta, eta,
                            control, report);
  return lz.dphi * std::conj(lw.dphi) * s;
}

cplx cell_kernel_eta(const KernelContext& ctx, cplx z, cplx w, double eta, SeriesReport* report) {
  return cell_kernel_eta(ctx.lift_at(z), ctx.lift_at(w), eta, ctx.log_rho(), ctx.series, report);
}

CellKernelEvaluator::CellKernelEvaluator(double eta, double log_rho, SeriesControl control)
    : eta_(eta), log_rho_(log_rho), control_(control) {
  // Beyond log coefficient -1500 no admissible point pair brings a term back
  // above double precision; those are computed on demand.
  for (int n = -1; n < control.max_terms; ++n) {
    const double c = log_series_coef(n, eta, log_rho);
    log_coef_pos_.push_back(c);
    if (c < -1500.0) break;
  }
  for (int n = -2; -n < control.max_terms; --n) {
    const double c = log_series_coef(n, eta, log_rho);
    log_coef_neg_.push_back(c);
    if (c < -1500.0) break;
  }
}

cplx CellKernelEvaluator::operator()(const LiftPoint& lz, const LiftPoint& lw,
                                     SeriesReport* report) const {
  const cplx delta = lz.phi - std::conj(lw.phi);
  auto coef = [&](int n) {
    if (n >= -1) {
      const std::size_t k = static_cast<std::size_t>(n + 1);
      if (k < log_coef_pos_.size()) return log_coef_pos_[k];
    } else {
      const std::size_t k = static_cast<std::size_t>(-n - 2);
      if (k < log_coef_neg_.size()) return log_coef_neg_[k];
    }
    return log_series_coef(n, eta_, log_rho_);
  };
  return lz.dphi * std::conj(lw.dphi) * sum_series(coef, delta, eta_, control_, report);
}

cplx periodic_kernel_eta_assembly(const KernelContext& ctx, cplx z, cplx w, AssemblyReport* report) {
  const double mz = std::floor(z.real()), mw = std::floor(w.real());
  const LiftPoint lz = ctx.lift_at(z - mz), lw = ctx.lift_at(w - mw);
  const double L = ctx.log_rho();
  const double shift = mz - mw;
  auto integrand = [&](double eta) {
    return std::exp(I * (eta * shift)) * cell_kernel_eta(lz, lw, eta, L, ctx.series);
  };
  // Trapezoid sums on nested grids: each doubling adds the odd nodes.
  int N = std::max(2, ctx.eta_points);
  cplx sum = 0.0;
  for (int j = 0; j < N; ++j) sum += integrand(-pi + 2.0 * pi * j / N);
  cplx value = sum / double(N);  // (2 pi)^{-1} * (2 pi / N) * sum
  double err = std::abs(value);
  for (;;) {
    cplx odd = 0.0;
    for (int j = 0; j < N; ++j) odd += integrand(-pi + 2.0 * pi * (j + 0.5) / N);
    sum += odd;
    N *= 2;
    const cplx next = sum / double(N);
    err = std::abs(next - value);
    value = next;
    if (err <= ctx.eta_tol * std::abs(value)) break;
    if (2 * N > ctx.eta_max_points) {
      if (report) *report = {N, err};
      throw Error(ErrorKind::QuadratureFailure, "eta assembly did not reach tolerance");
    }
  }
  if (report) *report = {N, err};
  return value;
}

cplx periodic_kernel_t_integral(const KernelContext& ctx, cplx z, cplx w, Estimate* est) {
  const LiftPoint lz = ctx.lift_at(z), lw = ctx.lift_at(w);
  const cplx delta = lz.phi - std::conj(lw.phi);
  const double L = ctx.log_rho();
  // t / (rho^{2t} - rho^{-2t}) = |t| e^{-2|t|L} / (1 - e^{-4|t|L}), even in t
  auto g = [&](double t) -> cplx {
    const double a = std::abs(t);
    const double base = a * L < 1e-12 ? 1.0 / (4.0 * L) : a / (-std::expm1(-4.0 * a * L));
    return base * std::exp(cplx(-2.0 * a * L, 0.0) + I * (2.0 * pi * t * delta));
  };
  const Estimate e = integrate_line_adaptive(g, ctx.line);
  const cplx pre = 4.0 * pi * lz.dphi * std::conj(lw.dphi);
  if (est) *est = {pre * e.value, std::abs(pre) * e.error};
  return pre * e.value;
}

FourierCheck sech_fourier_identity(double s, double a, const LineCutoffPolicy& policy) {
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "a must be positive");
  // even part: t cos(s t) / (2 sinh(a t)), written to avoid overflow
  auto g = [&](double t) -> cplx {
    const double u = std::abs(t);
    const double base = u * a < 1e-12 ? 1.0 / (2.0 * a) : u * std::exp(-u * a) / (-std::expm1(-2.0 * u * a));
    return base * std::cos(s * t);
  };
  Estimate e;
  try {
    e = integrate_line_adaptive(g, policy);
  } catch (const Error& err) {
    throw Error(ErrorKind::QuadratureFailure, err.what());
  }
  FourierCheck out;
  out.lhs = e.value.real();
  out.error = e.error;
  out.rhs = (pi * pi / (4.0 * a * a)) * sech2(cplx(pi * s / (2.0 * a), 0.0)).real();
  return out;
}

cplx project(const KernelContext& ctx, const SampledFunction& f, cplx z, int window, int order,
             double tail_tol, ProjectionReport* report) {
  if (!f.f) throw Error(ErrorKind::InvalidArgument, "project: empty function");
  if (window < 0) throw Error(ErrorKind::InvalidArgument, "project: negative window");
  const auto nodes = cell_nodes(ctx.region, order);
  std::vector<cplx> pts;
  pts.reserve(nodes.size());
  for (const auto& n : nodes) pts.push_back(n.z);
  const auto lifts = ctx.lift_all(pts);
  const LiftPoint lz = ctx.lift_at(z);
  const double L = ctx.log_rho();
  std::vector<cplx> per_cell;
  per_cell.reserve(2 * window + 1);
  for (int m = -window; m <= window; ++m) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      LiftPoint lw = lifts[i];
      lw.phi += double(m);
      const cplx fv = f.f(nodes[i].z + double(m));
      if (fv == cplx(0.0)) continue;
      acc += nodes[i].weight * periodic_kernel_closed(lz, lw, L) * fv;
    }
    per_cell.push_back(acc);
  }
  const cplx total = pairwise_sum(per_cell);
  const double shell = window == 0 ? 0.0 : std::abs(per_cell.front()) + std::abs(per_cell.back());
  if (report) *report = {window, shell, {total, shell}};
  if (shell > tail_tol * std::max(std::abs(total), 1e-300) && shell > 1e-300)
    throw Error(ErrorKind::TailNotNegligible, "outermost cells contribute above tolerance");
  return total;
}

cplx project_eta(const KernelContext& ctx, const std::function<cplx(cplx)>& f, double eta, cplx z,
                 int order) {
  const CellKernelEvaluator K(eta, ctx.log_rho(), ctx.series);
  const LiftPoint lz = ctx.lift_at(z);
  cplx acc = 0.0;
  for (const auto& n : cell_nodes(ctx.region, order)) acc += n.weight * K(lz, ctx.lift_at(n.z)) * f(n.z);
  return acc;
}

}  // namespace pbergman
