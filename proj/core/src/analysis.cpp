#include "pbergman/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pbergman/error.hpp"

namespace pbergman {

namespace {

// Boundary polyline in left-to-right order, extended by one edge into each
// neighbouring period so that the junction vertices get both edges.
std::vector<cplx> extended_polyline(const std::vector<cplx>& listed) {
  std::vector<cplx> ltr(listed.rbegin(), listed.rend());
  std::vector<cplx> out;
  out.push_back(ltr[ltr.size() - 2] - 1.0);
  out.insert(out.end(), ltr.begin(), ltr.end());
  out.push_back(ltr[1] + 1.0);
  return out;
}

double phi_prime_abs(const KernelContext& ctx, cplx z) {
  const LiftPoint p = ctx.lift_at(z);
  return std::abs(p.dphi) * std::exp(-2.0 * pi * (p.phi.imag() - z.imag()));
}

}  // namespace

PhiPrimeReport phi_prime_bounds(const KernelContext& ctx, const std::vector<double>& collars) {
  const auto& spec = ctx.map().cell();
  PhiPrimeReport rep;
  rep.inf = std::numeric_limits<double>::infinity();
  rep.sup = 0.0;
  for (double d : collars) {
    CollarLevel lvl;
    lvl.distance = d;
    lvl.inf = std::numeric_limits<double>::infinity();
    auto sample = [&](cplx z) {
      const double m = std::floor(z.real());
      if (!ctx.region.contains(z - m)) return;
      const double v = phi_prime_abs(ctx, z);
      lvl.inf = std::min(lvl.inf, v);
      lvl.sup = std::max(lvl.sup, v);
      ++lvl.samples;
    };
    for (int side = 0; side < 2; ++side) {
      const bool upper = side == 1;
      const auto poly = extended_polyline(upper ? spec.upper_vertices : spec.lower_vertices);
      // inward normal: domain lies to the left of the lower curve and to the
      // right of the upper curve when both run left to right
      auto normal = [&](std::size_t i) {
        const cplx dir = (poly[i + 1] - poly[i]) / std::abs(poly[i + 1] - poly[i]);
        return upper ? -I * dir : I * dir;
      };
      for (std::size_t i = 1; i + 2 < poly.size(); ++i) {
        const cplx n = normal(i);
        for (double s : {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875})
          sample(poly[i] + s * (poly[i + 1] - poly[i]) + d * n);
      }
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        cplx b = normal(i - 1) + normal(i);
        if (std::abs(b) < 1e-12) continue;
        sample(poly[i] + d * b / std::abs(b));
      }
    }
    if (lvl.samples == 0) lvl.inf = 0.0;
    rep.inf = std::min(rep.inf, lvl.inf);
    rep.sup = std::max(rep.sup, lvl.sup);
    rep.levels.push_back(lvl);
  }
  rep.blow_up = rep.levels.size() >= 2;
  for (std::size_t k = 1; k < rep.levels.size(); ++k)
    if (!(rep.levels[k].sup > rep.levels[k - 1].sup)) rep.blow_up = false;
  return rep;
}

std::string DecayFit::comparison() const {
  std::ostringstream os;
  const double gap_full = std::abs(rate - rate_full) / rate_full;
  const double gap_half = std::abs(rate - rate_half) / rate_half;
  os << "measured rate " << rate << "; pi^2/log(rho) = " << rate_full << " (relative gap " << gap_full
     << "); pi^2/(2 log(rho)) = " << rate_half << " (relative gap " << gap_half << "); closer to "
     << (gap_full <= gap_half ? "pi^2/log(rho)" : "pi^2/(2 log(rho))");
  return os.str();
}

std::vector<cplx> default_decay_probes(const KernelContext& ctx, int k, double inset) {
  std::vector<cplx> out;
  for (int i = 0; i < k; ++i) {
    const double x = inset + (1.0 - 2.0 * inset) * (k == 1 ? 0.5 : double(i) / (k - 1));
    const int s = ctx.region.slab_index(x);
    const Slab& slab = ctx.region.slabs[s];
    const double lo = slab.lower_at(x), hi = slab.upper_at(x);
    for (int j = 0; j < k; ++j) {
      const double v = inset + (1.0 - 2.0 * inset) * (k == 1 ? 0.5 : double(j) / (k - 1));
      out.emplace_back(x, lo + v * (hi - lo));
    }
  }
  return out;
}

DecayFit decay_profile(const KernelContext& ctx, const std::vector<cplx>& probes, int n_max,
                       int n_min) {
  if (probes.empty() || n_max <= n_min)
    throw Error(ErrorKind::InvalidArgument, "decay_profile: need probes and n_max > n_min");
  DecayFit fit;
  const double L = ctx.log_rho();
  fit.rate_full = pi * pi / L;
  fit.rate_half = pi * pi / (2.0 * L);
  const LiftPoint l0 = ctx.lift_at(0.0);
  std::vector<LiftPoint> lifts = ctx.lift_all(probes);
  for (int n = n_min; n <= n_max; ++n) {
    double peak = 0.0;
    for (const auto& lp : lifts) {
      LiftPoint shifted = lp;
      shifted.phi += double(n);
      peak = std::max(peak, std::abs(periodic_kernel_closed(shifted, l0, L)));
    }
    if (!(peak > 1e-300)) {
      fit.truncated = true;
      break;
    }
    fit.n.push_back(n);
    fit.peak.push_back(peak);
  }
  const std::size_t m = fit.n.size();
  if (m < 3) throw Error(ErrorKind::UnderflowBeyondN, "fewer than three periods above 1e-300");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = fit.n[i], y = std::log(fit.peak[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - slope * sx) / m;
  fit.rate = -slope;
  double ss = 0.0;
  fit.c_low = std::numeric_limits<double>::infinity();
  fit.c_high = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = std::log(fit.peak[i]) - (fit.intercept + slope * fit.n[i]);
    ss += r * r;
    const double c = fit.peak[i] * std::exp(fit.rate * fit.n[i]);
    fit.c_low = std::min(fit.c_low, c);
    fit.c_high = std::max(fit.c_high, c);
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

double WeightSpec::operator()(double x) const {
  switch (profile) {
    case Profile::constant:
      return 1.0;
    case Profile::stretched_exponential:
      return std::exp(scale * std::pow(std::abs(x), power));
    case Profile::custom:
      return custom(x);
  }
  return 1.0;
}

WeightSpec constant_weight() { return {}; }

WeightSpec stretched_exponential_weight(double power, double scale) {
  if (!(power > 0.0 && power <= 1.0) || !(scale > 0.0))
    throw Error(ErrorKind::InvalidArgument, "stretched exponential needs 0 < power <= 1, scale > 0");
  WeightSpec w;
  w.profile = WeightSpec::Profile::stretched_exponential;
  w.power = power;
  w.scale = scale;
  std::ostringstream os;
  os << "exp(" << scale << "|x|^" << power << ")";
  w.name = os.str();
  return w;
}

WeightSpec custom_weight(std::function<double(double)> f, std::string name) {
  WeightSpec w;
  w.profile = WeightSpec::Profile::custom;
  w.custom = std::move(f);
  w.name = std::move(name);
  return w;
}

namespace {

double log_weight(const WeightSpec& w, double x) {
  switch (w.profile) {
    case WeightSpec::Profile::constant:
      return 0.0;
    case WeightSpec::Profile::stretched_exponential:
      return w.scale * std::pow(std::abs(x), w.power);
    case WeightSpec::Profile::custom: {
      const double v = w.custom(x);
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::NotAWeight, "weight is not finite and positive");
      return std::log(v);
    }
  }
  return 0.0;
}

}  // namespace

WeightCheckReport weight_check(const WeightSpec& spec, double a, double b, int n_range,
                               int x_samples) {
  if (!(b > 0.0 && b < 1.0)) throw Error(ErrorKind::InvalidArgument, "weight exponent b must lie in (0, 1)");
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "weight rate a must be positive");
  if (n_range < 0 || x_samples < 2) throw Error(ErrorKind::InvalidArgument, "bad sampling ranges");
  WeightCheckReport rep;
  double worst = 0.0;  // log C
  for (int i = 0; i < x_samples; ++i) {
    const double x = double(i) / (x_samples - 1);
    const double lx = log_weight(spec, x);
    for (int n = -n_range; n <= n_range; ++n) {
      const double g = a * std::pow(std::abs(double(n)), b);
      const double d = log_weight(spec, x + n) - lx;
      // upper: d <= log C + g; lower: d >= -log C - g
      const double need = std::max(d - g, -d - g);
      if (need > worst) {
        worst = need;
        rep.worst_x = x;
        rep.worst_n = n;
      }
      ++rep.samples;
    }
  }
  if (worst > std::log(1e6)) {
    std::ostringstream os;
    os << "constant exceeds 1e6 at x = " << rep.worst_x << ", n = " << rep.worst_n;
    throw Error(ErrorKind::NotAWeight, os.str());
  }
  rep.C = worst > 0.0 ? std::exp(worst) : 1.0;
  return rep;
}

std::vector<cplx> schur_probes(const KernelContext& ctx) {
  std::vector<cplx> out;
  auto at = [&](double x, double v) {
    const Slab& s = ctx.region.slabs[ctx.region.slab_index(x)];
    const double lo = s.lower_at(x), hi = s.upper_at(x);
    return cplx(x, lo + v * (hi - lo));
  };
  for (int i = 0; i < 16; ++i) out.push_back(at((i + 0.5) / 16.0, 0.5));
  for (double x : {0.25, 0.75}) {
    out.push_back(at(x, 0.05));
    out.push_back(at(x, 0.95));
  }
  return out;
}

SchurReport schur_bound(const KernelContext& ctx, const WeightSpec& weight, int window, int order) {
  if (window < 1) throw Error(ErrorKind::InvalidArgument, "schur_bound: window must be positive");
  const auto nodes = cell_nodes(ctx.region, order);
  std::vector<cplx> pts;
  for (const auto& n : nodes) pts.push_back(n.z);
  const auto lifts = ctx.lift_all(pts);
  const auto probes = schur_probes(ctx);
  const double L = ctx.log_rho();
  const int W2 = 2 * window;

  SchurReport rep;
  rep.window = window;
  std::vector<double> best_periods;
  for (cplx z : probes) {
    const LiftPoint lz = ctx.lift_at(z);
    const double lwz = log_weight(weight, z.real());
    std::vector<double> periods(2 * W2 + 1, 0.0);
    for (int m = -W2; m <= W2; ++m) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        LiftPoint lw = lifts[i];
        lw.phi += double(m);
        const double k = std::abs(periodic_kernel_closed(lz, lw, L));
        if (k == 0.0) continue;
        acc += nodes[i].weight * k * std::exp(lwz - log_weight(weight, nodes[i].z.real() + m));
      }
      periods[m + W2] = acc;
    }
    // contributions must decrease away from the probe's own period
    for (int m = 2; m < W2; ++m) {
      const double right_now = periods[W2 + m], right_next = periods[W2 + m + 1];
      const double left_now = periods[W2 - m], left_next = periods[W2 - m - 1];
      if (right_next > right_now * (1.0 + 1e-9) + 1e-300 || left_next > left_now * (1.0 + 1e-9) + 1e-300) {
        std::ostringstream os;
        os << "period contributions grow at |m| = " << m + 1 << " for probe " << z;
        throw Error(ErrorKind::NotSummable, os.str());
      }
    }
    double inner = 0.0, outer = 0.0;
    for (int m = -W2; m <= W2; ++m) {
      outer += periods[m + W2];
      if (std::abs(m) <= window) inner += periods[m + W2];
    }
    if (!std::isfinite(outer)) throw Error(ErrorKind::NotSummable, "row integral is not finite");
    rep.row.push_back(outer);
    if (outer > rep.sup_row_doubled) {
      rep.sup_row_doubled = outer;
      rep.sup_probe = z;
      best_periods = periods;
    }
    rep.sup_row = std::max(rep.sup_row, inner);
  }
  rep.per_period = best_periods;
  rep.stability = std::abs(rep.sup_row_doubled - rep.sup_row) / rep.sup_row_doubled;
  return rep;
}

}  // namespace pbergman
