#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pbergman/confmap.hpp"
#include "pbergman/error.hpp"

namespace pbergman {

namespace {

constexpr int kJacobiOrder = 32;
constexpr double kSamePoint = 1e-14;  // strip points closer than this coincide

// e^z - 1 without cancellation for small |z|.
cplx cexpm1(cplx z) {
  const double sh = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * sh * sh, std::exp(z.real()) * std::sin(z.imag())};
}

constexpr int kTableColumns = 49;  // Re t from -0.25 to 1.25
constexpr int kTableRows = 16;

struct PhysicalPolyline {
  std::vector<cplx> targets;  // left to right, index 0 is the junction at Re 0
  std::vector<double> beta;
};

PhysicalPolyline physical(const std::vector<cplx>& poly, const std::vector<double>& beta) {
  const std::size_t n = poly.size();
  PhysicalPolyline out;
  out.targets.push_back(poly.back());
  out.beta.push_back(beta.front() + beta.back());
  for (std::size_t k = 1; k + 1 < n; ++k) {
    out.targets.push_back(poly[n - 1 - k]);
    out.beta.push_back(beta[n - 1 - k]);
  }
  return out;
}

}  // namespace

cplx sc_product_P(cplx zeta, double q, int K_trunc) {
  if (!(q > 0.0 && q < 1.0))
    throw Error(ErrorKind::NonConvergentRatio, "product ratio must satisfy 0 < q < 1");
  if (zeta == cplx(0.0)) throw Error(ErrorKind::InvalidArgument, "P is undefined at 0");
  cplx p = 1.0 - zeta;
  const double q2 = q * q;
  double qk = 1.0;
  for (int k = 1; k <= K_trunc; ++k) {
    qk *= q2;
    p *= (1.0 - qk * zeta) * (1.0 - qk / zeta);
  }
  return p;
}

int sc_truncation(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw Error(ErrorKind::NonConvergentRatio, "product ratio must satisfy 0 < q < 1");
  const int K = static_cast<int>(std::floor(std::log(1e-16) / (2.0 * std::log(q)))) + 1;
  return std::max(K, 1);
}

ScAnnulusMap::ScAnnulusMap(PeriodicCellSpec spec, SCParams params)
    : AnnulusMap(std::move(spec)), params_(std::move(params)) {
  prepare();
}

void ScAnnulusMap::prepare() {
  const PeriodicCellSpec& spec = cell();
  const PhysicalPolyline lower = physical(spec.lower_vertices, spec.beta_lower);
  const PhysicalPolyline upper = physical(spec.upper_vertices, spec.beta_upper);
  if (params_.theta_lower.size() != lower.targets.size() ||
      params_.theta_upper.size() != upper.targets.size())
    throw Error(ErrorKind::InvalidArgument, "prevertex count does not match the cell");
  if (params_.theta_lower.front() != 0.0)
    throw Error(ErrorKind::InvalidArgument, "lower junction prevertex must sit at angle 0");
  if (!(params_.rho > 1.0) || !std::isfinite(params_.rho))
    throw Error(ErrorKind::InvalidArgument, "modulus must exceed 1");
  for (const auto* th : {&params_.theta_lower, &params_.theta_upper})
    for (std::size_t k = 1; k < th->size(); ++k)
      if (!((*th)[k] > (*th)[k - 1]) || (*th)[k] - th->front() >= 2.0 * pi)
        throw Error(ErrorKind::DegenerateInitialization, "prevertices must be strictly ordered");
  params_.beta_lower = lower.beta;
  params_.beta_upper = upper.beta;

  mu_ = 1.0 / (params_.rho * params_.rho);
  params_.q = mu_;
  params_.K_trunc = sc_truncation(mu_);
  mu_pow_.clear();
  double m2 = 1.0;
  for (int j = 1; j <= params_.K_trunc; ++j) {
    m2 *= mu_ * mu_;
    mu_pow_.push_back(m2);
  }

  const double c = strip_half_width();
  a_lower_.clear();
  a_upper_.clear();
  prevertex_t_.clear();
  prevertex_beta_.clear();
  targets_.clear();
  jacobi_.clear();
  for (std::size_t k = 0; k < lower.targets.size(); ++k) {
    a_lower_.push_back(std::polar(1.0, params_.theta_lower[k]));
    prevertex_t_.push_back(cplx(params_.theta_lower[k] / (2.0 * pi), -c));
    prevertex_beta_.push_back(lower.beta[k]);
    targets_.push_back(lower.targets[k]);
  }
  for (std::size_t k = 0; k < upper.targets.size(); ++k) {
    a_upper_.push_back(std::polar(mu_, params_.theta_upper[k]));
    prevertex_t_.push_back(cplx(params_.theta_upper[k] / (2.0 * pi), c));
    prevertex_beta_.push_back(upper.beta[k]);
    targets_.push_back(upper.targets[k]);
  }
  for (double b : prevertex_beta_) jacobi_.push_back(gauss_jacobi(kJacobiOrder, 0.0, b));

  // Laurent constant of h on the middle circle |w| = sqrt(mu).
  const int N = std::max(64, static_cast<int>(std::ceil(80.0 / std::abs(std::log(mu_)))));
  std::vector<cplx> samples;
  samples.reserve(N);
  for (int j = 0; j < N; ++j)
    samples.push_back(std::exp(log_h(std::polar(std::sqrt(mu_), 2.0 * pi * j / N))) / double(N));
  h0_ = pairwise_sum(samples);
  if (!(std::abs(h0_) > 0.0) || !std::isfinite(h0_.real()))
    throw Error(ErrorKind::DegenerateInitialization, "mean of the SC integrand vanishes");
  params_.scale = 1.0 / (I * 2.0 * pi * h0_);
  params_.base = 0.0;
  params_.base = targets_.front() - integrate_segment(0.0, prevertex_t_.front());

  vertex_image_.clear();
  for (cplx pk : prevertex_t_) vertex_image_.push_back(params_.base + integrate_segment(0.0, pk));
  double sep = 1.0;
  for (std::size_t k = 0; k < prevertex_t_.size(); ++k)
    for (std::size_t j = 0; j < prevertex_t_.size(); ++j)
      for (int n = -1; n <= 1; ++n) {
        if (j == k && n == 0) continue;
        sep = std::min(sep, std::abs(prevertex_t_[k] - prevertex_t_[j] - double(n)));
      }
  corner_radius_ = std::min(0.25 * sep, 0.5 * c);

  corner_image_radius_.assign(prevertex_t_.size(), 0.0);
  for (std::size_t k = 0; k < prevertex_t_.size(); ++k) {
    if (prevertex_beta_[k] == 0.0) continue;
    const double r = 0.5 * corner_radius_;
    const double inward = k < a_lower_.size() ? 1.0 : -1.0;
    double R = std::numeric_limits<double>::infinity();
    for (double ang : {0.1, 0.5, 0.9}) {
      const cplx delta = std::polar(r, inward * pi * ang);
      const cplx lg = (1.0 + prevertex_beta_[k]) * std::log(delta);
      R = std::min(R, std::abs(std::exp(lg) * corner_integral(static_cast<int>(k), delta)));
    }
    corner_image_radius_[k] = 0.5 * R;
  }
}

cplx ScAnnulusMap::log_h(cplx w, const cplx* t, int corner, cplx delta) const {
  auto S = [&](cplx u) {
    cplx s = 0.0;
    for (double m : mu_pow_) s += std::log(1.0 - m * u) + std::log(1.0 - m / u);
    return s;
  };
  const std::size_t nl = a_lower_.size();
  cplx acc = 0.0;
  for (std::size_t k = 0; k < nl; ++k) {
    const double b = params_.beta_lower[k];
    if (b == 0.0) continue;
    const cplx u = w / a_lower_[k];
    cplx lf;
    if (static_cast<int>(k) == corner) {
      // log((1 - u) / delta), finite at delta = 0
      const cplx x = I * (2.0 * pi) * delta;
      lf = std::abs(x) < 1e-300 ? std::log(-I * (2.0 * pi)) : std::log(-cexpm1(x) / delta);
    } else {
      // 1 - u = -expm1(i 2 pi (t - p_k)) on the lower circle
      lf = std::log(t ? -cexpm1(I * (2.0 * pi) * (*t - prevertex_t_[k])) : 1.0 - u);
    }
    acc += b * (lf + S(u));
  }
  for (std::size_t k = 0; k < a_upper_.size(); ++k) {
    const double b = params_.beta_upper[k];
    if (b == 0.0) continue;
    const cplx u = w / a_upper_[k];
    cplx lf;
    if (static_cast<int>(nl + k) == corner) {
      const cplx x = -I * (2.0 * pi) * delta;
      lf = std::abs(x) < 1e-300 ? std::log(I * (2.0 * pi)) : std::log(-cexpm1(x) / delta);
    } else {
      lf = std::log(t ? -cexpm1(-I * (2.0 * pi) * (*t - prevertex_t_[nl + k])) : 1.0 - 1.0 / u);
    }
    acc += b * (lf + S(u));
  }
  return acc;
}

cplx ScAnnulusMap::corner_factor(int k, cplx delta) const {
  const cplx t = prevertex_t_[k] + delta;
  const cplx w = std::exp(I * (2.0 * pi * t) - log_rho());
  return std::exp(log_h(w, &t, k, delta)) / h0_;
}

cplx ScAnnulusMap::corner_integral(int k, cplx delta) const {
  const QuadratureRule& r = jacobi_rule(k);
  const double b = prevertex_beta_[k];
  cplx s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * corner_factor(k, 0.5 * (1.0 + r.nodes[i]) * delta);
  return std::pow(2.0, -1.0 - b) * s;
}

bool ScAnnulusMap::lift_near_corner(cplx z0, LiftPoint& out) const {
  int kbest = -1;
  double shift = 0.0, dbest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prevertex_t_.size(); ++k) {
    if (prevertex_beta_[k] == 0.0) continue;
    for (int n = -1; n <= 2; ++n) {
      const double d = std::abs(z0 - vertex_image_[k] - double(n));
      if (d < corner_image_radius_[k] && d < dbest) {
        dbest = d;
        kbest = static_cast<int>(k);
        shift = n;
      }
    }
  }
  if (kbest < 0) return false;
  const int k = kbest;
  const cplx w = z0 - vertex_image_[k] - shift;
  if (w == cplx(0.0)) return false;
  const double p = 1.0 + prevertex_beta_[k];
  const bool lower = static_cast<std::size_t>(k) < a_lower_.size();
  // delta^p J(delta) = w, delta in the half plane pointing into the strip
  auto root = [&](cplx J, cplx& delta) {
    const cplx lw = std::log(w / J);
    for (int m = -2; m <= 2; ++m) {
      const cplx ld = (lw + I * (2.0 * pi * m)) / p;
      const double a = ld.imag();
      if (lower ? (a > 0.0 && a < pi) : (a < 0.0 && a > -pi)) {
        delta = std::exp(ld);
        return true;
      }
    }
    return false;
  };
  cplx delta = (lower ? I : -I) * (1e-3 * corner_radius_);
  bool done = false;
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 40; ++it) {
    cplx next;
    if (!root(corner_integral(k, delta), next)) return false;
    const double step = std::abs(next - delta);
    delta = next;
    // converged, or stagnating at rounding level
    if (step <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(delta) ||
        (it > 2 && step >= last && step <= 1e-10 * std::abs(delta))) {
      done = true;
      break;
    }
    last = step;
  }
  if (!done || !(std::abs(delta) < corner_radius_)) return false;
  const cplx h = std::exp(prevertex_beta_[k] * std::log(delta)) * corner_factor(k, delta);
  out = {prevertex_t_[k] + shift + delta, 1.0 / h};
  return std::isfinite(out.dphi.real()) && std::isfinite(out.dphi.imag());
}

cplx ScAnnulusMap::strip_derivative(cplx t) const {
  const cplx w = std::exp(I * (2.0 * pi * t) - log_rho());
  return std::exp(log_h(w, &t)) / h0_;
}

int ScAnnulusMap::singular_index(cplx t) const {
  for (std::size_t k = 0; k < prevertex_t_.size(); ++k) {
    cplx d = t - prevertex_t_[k];
    d -= std::round(d.real());
    if (std::abs(d) < kSamePoint) return static_cast<int>(k);
  }
  return -1;
}

double ScAnnulusMap::nearest_singularity(cplx t, int exclude) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prevertex_t_.size(); ++k) {
    for (int n = -2; n <= 2; ++n) {
      const cplx p = prevertex_t_[k] + double(n);
      const double d = std::abs(t - p);
      if (static_cast<int>(k) == exclude && d < kSamePoint) continue;
      best = std::min(best, d);
    }
  }
  return best;
}

const QuadratureRule& ScAnnulusMap::jacobi_rule(int index) const { return jacobi_[index]; }

cplx ScAnnulusMap::integrate_segment(cplx t0, cplx t1) const {
  const cplx D = t1 - t0;
  const double len = std::abs(D);
  if (len == 0.0) return 0.0;
  const cplx u = D / len;

  const int s0 = singular_index(t0), s1 = singular_index(t1);
  for (std::size_t k = 0; k < prevertex_t_.size(); ++k) {
    for (int n = -2; n <= 2; ++n) {
      const cplx rel = (prevertex_t_[k] + double(n) - t0) * std::conj(u);
      if (rel.real() > kSamePoint && rel.real() < len - kSamePoint && std::abs(rel.imag()) < kSamePoint)
        throw Error(ErrorKind::PathThroughPrevertex, "integration path meets a prevertex");
    }
  }

  // A single singular end whose neighbourhood holds the whole segment is
  // covered by the Jacobi rule alone.
  const double cap = (s0 >= 0 && s1 >= 0) ? 0.45 * len : 0.9 * len;
  auto reach = [&](cplx te, int se) {
    const double r = 0.5 * nearest_singularity(te, se);
    return (s0 >= 0) != (s1 >= 0) && r >= len ? len : std::min(cap, r);
  };
  const double L0 = s0 >= 0 ? reach(t0, s0) : 0.0;
  const double L1 = s1 >= 0 ? reach(t1, s1) : 0.0;

  auto jacobi_piece = [&](cplx tp, cplx dir, double L, int k) {
    const QuadratureRule& r = jacobi_rule(k);
    const double b = prevertex_beta_[k];
    cplx s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double xi = 1.0 + r.nodes[i];
      s += r.weights[i] * strip_derivative(tp + dir * (0.5 * L * xi)) * std::pow(xi, -b);
    }
    return 0.5 * L * s;
  };

  cplx total = 0.0;
  if (s0 >= 0) total += u * jacobi_piece(t0, u, L0, s0);
  if (s1 >= 0) total += u * jacobi_piece(t1, -u, L1, s1);
  if (L0 + L1 < len) {
    const cplx a = t0 + L0 * u, b = t1 - L1 * u;
    const cplx span = b - a;
    const auto mid = integrate_interval(
        [&](double s) { return strip_derivative(a + s * span) * span; }, 0.0, 1.0, 1e-11, 18);
    total += mid.value;
  }
  if (!std::isfinite(total.real()) || !std::isfinite(total.imag()))
    throw Error(ErrorKind::QuadratureFailure, "non-finite SC segment integral");
  return total;
}

void ScAnnulusMap::ensure_table() const {
  std::call_once(table_once_, [this] {
    const double c = strip_half_width();
    table_t_.assign(kTableColumns * kTableRows, 0.0);
    table_g_.assign(kTableColumns * kTableRows, 0.0);
    const int i0 = 8;  // column with Re t = 0
    for (int j = 0; j < kTableRows; ++j) {
      const double y = -c + 2.0 * c * (j + 0.5) / kTableRows;
      auto at = [&](int i) { return cplx(-0.25 + i / 32.0, y); };
      const int base_idx = j * kTableColumns;
      table_t_[base_idx + i0] = at(i0);
      table_g_[base_idx + i0] = params_.base + integrate_segment(0.0, at(i0));
      for (int i = i0 + 1; i < kTableColumns; ++i) {
        table_t_[base_idx + i] = at(i);
        table_g_[base_idx + i] = table_g_[base_idx + i - 1] + integrate_segment(at(i - 1), at(i));
      }
      for (int i = i0 - 1; i >= 0; --i) {
        table_t_[base_idx + i] = at(i);
        table_g_[base_idx + i] = table_g_[base_idx + i + 1] + integrate_segment(at(i + 1), at(i));
      }
    }
  });
}

LiftPoint ScAnnulusMap::unlift_point(cplx t) const {
  ensure_table();
  const double n = std::floor(t.real());
  const cplx t0 = t - n;
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < table_t_.size(); ++k) {
    const double d = std::abs(table_t_[k] - t0);
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  const cplx g = table_g_[best] + integrate_segment(table_t_[best], t0);
  return {g + n, strip_derivative(t0)};
}

LiftPoint ScAnnulusMap::lift_point(cplx z) const {
  ensure_table();
  const double c = strip_half_width();
  const double m = std::floor(z.real());
  const cplx z0 = z - m;
  if (LiftPoint near; lift_near_corner(z0, near)) return {near.phi + m, near.dphi};

  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < table_g_.size(); ++k) {
    const double d = std::abs(table_g_[k] - z0);
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  cplx t = table_t_[best];
  cplx g = table_g_[best];
  const double tol = 1e-14 * (1.0 + std::abs(z0));

  // Nearest prevertex (with its translate) when t is inside the corner radius.
  struct Corner {
    int k = -1;
    double shift = 0.0;
  };
  auto corner_at = [&](cplx tt) {
    Corner best_c;
    double bdist = corner_radius_;
    for (std::size_t k = 0; k < prevertex_t_.size(); ++k)
      for (int n = -1; n <= 2; ++n) {
        const double d = std::abs(tt - prevertex_t_[k] - double(n));
        if (d < bdist) {
          bdist = d;
          best_c = {static_cast<int>(k), double(n)};
        }
      }
    return best_c;
  };
  // Map value at t, integrated from the closest anchor: a prevertex inside
  // the corner radius (its singularity is absorbed by the Jacobi rule),
  // otherwise the nearest table entry.
  auto value_at = [&](cplx tt) {
    const Corner cr = corner_at(tt);
    if (cr.k >= 0) {
      const cplx pk = prevertex_t_[cr.k] + cr.shift;
      if (std::abs(tt - pk) < kSamePoint) return vertex_image_[cr.k] + cr.shift;
      return vertex_image_[cr.k] + cr.shift + integrate_segment(pk, tt);
    }
    std::size_t a = 0;
    double ad = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < table_t_.size(); ++k) {
      const double d = std::abs(table_t_[k] - tt);
      if (d < ad) {
        ad = d;
        a = k;
      }
    }
    return table_g_[a] + integrate_segment(table_t_[a], tt);
  };
  auto inside = [&](cplx tt) { return std::abs(tt.imag()) < c * (1.0 - 1e-14); };

  bool polished = false;
  for (int it = 0; it < 80; ++it) {
    const cplx F = g - z0;
    // t carries about one ulp; near a prevertex that limits how close g gets.
    const double floor_t = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(strip_derivative(t));
    if (std::abs(F) <= std::max(tol, floor_t)) {
      if (polished) break;
      // Recompute from the nearest anchor to shed accumulated drift.
      g = value_at(t);
      polished = true;
      continue;
    }
    const Corner cr = corner_at(t);
    bool accepted = false;
    if (cr.k >= 0) {
      // g - v_k ~ (t - p_k)^(1 + beta_k) near the prevertex: step in that power.
      const cplx pk = prevertex_t_[cr.k] + cr.shift;
      const cplx vk = vertex_image_[cr.k] + cr.shift;
      const cplx ratio = (z0 - vk) / (g - vk);
      const double p = 1.0 + prevertex_beta_[cr.k];
      if (std::abs(g - vk) > 0.0 && std::abs(std::arg(ratio)) < 0.5 * pi) {
        const cplx lr = std::log(ratio) / p;
        // at most a factor e^8 per step
        double lam = std::min(1.0, 8.0 / std::max(1e-300, std::abs(lr.real())));
        for (int k = 0; k < 40 && !accepted; ++k, lam *= 0.5) {
          const cplx tn = pk + (t - pk) * std::exp(lam * lr);
          if (!inside(tn)) continue;
          const cplx gn = value_at(tn);
          if (std::abs(gn - z0) < std::abs(F)) {
            t = tn;
            g = gn;
            accepted = true;
          }
        }
      }
    }
    if (!accepted) {
      const cplx d = strip_derivative(t);
      if (!std::isfinite(d.real()) || std::abs(d) == 0.0)
        throw Error(ErrorKind::MapEvaluationFailure, "vanishing derivative in map inversion");
      const cplx dt = -F / d;
      double lam = 1.0;
      for (int k = 0; k < 50; ++k) {
        const cplx tn = t + lam * dt;
        if (inside(tn)) {
          const cplx gn = cr.k >= 0 || corner_at(tn).k >= 0 ? value_at(tn) : g + integrate_segment(t, tn);
          if (std::abs(gn - z0) < std::abs(F) || lam < 1e-10) {
            t = tn;
            g = gn;
            accepted = true;
            break;
          }
        }
        lam *= 0.5;
      }
    }
    if (!accepted)
      throw Error(ErrorKind::OutOfDomain, "point appears to lie outside the channel");
  }
  const double accept =
      std::max(1e-10, std::min(1e-6, 64.0 * std::numeric_limits<double>::epsilon() *
                                          std::abs(strip_derivative(t))));
  if (!(std::abs(g - z0) <= accept)) {
    std::ostringstream os;
    os << "map inversion did not converge at z = " << z << " (residual " << std::abs(g - z0) << ")";
    throw Error(ErrorKind::MapEvaluationFailure, os.str());
  }
  const cplx d = strip_derivative(t);
  const cplx dphi = 1.0 / d;
  if (!std::isfinite(dphi.real()) || !std::isfinite(dphi.imag()))
    throw Error(ErrorKind::DerivativeUnavailable, "derivative undefined at a corner");
  return {t + m, dphi};
}

cplx ScAnnulusMap::channel(cplx zeta) const {
  const double r = std::abs(zeta);
  if (r == 0.0) throw Error(ErrorKind::OutOfDomain, "zeta = 0 is outside the annulus");
  const double c = strip_half_width();
  const cplx tr(0.0, -std::log(r) / (2.0 * pi));
  if (std::abs(tr.imag()) > c * (1.0 + 1e-12))
    throw Error(ErrorKind::OutOfDomain, "zeta outside the closed annulus");
  const double theta = arg_in_window(zeta, 0.0);
  const cplx tend = tr + theta / (2.0 * pi);
  return params_.base + integrate_segment(0.0, tr) + integrate_segment(tr, tend);
}

std::vector<cplx> ScAnnulusMap::vertex_errors() const {
  std::vector<cplx> out;
  out.reserve(prevertex_t_.size());
  for (std::size_t k = 0; k < prevertex_t_.size(); ++k)
    out.push_back(params_.base + integrate_segment(0.0, prevertex_t_[k]) - targets_[k]);
  return out;
}

double ScAnnulusMap::vertex_residual() const {
  double worst = 0.0;
  for (cplx e : vertex_errors()) worst = std::max(worst, std::abs(e));
  return worst;
}

std::shared_ptr<const ScAnnulusMap> make_sc_map(const PeriodicCellSpec& spec,
                                                const SCParams& params) {
  build_cell(spec);
  return std::make_shared<ScAnnulusMap>(spec, params);
}

cplx sc_channel_map(cplx zeta, const SCParams& params, const PeriodicCellSpec& spec) {
  return ScAnnulusMap(spec, params).channel(zeta);
}

SCParams solve_sc_parameters(const PeriodicCellSpec& spec, const std::optional<SCParams>& init,
                             const ScSolveOptions& options) {
  const CellRegion region = build_cell(spec);
  const PhysicalPolyline lower = physical(spec.lower_vertices, spec.beta_lower);
  const PhysicalPolyline upper = physical(spec.upper_vertices, spec.beta_upper);
  const int p0 = static_cast<int>(lower.targets.size());
  const int p1 = static_cast<int>(upper.targets.size());
  const int nparam = p0 + p1;

  auto angles_from_logits = [](const double* logits, int p, double start) {
    std::vector<double> w(p);
    double mx = 0.0;
    for (int k = 0; k < p; ++k) mx = std::max(mx, k == 0 ? 0.0 : logits[k - 1]);
    double sum = 0.0;
    for (int k = 0; k < p; ++k) {
      w[k] = std::exp((k == 0 ? 0.0 : logits[k - 1]) - mx);
      sum += w[k];
    }
    std::vector<double> th(p);
    double acc = start;
    for (int k = 0; k < p; ++k) {
      th[k] = acc;
      acc += 2.0 * pi * w[k] / sum;
    }
    return th;
  };

  auto decode = [&](const Eigen::VectorXd& x) {
    SCParams p;
    p.rho = std::exp(std::exp(x(0)));
    p.theta_lower = angles_from_logits(x.data() + 1, p0, 0.0);
    p.theta_upper = angles_from_logits(x.data() + p0 + 1, p1, x(p0));
    return p;
  };

  auto logits_from_angles = [](const std::vector<double>& th, double* out) {
    const int p = static_cast<int>(th.size());
    std::vector<double> gaps(p);
    for (int k = 0; k < p; ++k)
      gaps[k] = (k + 1 < p ? th[k + 1] : th[0] + 2.0 * pi) - th[k];
    for (int k = 1; k < p; ++k) out[k - 1] = std::log(gaps[k] / gaps[0]);
  };

  Eigen::VectorXd x0(nparam);
  const bool use_init = init && init->theta_lower.size() == std::size_t(p0) &&
                        init->theta_upper.size() == std::size_t(p1) && init->rho > 1.0;
  if (use_init) {
    x0(0) = std::log(std::log(init->rho));
    logits_from_angles(init->theta_lower, x0.data() + 1);
    x0(p0) = init->theta_upper.front();
    logits_from_angles(init->theta_upper, x0.data() + p0 + 1);
  } else {
    // Gaps proportional to the horizontal extent of each boundary piece.
    auto initial_angles = [](const PhysicalPolyline& pp) {
      const int p = static_cast<int>(pp.targets.size());
      std::vector<double> w(p);
      double total = 0.0;
      for (int k = 0; k < p; ++k) {
        const cplx a = pp.targets[k];
        const cplx b = k + 1 < p ? pp.targets[k + 1] : pp.targets[0] + 1.0;
        w[k] = std::abs((b - a).real()) + 0.1 * std::abs(b - a);
        total += w[k];
      }
      std::vector<double> th(p);
      double acc = 0.0;
      for (int k = 0; k < p; ++k) {
        th[k] = acc;
        acc += 2.0 * pi * w[k] / total;
      }
      return th;
    };
    x0(0) = std::log(pi * region.area);
    logits_from_angles(initial_angles(lower), x0.data() + 1);
    x0(p0) = 0.0;
    logits_from_angles(initial_angles(upper), x0.data() + p0 + 1);
  }

  const int nres = 2 * (p0 - 1 + p1);
  const ResidualFn residual = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(nres);
    try {
      const ScAnnulusMap m(spec, decode(x));
      const auto errs = m.vertex_errors();
      for (int k = 1; k < p0 + p1; ++k) {
        r(2 * (k - 1)) = errs[k].real();
        r(2 * (k - 1) + 1) = errs[k].imag();
      }
    } catch (const Error&) {
      r.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return r;
  };

  if (nres == 0) throw Error(ErrorKind::InvalidCell, "cell has no vertex conditions");
  if (!residual(x0).allFinite())
    throw Error(ErrorKind::DegenerateInitialization, "SC residual undefined at the initial guess");

  const NllsReport rep = nlls_solve(residual, x0, options.budget);
  SCParams out;
  double worst = std::numeric_limits<double>::infinity();
  try {
    const ScAnnulusMap m(spec, decode(rep.x));
    out = m.params();
    worst = m.vertex_residual();
  } catch (const Error& e) {
    throw Error(ErrorKind::NoConvergence, std::string("final iterate invalid: ") + e.what());
  }
  out.max_vertex_residual = worst;
  out.iterations = rep.iterations;
  out.converged = rep.converged && worst <= options.vertex_tol;
  out.status = rep.status;
  if (!(worst <= options.vertex_tol)) {
    std::ostringstream os;
    os << "vertex residual " << worst << " after " << rep.iterations << " iterations ("
       << rep.status << ")";
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  return out;
}

}  // namespace pbergman
