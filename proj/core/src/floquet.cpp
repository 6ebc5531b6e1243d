#include "pbergman/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "pbergman/error.hpp"

namespace pbergman {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * pi);

std::vector<double> eta_grid(int n) {
  std::vector<double> eta(n);
  for (int j = 0; j < n; ++j) eta[j] = -pi + 2.0 * pi * j / n;
  return eta;
}

cplx apply(const std::function<cplx(cplx)>& f, const std::optional<MollifierEps>& mol, cplx z) {
  return mol ? (*mol)(z)*f(z) : f(z);
}

// Sum of |f|^2 over the nodes of cells m in [m_lo, m_hi].
double shell_norm(const std::function<cplx(cplx)>& f, const std::optional<MollifierEps>& mol,
                  const std::vector<CellNode>& nodes, int m_lo, int m_hi) {
  double acc = 0.0;
  for (int m = m_lo; m <= m_hi; ++m)
    for (const auto& n : nodes) acc += n.weight * std::norm(apply(f, mol, n.z + double(m)));
  return acc;
}

}  // namespace

MollifierEps::MollifierEps(double e) : eps(e) {
  if (!(e > 0.0 && e <= 1.0)) throw Error(ErrorKind::InvalidArgument, "mollifier eps must lie in (0, 1]");
}

FloquetField::FloquetField(CellRegion region, int order, int edge_points, int n_eta)
    : region_(std::move(region)), order_(order) {
  if (order < 1 || edge_points < 0 || n_eta < 1)
    throw Error(ErrorKind::InvalidArgument, "FloquetField: bad grid sizes");
  nodes_ = cell_nodes(region_, order);
  if (edge_points > 0) {
    const auto& gl = cached_gauss_legendre(edge_points);
    const double a = region_.junction_low, b = region_.junction_high;
    for (double x : gl.nodes) edge_y_.push_back(0.5 * (a + b) + 0.5 * (b - a) * x);
  }
  eta_ = eta_grid(n_eta);
  for (const auto& n : nodes_) points_.push_back(n.z);
  for (double y : edge_y_) points_.push_back(cplx(0.0, y));
  for (double y : edge_y_) points_.push_back(cplx(1.0, y));
  values_.assign(points_.size() * eta_.size(), cplx(0.0));
}

std::vector<std::pair<std::size_t, double>> FloquetField::interpolation_stencil(cplx z0) const {
  const double x = z0.real(), y = z0.imag();
  const int s = region_.slab_index(x);
  if (s < 0 || !region_.contains(z0))
    throw Error(ErrorKind::OutOfDomain, "interpolation point outside the base cell");
  const Slab& slab = region_.slabs[s];
  const double lo = slab.lower_at(x), hi = slab.upper_at(x);
  const double u = 2.0 * (x - slab.x0) / (slab.x1 - slab.x0) - 1.0;
  const double v = 2.0 * (y - lo) / (hi - lo) - 1.0;
  const auto& gl = cached_gauss_legendre(order_);
  const BarycentricInterpolant interp(gl.nodes);
  const auto bu = interp.basis(u), bv = interp.basis(v);
  std::vector<std::pair<std::size_t, double>> stencil;
  const std::size_t base = static_cast<std::size_t>(s) * order_ * order_;
  for (int iu = 0; iu < order_; ++iu) {
    if (bu[iu] == 0.0) continue;
    for (int iv = 0; iv < order_; ++iv) {
      if (bv[iv] == 0.0) continue;
      stencil.emplace_back(base + static_cast<std::size_t>(iu) * order_ + iv, bu[iu] * bv[iv]);
    }
  }
  return stencil;
}

cplx FloquetField::interpolate(cplx z0, std::size_t j) const {
  cplx acc = 0.0;
  for (const auto& [idx, w] : interpolation_stencil(z0)) acc += w * at(idx, j);
  return acc;
}

bool FloquetField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

cplx floquet_forward_point(const std::function<cplx(cplx)>& f, cplx z, double eta, int m_lo,
                           int m_hi, const std::optional<MollifierEps>& mollifier) {
  cplx acc = 0.0;
  for (int m = m_lo; m <= m_hi; ++m)
    acc += std::exp(cplx(0.0, -eta * m)) * apply(f, mollifier, z + double(m));
  return kInvSqrt2Pi * acc;
}

FloquetField floquet_forward(const SampledFunction& f, const CellRegion& region,
                             const std::optional<MollifierEps>& mollifier,
                             const ForwardOptions& options, ForwardReport* report) {
  if (!f.f) throw Error(ErrorKind::InvalidArgument, "floquet_forward: empty function");
  const auto nodes = cell_nodes(region, options.order);
  ForwardReport rep;
  int M = f.window;
  if (M < 0) throw Error(ErrorKind::InvalidArgument, "floquet_forward: negative window");
  if (M == 0) {
    M = 8;
    double norm = shell_norm(f.f, mollifier, nodes, -M, M);
    for (;;) {
      const int M2 = 2 * M;
      const double shell = shell_norm(f.f, mollifier, nodes, -M2, -M - 1) +
                           shell_norm(f.f, mollifier, nodes, M + 1, M2);
      norm += shell;
      M = M2;
      rep.last_shell = shell;
      if (shell <= options.shell_tol * norm) break;
      if (M >= options.max_window) {
        rep.truncation_warning = true;
        rep.message = "outer shell still above tolerance at the maximum window";
        break;
      }
    }
    rep.running_norm = norm;
  } else {
    rep.running_norm = shell_norm(f.f, mollifier, nodes, -M, M);
  }
  rep.window = M;

  const int n_eta = std::max(options.n_eta, 2 * M + 1);
  FloquetField g(region, options.order, options.edge_points, n_eta);
  g.bandwidth = M;
  const auto& eta = g.eta();
  const auto& pts = g.points();
  std::vector<cplx> samples(2 * M + 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int m = -M; m <= M; ++m) samples[m + M] = apply(f.f, mollifier, pts[i] + double(m));
    for (std::size_t j = 0; j < eta.size(); ++j) {
      // e^{-i eta m} by recurrence from m = -M
      const cplx step = std::exp(cplx(0.0, -eta[j]));
      cplx ph = std::exp(cplx(0.0, eta[j] * M));
      cplx acc = 0.0;
      for (int k = 0; k <= 2 * M; ++k) {
        acc += ph * samples[k];
        ph *= step;
        if ((k & 63) == 63) ph = std::exp(cplx(0.0, -eta[j] * (k + 1 - M)));
      }
      g.at(i, j) = kInvSqrt2Pi * acc;
    }
  }
  if (!g.all_finite()) throw Error(ErrorKind::InvalidArgument, "floquet_forward: non-finite samples");
  if (report) *report = rep;
  return g;
}

cplx floquet_inverse(const FloquetField& g, cplx z, double tol) {
  const double m = std::floor(z.real());
  const cplx z0 = z - m;
  const auto stencil = g.interpolation_stencil(z0);
  const auto& eta = g.eta();
  const std::size_t N = eta.size();
  auto sum_over = [&](std::size_t stride) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < N; j += stride) {
      cplx v = 0.0;
      for (const auto& [idx, w] : stencil) v += w * g.at(idx, j);
      acc += std::exp(cplx(0.0, eta[j] * m)) * v;
    }
    return kInvSqrt2Pi * (2.0 * pi * stride / N) * acc;
  };
  const cplx full = sum_over(1);
  if (g.bandwidth >= 0) {
    if (static_cast<double>(g.bandwidth) + std::abs(m) >= static_cast<double>(N))
      throw Error(ErrorKind::GridTooCoarse, "eta grid too coarse for the requested period");
    return full;
  }
  if (N % 2 == 0) {
    const cplx half = sum_over(2);
    if (std::abs(full - half) > tol * std::max(1.0, std::abs(full)))
      throw Error(ErrorKind::GridTooCoarse, "eta quadrature self-estimate above tolerance");
  }
  return full;
}

QuasiperiodicityReport check_quasiperiodicity(const FloquetField& g, double tol) {
  QuasiperiodicityReport rep;
  rep.tol = tol;
  const auto& eta = g.eta();
  for (std::size_t k = 0; k < g.edge_heights().size(); ++k) {
    const std::size_t l = g.left_edge_index(k), r = g.right_edge_index(k);
    for (std::size_t j = 0; j < eta.size(); ++j) {
      const double d = std::abs(g.at(r, j) - std::exp(cplx(0.0, eta[j])) * g.at(l, j));
      rep.max_residual = std::max(rep.max_residual, d);
    }
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

cplx transform_inner_product(const FloquetField& a, const FloquetField& b) {
  if (a.num_eta() != b.num_eta() || a.nodes().size() != b.nodes().size())
    throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
  const std::size_t N = a.num_eta();
  std::vector<cplx> per_eta(N);
  for (std::size_t j = 0; j < N; ++j) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.nodes().size(); ++i)
      acc += a.nodes()[i].weight * a.at(i, j) * std::conj(b.at(i, j));
    per_eta[j] = acc;
  }
  return (2.0 * pi / N) * pairwise_sum(per_eta);
}

IsometryReport isometry_check(const SampledFunction& f, const CellRegion& region,
                              const std::optional<MollifierEps>& mollifier,
                              const ForwardOptions& options) {
  ForwardReport fr;
  const FloquetField g = floquet_forward(f, region, mollifier, options, &fr);
  IsometryReport rep;
  rep.window = fr.window;
  rep.norm_domain_sq = fr.running_norm;
  rep.norm_transform_sq = transform_inner_product(g, g).real();
  rep.relative_gap = std::abs(rep.norm_transform_sq - rep.norm_domain_sq) / rep.norm_domain_sq;
  return rep;
}

std::vector<DivergenceRow> divergence_demo(long M, int levels, cplx z) {
  if (M < 1 || levels < 1) throw Error(ErrorKind::InvalidArgument, "divergence_demo: M, levels >= 1");
  std::vector<DivergenceRow> rows;
  // Kahan-compensated running sums.
  cplx one = 0.0, one_c = 0.0, sym = 1.0 / z, sym_c = 0.0;
  auto add = [](cplx& s, cplx& c, cplx t) {
    const cplx y = t - c;
    const cplx u = s + y;
    c = (u - s) - y;
    s = u;
  };
  long m = 0;
  long target = M;
  for (int l = 0; l < levels; ++l) {
    for (; m < target;) {
      ++m;
      const double md = static_cast<double>(m);
      add(one, one_c, 1.0 / (z + md));
      add(sym, sym_c, 2.0 * z / (z * z - md * md));
    }
    DivergenceRow r;
    r.M = target;
    r.one_sided = one;
    r.minus_log = one.real() - std::log(static_cast<double>(target));
    r.symmetric = sym;
    rows.push_back(r);
    target *= 2;
  }
  return rows;
}

void write_field_csv(const FloquetField& g, std::ostream& out) {
  out << "re_z,im_z,eta,re_g,im_g\n";
  out << std::setprecision(17);
  const auto& pts = g.points();
  const auto& eta = g.eta();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < eta.size(); ++j) {
      const cplx v = g.at(i, j);
      out << pts[i].real() << ',' << pts[i].imag() << ',' << eta[j] << ',' << v.real() << ','
          << v.imag() << '\n';
    }
}

}  // namespace pbergman
