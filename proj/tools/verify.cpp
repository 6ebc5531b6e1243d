#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pbergman/analysis.hpp"
#include "pbergman/error.hpp"
#include "pbergman/floquet.hpp"

namespace pbergman::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Interior probe points of the base cell, away from the boundary.
std::vector<cplx> interior_points(const KernelContext& ctx) {
  return default_decay_probes(ctx, 3, 0.3);
}

cplx random_cell_point(const KernelContext& ctx, std::mt19937_64& rng) {
  const double M = ctx.map().cell().height_bound;
  std::uniform_real_distribution<double> ux(0.02, 0.98), uy(-M, M);
  for (;;) {
    const cplx z(ux(rng), uy(rng));
    if (ctx.region.contains(z, 0.05)) return z;
  }
}

double max_rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

struct Suite {
  const KernelContext& ctx;
  const VerifyOptions& opt;
  std::vector<CheckResult> results;

  void add(const std::string& name, double value, double bound) {
    const double b = bound * opt.tol_scale;
    results.push_back({name, value, b, std::isfinite(value) && value < b});
  }

  // Runs f and records its value; library errors turn into a failed check.
  template <class F>
  void check(const std::string& name, double bound, F&& f) {
    double v = kInf;
    try {
      v = f();
    } catch (const Error&) {
      v = kInf;
    }
    add(name, v, bound);
  }
};

}  // namespace

std::vector<CheckResult> run_verify_suite(const KernelContext& ctx, const VerifyOptions& opt) {
  Suite s{ctx, opt, {}};
  const double L = ctx.log_rho();
  const double L_closed = std::log(ctx.rho() * (1.0 + opt.rho_perturb));
  const auto probes = interior_points(ctx);

  // three-period probe pairs
  std::vector<std::pair<cplx, cplx>> pairs;
  for (int m = 0; m <= 2; ++m)
    for (std::size_t a = 0; a < probes.size(); a += 3)
      for (std::size_t b = 1; b < probes.size(); b += 4) pairs.emplace_back(probes[a] + double(m), probes[b]);

  s.check("closed_vs_eta_assembly", 1e-5, [&] {
    double worst = 0.0;
    for (auto [z, w] : pairs) {
      const cplx c = periodic_kernel_closed(ctx.lift_at(z), ctx.lift_at(w), L_closed);
      worst = std::max(worst, max_rel(periodic_kernel_eta_assembly(ctx, z, w), c));
    }
    return worst;
  });
  s.check("closed_vs_t_integral", 1e-5, [&] {
    double worst = 0.0;
    for (auto [z, w] : pairs) {
      const cplx c = periodic_kernel_closed(ctx.lift_at(z), ctx.lift_at(w), L_closed);
      worst = std::max(worst, max_rel(periodic_kernel_t_integral(ctx, z, w), c));
    }
    return worst;
  });

  std::mt19937_64 rng(opt.seed);
  std::vector<std::pair<cplx, cplx>> random_pairs;
  for (int i = 0; i < 20; ++i) random_pairs.emplace_back(random_cell_point(ctx, rng), random_cell_point(ctx, rng));
  s.check("hermitian_symmetry", 1e-9, [&] {
    double worst = 0.0;
    for (auto [z, w] : random_pairs) {
      const cplx a = periodic_kernel_closed(ctx, z + 1.0, w), b = periodic_kernel_closed(ctx, w, z + 1.0);
      worst = std::max(worst, std::abs(a - std::conj(b)) / std::abs(a));
      const cplx c = cell_kernel_eta(ctx, z, w, 1.0), d = cell_kernel_eta(ctx, w, z, 1.0);
      worst = std::max(worst, std::abs(c - std::conj(d)) / std::abs(c));
    }
    return worst;
  });
  s.check("diagonal_positivity", 1e-10, [&] {
    double worst = 0.0;
    for (auto [z, w] : random_pairs) {
      (void)w;
      const cplx k = periodic_kernel_closed(ctx, z, z);
      if (!(k.real() > 0.0)) return kInf;
      worst = std::max(worst, std::abs(k.imag()) / k.real());
    }
    return worst;
  });

  // Floquet transform of a Gaussian
  const SampledFunction gauss{[](cplx z) { return std::exp(-z * z); }, 8, "gaussian"};
  ForwardOptions fo;
  fo.n_eta = 64;
  std::optional<FloquetField> field;
  s.check("floquet_parseval", 5e-6, [&] {
    const auto rep = isometry_check(gauss, ctx.region, std::nullopt, fo);
    return rep.relative_gap;
  });
  s.check("floquet_round_trip", 1e-6, [&] {
    field = floquet_forward(gauss, ctx.region, std::nullopt, fo);
    double worst = 0.0;
    for (int m = -2; m <= 2; ++m)
      for (std::size_t i = 0; i < probes.size(); i += 3) {
        const cplx z = probes[i] + double(m);
        worst = std::max(worst, std::abs(floquet_inverse(*field, z) - gauss.f(z)));
      }
    return worst;
  });
  s.check("floquet_quasiperiodicity", 1e-8, [&] {
    if (!field) field = floquet_forward(gauss, ctx.region, std::nullopt, fo);
    return check_quasiperiodicity(*field, 1e-8).max_residual;
  });

  // Gram matrix of the annulus basis, polar quadrature on A
  s.check("basis_gram", 1e-8, [&] {
    const int nr = 96, nt = 40, nmax = 4;
    const auto& gl = cached_gauss_legendre(nr);
    const double cut = ctx.lifted.cut_angle();
    double worst = 0.0;
    for (double eta : {0.0, 1.0, pi - 0.1}) {
      std::vector<std::vector<cplx>> vals(2 * nmax + 1);
      std::vector<double> wts;
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j) {
          const double sr = L * gl.nodes[i];
          const double th = cut + 2.0 * pi * (j + 0.5) / nt;
          const cplx zeta = std::polar(std::exp(sr), th);
          const cplx v = ctx.weights.v(zeta);
          wts.push_back(L * gl.weights[i] * (2.0 * pi / nt) * std::exp(2.0 * sr) * std::norm(v));
          for (int n = -nmax; n <= nmax; ++n) vals[n + nmax].push_back(basis_fn(n, eta, zeta, v, ctx.rho(), cut));
        }
      for (int a = 0; a <= 2 * nmax; ++a)
        for (int b = 0; b <= 2 * nmax; ++b) {
          cplx g = 0.0;
          for (std::size_t k = 0; k < wts.size(); ++k) g += wts[k] * vals[a][k] * std::conj(vals[b][k]);
          worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
        }
    }
    return worst;
  });

  // |P e_n - e_n| at interior points; ||e_n|| = 1, so this is relative to the norm
  s.check("reproducing_pointwise", 1e-6, [&] {
    const double eta = 1.0;
    const CellKernelEvaluator K(eta, L, ctx.series);
    const auto nodes = graded_cell_nodes(ctx.region, 12, 6);
    std::vector<LiftPoint> lw;
    for (const auto& n : nodes) lw.push_back(ctx.lift_at(n.z));
    double worst = 0.0;
    for (std::size_t i = 0; i < probes.size(); i += 2) {
      const LiftPoint lz = ctx.lift_at(probes[i]);
      cplx acc[3] = {0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const cplx kw = nodes[k].weight * K(lz, lw[k]);
        for (int n = -1; n <= 1; ++n) acc[n + 1] += kw * pulled_back_basis(n, eta, lw[k], ctx.rho());
      }
      for (int n = -1; n <= 1; ++n)
        worst = std::max(worst, std::abs(acc[n + 1] - pulled_back_basis(n, eta, lz, ctx.rho())));
    }
    return worst;
  });

  s.check("fourier_identity", 1e-8, [&] {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const auto r = sech_fourier_identity(i * 1.0, 0.5 + j * 0.375);
        worst = std::max(worst, std::abs(r.lhs - r.rhs));
      }
    return worst;
  });

  s.check("decay_rate", 0.05, [&] {
    const auto fit = decay_profile(ctx, default_decay_probes(ctx), 8);
    return std::abs(fit.rate / fit.rate_full - 1.0);
  });

  s.check("schur_constant_weight", 0.01, [&] { return schur_bound(ctx, constant_weight(), 16).stability; });
  s.check("schur_stretched_weight", 0.01,
          [&] { return schur_bound(ctx, stretched_exponential_weight(0.5), 16).stability; });

  s.check("divergence_log_growth", 1e-3, [&] {
    const auto rows = divergence_demo(10000, 2);
    return std::abs((rows[1].one_sided.real() - rows[0].one_sided.real()) / std::log(2.0) - 1.0);
  });
  s.check("divergence_symmetric_cauchy", 1e-6, [&] {
    const auto rows = divergence_demo(1000000, 2);
    return std::abs(rows[1].symmetric - rows[0].symmetric);
  });

  return s.results;
}

}  // namespace pbergman::cli
