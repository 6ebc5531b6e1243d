// Acceptance runner: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pbergman/analysis.hpp"
#include "pbergman/confmap.hpp"
#include "pbergman/error.hpp"
#include "pbergman/floquet.hpp"
#include "pbergman/kernels.hpp"

using namespace pbergman;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

const KernelContext& strip_ctx() {
  static const KernelContext ctx(builtin_strip_map(0.5));
  return ctx;
}

struct Zigzag {
  PeriodicCellSpec spec;
  SCParams params;
  std::unique_ptr<KernelContext> ctx;
};

const Zigzag& zigzag() {
  static const Zigzag z = [] {
    Zigzag r{zigzag_cell(0.5), {}, nullptr};
    r.params = solve_sc_parameters(r.spec);
    r.ctx = std::make_unique<KernelContext>(make_sc_map(r.spec, r.params));
    return r;
  }();
  return z;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

Verdict strip_anchor() {
  const double anchor = std::abs(strip_kernel_sigma(0.0, 0.0) - 1.0 / (16.0 * pi));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(-0.95 * pi, 0.95 * pi);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx z(ux(rng), uy(rng)), w(ux(rng), uy(rng));
    const cplx k = strip_kernel_sigma(z, w);
    worst = std::max(worst, rel(periodic_kernel_closed({z, 1.0}, {w, 1.0}, 2.0 * pi * pi), k));
  }
  return {anchor < 1e-12 && worst < 1e-12,
          "|K(0,0) - 1/(16 pi)| = " + num(anchor) + ", closed vs strip max rel " + num(worst) + " (tol 1e-12)"};
}

// worst relative disagreement between the three kernel evaluations
double triple_gap(const KernelContext& ctx) {
  const auto probes = default_decay_probes(ctx, 3, 0.3);
  double worst = 0.0;
  for (int m = 0; m <= 2; ++m)
    for (std::size_t a = 0; a < probes.size(); a += 2)
      for (std::size_t b = 1; b < probes.size(); b += 3) {
        const cplx z = probes[a] + double(m), w = probes[b];
        const cplx c = periodic_kernel_closed(ctx, z, w);
        const cplx e = periodic_kernel_eta_assembly(ctx, z, w);
        const cplx t = periodic_kernel_t_integral(ctx, z, w);
        worst = std::max({worst, rel(e, c), rel(t, c), rel(t, e)});
      }
  return worst;
}

Verdict triple_consistency() {
  const double s = triple_gap(strip_ctx());
  const double z = triple_gap(*zigzag().ctx);
  return {s < 1e-5 && z < 1e-5, "strip " + num(s) + ", zigzag " + num(z) + " (tol 1e-5)"};
}

Verdict floquet_unitarity() {
  const CellRegion& region = strip_ctx().region;
  struct Case {
    const char* name;
    std::function<cplx(cplx)> f;
  };
  const std::vector<Case> cases = {
      {"gaussian", [](cplx z) { return std::exp(-z * z); }},
      // the mollifier makes the tail fast enough for adaptive truncation
      {"mollified_double_pole",
       [](cplx z) {
         const cplx d = z - 2.0 * I;
         return std::exp(-1e-3 * z * z) / (d * d);
       }},
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-2.0, 3.0), uy(-0.45, 0.45);
  std::vector<cplx> probes;
  for (int i = 0; i < 50; ++i) probes.emplace_back(ux(rng), uy(rng));

  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const SampledFunction f{c.f, 0, c.name};
    ForwardOptions opt;
    opt.order = 16;
    const auto iso = isometry_check(f, region, std::nullopt, opt);
    const double ratio_gap = std::abs(iso.norm_transform_sq / iso.norm_domain_sq - 1.0);
    const FloquetField g = floquet_forward(f, region, std::nullopt, opt);
    double trip = 0.0;
    for (cplx z : probes) trip = std::max(trip, std::abs(floquet_inverse(g, z) - c.f(z)));
    const double qp = check_quasiperiodicity(g, 1e-8).max_residual;
    ok = ok && ratio_gap < 5e-6 && trip < 1e-6 && qp < 1e-8;
    detail += std::string(detail.empty() ? "" : "; ") + c.name + ": |ratio-1| " + num(ratio_gap) + ", round trip " +
              num(trip) + ", quasiperiodicity " + num(qp);
  }
  return {ok, detail + " (tol 5e-6, 1e-6, 1e-8)"};
}

Verdict basis_orthonormality() {
  const auto& ctx = strip_ctx();
  const double L = ctx.log_rho(), cut = ctx.lifted.cut_angle();
  const auto gl = oracle::legendre(160);
  const int nt = 48, nmax = 8, nb = 2 * nmax + 1;
  double worst = 0.0;
  for (double eta : {0.0, 1.0, -1.0, pi - 0.1, -(pi - 0.1)}) {
    std::vector<double> wts;
    std::vector<std::vector<cplx>> vals(nb);
    for (std::size_t i = 0; i < gl.x.size(); ++i)
      for (int j = 0; j < nt; ++j) {
        const double s = L * gl.x[i];
        const cplx zeta = std::polar(std::exp(s), cut + 2.0 * pi * (j + 0.5) / nt);
        wts.push_back(L * gl.w[i] * (2.0 * pi / nt) * std::exp(2.0 * s) * ctx.weights.V(zeta));
        for (int n = -nmax; n <= nmax; ++n) vals[n + nmax].push_back(basis_fn(n, eta, zeta, ctx));
      }
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b) {
        cplx g = 0.0;
        for (std::size_t k = 0; k < wts.size(); ++k) g += wts[k] * vals[a][k] * std::conj(vals[b][k]);
        worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
      }
  }
  return {worst < 1e-8, "max |G - I| = " + num(worst) + " over |n| <= 8, 5 quasimomenta (tol 1e-8)"};
}

// P_eta f at the nodes of `outer`, integrating against a rule graded toward each node.
std::vector<cplx> apply_cell_projection(const KernelContext& ctx, double eta, const std::vector<oracle::Node>& outer,
                                        const std::function<cplx(cplx)>& f) {
  const CellKernelEvaluator K(eta, ctx.log_rho(), ctx.series);
  std::vector<cplx> out;
  for (const auto& o : outer) {
    const LiftPoint lz = ctx.lift_at(o.z);
    cplx acc = 0.0;
    for (const auto& node : oracle::strip_rule_for(o.z, 0.5, 8)) acc += node.w * K(lz, ctx.lift_at(node.z)) * f(node.z);
    out.push_back(acc);
  }
  return out;
}

Verdict reproducing_property() {
  const auto& ctx = strip_ctx();
  const double eta = 1.0;
  const auto outer = oracle::strip_tensor_rule(0.5, 16);
  auto span = [&](cplx w) {
    cplx s = 0.0;
    for (int n = -3; n <= 3; ++n) s += cplx(1.0 / (1.0 + std::abs(n)), 0.3 * n) * oracle::strip_basis(n, eta, w, pi);
    return s;
  };
  auto witness = [](cplx w) { return std::conj(w - cplx(0.5, 0.0)); };

  const auto pf = apply_cell_projection(ctx, eta, outer, span);
  const auto pw = apply_cell_projection(ctx, eta, outer, witness);
  double err = 0.0, norm = 0.0, pw_sq = 0.0, w_sq = 0.0;
  for (std::size_t k = 0; k < outer.size(); ++k) {
    err += outer[k].w * std::norm(pf[k] - span(outer[k].z));
    norm += outer[k].w * std::norm(span(outer[k].z));
    pw_sq += outer[k].w * std::norm(pw[k]);
    w_sq += outer[k].w * std::norm(witness(outer[k].z));
  }
  const double r = std::sqrt(err / norm), contraction = std::sqrt(pw_sq / w_sq);
  return {r < 1e-6 && contraction < 0.99,
          "||P f - f|| / ||f|| = " + num(r) + " (tol 1e-6); witness ||P g|| / ||g|| = " + num(contraction) +
              " (strict < 1)"};
}

Verdict fourier_identity() {
  double worst = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const auto r = sech_fourier_identity(i * 1.0, 0.5 + j * 0.375);
      worst = std::max(worst, std::abs(r.lhs - r.rhs));
    }
  return {worst < 1e-8, "max |lhs - rhs| = " + num(worst) + " on 5x5 grid (tol 1e-8)"};
}

Verdict decay_rate() {
  const auto& ctx = strip_ctx();
  const DecayFit fit = decay_profile(ctx, default_decay_probes(ctx), 8);
  const double gap = std::abs(fit.rate / pi - 1.0);
  return {gap < 0.05, "rate " + num(fit.rate) + ", |rate/pi - 1| = " + num(gap) + " (tol 0.05); " + fit.comparison()};
}

Verdict schur_boundedness() {
  const auto& ctx = strip_ctx();
  bool ok = true;
  std::string detail;
  for (const WeightSpec& w : {constant_weight(), stretched_exponential_weight(0.5)}) {
    const SchurReport r = schur_bound(ctx, w, 16);
    ok = ok && std::isfinite(r.sup_row) && r.stability < 0.01;
    detail += std::string(detail.empty() ? "" : "; ") + w.name + ": sup row " + num(r.sup_row) + ", change " +
              num(r.stability);
  }
  return {ok, detail + " (tol 0.01)"};
}

Verdict sc_solver() {
  const PeriodicCellSpec spec = rectangle_cell(0.5);
  const SCParams p = solve_sc_parameters(spec);
  const auto map = make_sc_map(spec, p);
  const auto builtin = builtin_strip_map(0.5);
  const double rho_err = std::abs(p.rho - std::exp(pi));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-0.49, 0.49);
  double dev = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx z(ux(rng), uy(rng));
    dev = std::max(dev, std::abs(map->lift_point(z).phi - builtin->lift_point(z).phi));
  }
  const Zigzag& zz = zigzag();
  const double zres = zz.params.max_vertex_residual;
  const double zgap = triple_gap(*zz.ctx);
  return {rho_err < 1e-6 && dev < 1e-8 && zres < 1e-8 && zgap < 1e-5,
          "|rho - e^pi| = " + num(rho_err) + " (tol 1e-6), map vs builtin " + num(dev) +
              " (tol 1e-8), zigzag residual " + num(zres) + " (tol 1e-8), zigzag triple gap " + num(zgap) +
              " (tol 1e-5)"};
}

Verdict divergence() {
  const auto rows = divergence_demo(10000, 2);
  const double growth = (rows[1].one_sided.real() - rows[0].one_sided.real()) / std::log(2.0);
  const double log_err = std::abs(growth - 1.0);
  const auto sym = divergence_demo(1000000, 2);
  const double sym_change = std::abs(sym[1].symmetric - sym[0].symmetric);
  return {log_err < 1e-3 && sym_change < 1e-6,
          "one-sided growth per ln 2 off by " + num(log_err) + " (tol 1e-3), symmetric change M -> 2M " +
              num(sym_change) + " (tol 1e-6)"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Verdict (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "strip anchor", 1.0, strip_anchor},
      {2, "triple kernel consistency", 180.0, triple_consistency},
      {3, "Floquet unitarity", 60.0, floquet_unitarity},
      {4, "basis orthonormality", 60.0, basis_orthonormality},
      {5, "reproducing property", 120.0, reproducing_property},
      {6, "Fourier identity", 10.0, fourier_identity},
      {7, "decay rate", 30.0, decay_rate},
      {8, "Schur boundedness", 60.0, schur_boundedness},
      {9, "SC solver", 300.0, sc_solver},
      {10, "divergence demo", 10.0, divergence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s C%d %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
