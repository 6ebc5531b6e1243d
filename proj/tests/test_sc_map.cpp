#include <cmath>
#include <random>

#include "doctest.h"
#include "pbergman/confmap.hpp"
#include "pbergman/error.hpp"

using namespace pbergman;

namespace {

struct Solved {
  PeriodicCellSpec spec;
  SCParams params;
  std::shared_ptr<const ScAnnulusMap> map;
};

const Solved& zigzag() {
  static const Solved s = [] {
    Solved r{zigzag_cell(0.5), {}, nullptr};
    r.params = solve_sc_parameters(r.spec);
    r.map = make_sc_map(r.spec, r.params);
    return r;
  }();
  return s;
}

const Solved& straight() {
  static const Solved s = [] {
    Solved r{rectangle_cell(0.5), {}, nullptr};
    r.params = solve_sc_parameters(r.spec);
    r.map = make_sc_map(r.spec, r.params);
    return r;
  }();
  return s;
}

// Interior points of a cell, kept `margin` away from the boundary polylines.
std::vector<cplx> interior_probes(const PeriodicCellSpec& spec, int count, double margin, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0), us(0.0, 1.0);
  std::vector<cplx> out;
  while (int(out.size()) < count) {
    const double x = ux(rng);
    const double lo = lower_boundary_at(spec, x) + margin, hi = upper_boundary_at(spec, x) - margin;
    if (hi <= lo) continue;
    out.emplace_back(x, lo + (hi - lo) * us(rng));
  }
  return out;
}

}  // namespace

TEST_CASE("straight channel recovers the strip modulus") {
  const Solved& s = straight();
  CHECK(std::abs(s.params.rho - std::exp(pi)) < 1e-6);
  CHECK(s.params.converged);
  CHECK(s.params.max_vertex_residual < 1e-8);
  CHECK(s.params.q == doctest::Approx(1.0 / (s.params.rho * s.params.rho)));
  CHECK(std::abs(s.params.scale - 1.0 / (I * 2.0 * pi)) < 1e-8);
}

TEST_CASE("channel map with straight walls is a logarithm") {
  const Solved& s = straight();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ur(-0.99 * pi, 0.99 * pi), ut(0.0, 2.0 * pi);
  const cplx c = sc_channel_map(1.0, s.params, s.spec);
  CHECK(std::abs(c - s.params.base) < 1e-15);
  for (int i = 0; i < 100; ++i) {
    const cplx z = std::polar(std::exp(ur(rng)), ut(rng));
    const cplx expect = std::log(std::abs(z)) / (I * 2.0 * pi) + arg_in_window(z, 0.0) / (2.0 * pi);
    CHECK(std::abs(sc_channel_map(z, s.params, s.spec) - c - expect) < 1e-10);
  }
  const cplx z = std::polar(1.0, pi / 4.0);
  const LiftedMap builtin = lift(builtin_strip_map(0.5));
  const cplx t = std::log(z) / (I * 2.0 * pi);
  CHECK(std::abs(sc_channel_map(z, s.params, s.spec) - builtin.map().unlift_point(t).phi) < 1e-8);
}

TEST_CASE("straight channel map agrees with the builtin map") {
  const Solved& s = straight();
  const auto builtin = builtin_strip_map(0.5);
  double worst = 0.0;
  for (cplx z : interior_probes(s.spec, 100, 0.01, 4)) {
    worst = std::max(worst, std::abs(s.map->lift_point(z).phi - builtin->lift_point(z).phi));
    worst = std::max(worst, std::abs(s.map->lift_point(z).dphi - 1.0));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("mirror-symmetric cell has mirror-symmetric prevertices") {
  const auto spec = polyline_cell({cplx(1.0, -0.5), cplx(0.75, -0.8), cplx(0.25, -0.8), cplx(0.0, -0.5)},
                                  {cplx(1.0, 0.5), cplx(0.0, 0.5)}, 1.0);
  const SCParams p = solve_sc_parameters(spec);
  CHECK(p.max_vertex_residual < 1e-8);
  REQUIRE(p.theta_lower.size() == 3);
  // reflection x -> 1 - x maps the prevertex angle theta to 2 pi - theta
  CHECK(std::abs(p.theta_lower[1] + p.theta_lower[2] - 2.0 * pi) < 1e-6);

  const Solved& z = zigzag();
  CHECK(std::abs(z.params.theta_lower[1] - pi) < 1e-6);
  CHECK(std::abs(z.params.theta_upper[1] - z.params.theta_upper[0] - pi) < 1e-6);
}

TEST_CASE("infeasible exponents are rejected before iterating") {
  PeriodicCellSpec s = zigzag_cell(0.5);
  s.beta_lower[1] += 0.1;
  try {
    solve_sc_parameters(s);
    FAIL("expected InvalidCell");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidCell);
  }
}

TEST_CASE("solver budget exhaustion reports the best residual") {
  ScSolveOptions opt;
  opt.budget.max_iterations = 1;
  opt.vertex_tol = 1e-15;
  try {
    solve_sc_parameters(zigzag_cell(0.5), std::nullopt, opt);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
    CHECK(std::string(e.what()).find("vertex residual") != std::string::npos);
  }
}

TEST_CASE("solving from a converged initial guess") {
  const Solved& z = zigzag();
  const SCParams again = solve_sc_parameters(z.spec, z.params);
  CHECK(std::abs(again.rho - z.params.rho) < 1e-10);
  CHECK(again.iterations <= 2);
}

TEST_CASE("zigzag vertex residual") {
  const Solved& z = zigzag();
  CHECK(z.params.max_vertex_residual < 1e-8);
  CHECK(z.map->vertex_residual() < 1e-8);
  CHECK(z.params.rho > std::exp(pi));
}

TEST_CASE("zigzag lift is equivariant and maps into the strip") {
  const Solved& z = zigzag();
  const double c = z.map->strip_half_width();
  for (cplx p : interior_probes(z.spec, 40, 1e-3, 8)) {
    const LiftPoint base = z.map->lift_point(p);
    CHECK(std::abs(base.phi.imag()) < c + 1e-10);
    for (int m = -3; m <= 3; ++m) {
      const LiftPoint q = z.map->lift_point(p + double(m));
      CHECK(std::abs(q.phi - base.phi - double(m)) < 1e-12);
    }
  }
}

TEST_CASE("zigzag lift is continuous across the junction") {
  const Solved& z = zigzag();
  const LiftedMap L = lift(z.map);
  for (double y : {-0.45, -0.2, 0.0, 0.3, 0.45}) {
    const double eps = 1e-12;
    const cplx a = z.map->lift_point(cplx(1.0 - eps, y)).phi, b = z.map->lift_point(cplx(1.0 + eps, y)).phi;
    CHECK(std::abs(a - b) < 1e-10);
    // the logarithmic lift crosses the cut of its windows here
    const cplx la = L.evaluate(cplx(1.0 - eps, y)).phi, lb = L.evaluate(cplx(1.0 + eps, y)).phi;
    CHECK(std::abs(la - lb) < 1e-10);
    CHECK(std::abs(la - a) < 1e-10);
  }
}

TEST_CASE("zigzag round trip through the annulus") {
  const Solved& z = zigzag();
  const double rho = z.map->rho();
  double worst = 0.0;
  for (cplx p : interior_probes(z.spec, 200, 1e-3, 12)) {
    const cplx w = exp_map(p);
    const cplx zeta = z.map->forward(w);
    CHECK(std::abs(zeta) > 1.0 / rho);
    CHECK(std::abs(zeta) < rho);
    worst = std::max(worst, std::abs(z.map->inverse(zeta) - w) / std::abs(w));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("zigzag derivative matches finite differences") {
  const Solved& z = zigzag();
  for (cplx p : interior_probes(z.spec, 30, 0.05, 14)) {
    const cplx w = exp_map(p);
    const double h = 1e-6 * std::abs(w);
    const cplx d = z.map->forward_derivative(w);
    const cplx fx = (z.map->forward(w + h) - z.map->forward(w - h)) / (2.0 * h);
    const cplx fy = (z.map->forward(w + I * h) - z.map->forward(w - I * h)) / (2.0 * h);
    CHECK(std::abs(fx - d) < 1e-6 * std::abs(d));
    // Cauchy-Riemann: f_y = i f_x
    CHECK(std::abs(fy - I * fx) < 1e-6 * std::abs(fx));
  }
}

TEST_CASE("zigzag inverse lift agrees with the lift") {
  const Solved& z = zigzag();
  for (cplx p : interior_probes(z.spec, 50, 1e-3, 16)) {
    const LiftPoint f = z.map->lift_point(p);
    const LiftPoint b = z.map->unlift_point(f.phi);
    CHECK(std::abs(b.phi - p) < 1e-10);
    CHECK(std::abs(b.dphi * f.dphi - 1.0) < 1e-8);
  }
}

TEST_CASE("zigzag lift near corners") {
  const Solved& z = zigzag();
  // approach every vertex of the cell along its interior bisector
  struct Corner {
    cplx vertex, inward;
  };
  const std::vector<Corner> corners = {{cplx(0.5, -1.0), cplx(0.0, 1.0)},
                                       {cplx(0.5, 1.0), cplx(0.0, -1.0)},
                                       {cplx(0.0, -0.5), cplx(0.0, 1.0)},
                                       {cplx(1.0, 0.5), cplx(0.0, -1.0)}};
  for (const auto& c : corners) {
    cplx prev = 0.0;
    double prev_dist = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double r = std::pow(10.0, -k);
      const LiftPoint p = z.map->lift_point(c.vertex + r * c.inward);
      REQUIRE(std::isfinite(p.phi.real()));
      // converges to the image of the vertex on the strip boundary
      const double dist = z.map->strip_half_width() - std::abs(p.phi.imag());
      CHECK(dist >= -1e-12);
      if (k > 1) {
        CHECK(std::abs(p.phi - prev) < 10.0 * std::pow(r * 10.0, 0.4));
        CHECK(dist <= prev_dist + 1e-15);
      }
      prev = p.phi;
      prev_dist = dist;
    }
    CHECK(prev_dist < 1e-5);
  }
}

TEST_CASE("map built from stored parameters reproduces the solved map") {
  const Solved& z = zigzag();
  const auto copy = make_sc_map(z.spec, z.params);
  const cplx p(0.3, 0.1);
  CHECK(copy->lift_point(p).phi == z.map->lift_point(p).phi);
  CHECK(copy->provenance() == MapProvenance::sc_solved);
  SCParams bad = z.params;
  bad.theta_lower[0] = 0.5;
  CHECK_THROWS_AS(make_sc_map(z.spec, bad), Error);
}

TEST_CASE("segment integrals are additive") {
  const Solved& z = zigzag();
  const cplx a(0.1, -0.2), b(0.4, 0.3), m(0.2, 0.1);
  const cplx whole = z.map->integrate_segment(a, b);
  const cplx split = z.map->integrate_segment(a, m) + z.map->integrate_segment(m, b);
  CHECK(std::abs(whole - split) < 1e-12);
  // ending on a prevertex
  const cplx p = z.map->prevertices()[1];
  const cplx to_p = z.map->integrate_segment(0.0, p);
  CHECK(std::abs(z.params.base + to_p - cplx(0.5, -1.0)) < 1e-8);
}
