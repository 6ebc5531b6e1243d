#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pbergman/cellgeom.hpp"
#include "pbergman/error.hpp"
#include "pbergman/floquet.hpp"

using namespace pbergman;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * pi);

cplx pole(cplx z) { return 1.0 / (z - 2.0 * I); }

const CellRegion& strip() {
  static const CellRegion r = build_cell(rectangle_cell(0.5));
  return r;
}

// Direct partial sum (2 pi)^{-1/2} sum_{|m| <= M} e^{-i eta m} f(z + m).
cplx partial_sum(const std::function<cplx(cplx)>& f, cplx z, double eta, int M) {
  cplx s = 0.0;
  for (int m = -M; m <= M; ++m) s += std::polar(1.0, -eta * m) * f(z + double(m));
  return kInvSqrt2Pi * s;
}

std::vector<cplx> probes_over_periods(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-2.0, 3.0), uy(-0.45, 0.45);
  std::vector<cplx> out;
  while (int(out.size()) < count) {
    const double x = ux(rng);
    if (std::abs(x - std::round(x)) < 1e-3) continue;
    out.emplace_back(x, uy(rng));
  }
  return out;
}

}  // namespace

TEST_CASE("transform of zero") {
  const SampledFunction zero{[](cplx) { return cplx(0.0); }, 4, "zero"};
  ForwardOptions opt;
  opt.order = 8;
  opt.n_eta = 16;
  const FloquetField g = floquet_forward(zero, strip(), std::nullopt, opt);
  for (std::size_t i = 0; i < g.num_points(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j) CHECK(g.at(i, j) == cplx(0.0));
  CHECK(floquet_inverse(g, cplx(0.3, 0.1)) == cplx(0.0));
  const IsometryReport rep = isometry_check(zero, strip(), std::nullopt, opt);
  CHECK(rep.norm_domain_sq == 0.0);
  CHECK(rep.norm_transform_sq == 0.0);
}

TEST_CASE("forward point sums agree with direct summation") {
  const cplx z(0.5, 0.0);
  const double eta = pi / 3.0;
  for (int M : {1, 7, 100}) {
    const cplx lib = floquet_forward_point(pole, z, eta, -M, M);
    CHECK(std::abs(lib - partial_sum(pole, z, eta, M)) < 1e-13);
  }
}

TEST_CASE("partial sums of a slowly decaying function converge like 1/M") {
  // Abel summation bounds each one-sided tail of e^{-i eta m} / (z + m) beyond M by
  // 2 / (M |1 - e^{-i eta}|); |1 - e^{-i pi/3}| = 1
  const cplx z(0.5, 0.0);
  const double eta = pi / 3.0;
  for (int k = 6; k <= 14; ++k) {
    const int M = 1 << k;
    const double diff = std::abs(floquet_forward_point(pole, z, eta, -2 * M, 2 * M) -
                                 floquet_forward_point(pole, z, eta, -M, M));
    CHECK(diff * M < 2.0 * 2.0 * kInvSqrt2Pi * 1.01);
  }
}

TEST_CASE("function supported on one cell") {
  auto bump = [](cplx z) { return (z.real() >= 0.0 && z.real() < 1.0) ? std::exp(z) : cplx(0.0); };
  const SampledFunction f{bump, 3, "bump"};
  ForwardOptions opt;
  opt.order = 8;
  opt.n_eta = 16;
  const FloquetField g = floquet_forward(f, strip(), std::nullopt, opt);
  for (std::size_t i = 0; i < g.nodes().size(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j)
      CHECK(std::abs(g.at(i, j) - kInvSqrt2Pi * std::exp(g.points()[i])) < 1e-15);
}

TEST_CASE("inverse of an eta-independent field") {
  FloquetField g(strip(), 12, 4, 32);
  auto h = [](cplx z) { return std::sin(z) + 2.0; };
  for (std::size_t i = 0; i < g.num_points(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j) g.at(i, j) = kInvSqrt2Pi * h(g.points()[i]);
  g.bandwidth = 0;
  const cplx z0(0.3, 0.2);
  CHECK(std::abs(floquet_inverse(g, z0) - h(z0)) < 1e-12);
  for (int m : {-2, -1, 1, 2}) CHECK(std::abs(floquet_inverse(g, z0 + double(m))) < 1e-13);
  // bandwidth unknown: the N vs N/2 self-estimate is used instead
  g.bandwidth = -1;
  CHECK(std::abs(floquet_inverse(g, z0) - h(z0)) < 1e-12);
}

TEST_CASE("inverse refuses a grid that cannot resolve the period") {
  FloquetField g(strip(), 8, 0, 8);
  g.bandwidth = 4;
  CHECK_NOTHROW(floquet_inverse(g, cplx(0.5, 0.0) + 3.0));
  try {
    floquet_inverse(g, cplx(0.5, 0.0) + 4.0);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridTooCoarse);
  }
  // oscillating field with unknown bandwidth fails the self-estimate
  for (std::size_t i = 0; i < g.num_points(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j) g.at(i, j) = std::polar(1.0, 3.0 * g.eta()[j]);
  g.bandwidth = -1;
  CHECK_THROWS_AS(floquet_inverse(g, cplx(0.5, 0.0) + 1.0), Error);
}

TEST_CASE("round trip for a rational function") {
  const SampledFunction f{pole, 64, "pole"};
  ForwardOptions opt;
  opt.n_eta = 256;
  const FloquetField g = floquet_forward(f, strip(), std::nullopt, opt);
  double worst = 0.0;
  for (cplx z : probes_over_periods(50, 2)) worst = std::max(worst, std::abs(floquet_inverse(g, z) - pole(z)));
  CHECK(worst < 1e-6);
}

TEST_CASE("round trip for a mollified function with adaptive truncation") {
  const SampledFunction f{pole, 0, "pole"};
  const MollifierEps mol(1e-3);
  ForwardOptions opt;
  opt.order = 16;
  ForwardReport rep;
  const FloquetField g = floquet_forward(f, strip(), mol, opt, &rep);
  CHECK_FALSE(rep.truncation_warning);
  CHECK(rep.last_shell <= 1e-10 * rep.running_norm);
  CHECK(g.num_eta() >= std::size_t(2 * rep.window + 1));
  double worst = 0.0;
  for (cplx z : probes_over_periods(50, 3)) worst = std::max(worst, std::abs(floquet_inverse(g, z) - mol(z) * pole(z)));
  CHECK(worst < 1e-6);
  CHECK(check_quasiperiodicity(g, 1e-8).pass);
}

TEST_CASE("window cap produces a warning, not an error") {
  const SampledFunction f{pole, 0, "pole"};
  ForwardOptions opt;
  opt.order = 4;
  opt.edge_points = 2;
  opt.max_window = 64;
  ForwardReport rep;
  CHECK_NOTHROW(floquet_forward(f, strip(), std::nullopt, opt, &rep));
  CHECK(rep.truncation_warning);
  CHECK(rep.window == 64);
}

TEST_CASE("quasiperiodicity checks") {
  FloquetField g(strip(), 6, 8, 16);
  // e^{i eta z} times a 1-periodic function
  for (std::size_t i = 0; i < g.num_points(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j) {
      const cplx z = g.points()[i];
      g.at(i, j) = std::exp(I * g.eta()[j] * z) * (2.0 + std::cos(2.0 * pi * z));
    }
  CHECK(check_quasiperiodicity(g, 1e-12).max_residual < 1e-13);

  // g = z is not quasiperiodic
  for (std::size_t i = 0; i < g.num_points(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j) g.at(i, j) = g.points()[i];
  const auto bad = check_quasiperiodicity(g, 1e-8);
  CHECK_FALSE(bad.pass);
  double expect = 0.0;
  for (double y : g.edge_heights())
    for (double eta : g.eta()) expect = std::max(expect, std::abs(1.0 + I * y - std::polar(1.0, eta) * I * y));
  CHECK(bad.max_residual == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("isometry with matched truncation") {
  const SampledFunction f{pole, 64, "pole"};
  ForwardOptions opt;
  opt.order = 16;
  const IsometryReport rep = isometry_check(f, strip(), std::nullopt, opt);
  CHECK(rep.relative_gap < 1e-6);
  CHECK(rep.window == 64);

  // the domain side by an independent sum over cells
  double ref = 0.0;
  for (const auto& n : cell_nodes(strip(), 16))
    for (int m = -64; m <= 64; ++m) ref += n.weight * std::norm(pole(n.z + double(m)));
  CHECK(rep.norm_domain_sq == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("Parseval ratio for mollified functions") {
  ForwardOptions opt;
  opt.order = 16;
  for (double eps : {1e-3, 0.1}) {
    const SampledFunction f{pole, 0, "pole"};
    const auto rep = isometry_check(f, strip(), MollifierEps(eps), opt);
    CHECK(std::abs(rep.norm_transform_sq / rep.norm_domain_sq - 1.0) < 5e-6);
  }
}

TEST_CASE("translates with disjoint support have orthogonal transforms") {
  auto cell0 = [](cplx z) { return (z.real() >= 0.0 && z.real() < 1.0) ? std::exp(z) : cplx(0.0); };
  auto cell1 = [](cplx z) { return (z.real() >= 1.0 && z.real() < 2.0) ? std::cos(z) : cplx(0.0); };
  ForwardOptions opt;
  opt.order = 8;
  opt.n_eta = 32;
  const FloquetField a = floquet_forward({cell0, 4, "a"}, strip(), std::nullopt, opt);
  const FloquetField b = floquet_forward({cell1, 4, "b"}, strip(), std::nullopt, opt);
  CHECK(std::abs(transform_inner_product(a, b)) < 1e-10);
  CHECK(transform_inner_product(a, a).real() > 0.1);
}

TEST_CASE("linearity of forward and inverse transforms") {
  auto f1 = [](cplx z) { return std::exp(-z * z); };
  auto f2 = [](cplx z) { return 1.0 / (z - 2.0 * I) / (z + 3.0 * I); };
  const cplx a(0.3, -1.2), b(-2.0, 0.5);
  ForwardOptions opt;
  opt.order = 8;
  opt.n_eta = 64;
  const FloquetField g1 = floquet_forward({f1, 20, ""}, strip(), std::nullopt, opt);
  const FloquetField g2 = floquet_forward({f2, 20, ""}, strip(), std::nullopt, opt);
  const FloquetField g = floquet_forward({[&](cplx z) { return a * f1(z) + b * f2(z); }, 20, ""}, strip(),
                                         std::nullopt, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.num_points(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j)
      worst = std::max(worst, std::abs(g.at(i, j) - a * g1.at(i, j) - b * g2.at(i, j)));
  CHECK(worst < 1e-12);
  const cplx z(1.3, 0.2);
  CHECK(std::abs(floquet_inverse(g, z) - a * floquet_inverse(g1, z) - b * floquet_inverse(g2, z)) < 1e-12);
}

TEST_CASE("shifting the function multiplies the transform by a phase") {
  auto f = [](cplx z) { return std::exp(-0.1 * z * z) / (z - 2.0 * I); };
  auto shifted = [&](cplx z) { return f(z - 1.0); };
  const cplx z(0.4, 0.1);
  for (double eta : {-2.0, 0.3, pi}) {
    const cplx lhs = floquet_forward_point(shifted, z, eta, -30, 30);
    const cplx rhs = std::polar(1.0, -eta) * floquet_forward_point(f, z, eta, -31, 29);
    CHECK(std::abs(lhs - rhs) < 1e-14);
  }
}

TEST_CASE("mollifier parameter range") {
  CHECK_THROWS_AS(MollifierEps(0.0), Error);
  CHECK_THROWS_AS(MollifierEps(1.5), Error);
  CHECK(MollifierEps(1.0)(cplx(1.0)) == std::exp(cplx(-1.0)));
}

TEST_CASE("divergence of the transform of 1/z at eta = 0") {
  const auto rows = divergence_demo(10000, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].M == 10000);
  CHECK(rows[1].M == 20000);
  CHECK(std::abs(rows[1].one_sided.real() - rows[0].one_sided.real() - std::log(2.0)) < 1e-3 * std::log(2.0));

  // independent running sums
  const cplx z(0.5, 0.375);
  cplx s = 0.0;
  for (long m = 1; m <= 10000; ++m) s += 1.0 / (z + double(m));
  CHECK(std::abs(s - rows[0].one_sided) < 1e-12);

  const auto big = divergence_demo(100000, 2);
  CHECK(std::abs(big[1].minus_log - big[0].minus_log) < 1e-4);

  const auto sym = divergence_demo(1000000, 2);
  CHECK(std::abs(sym[1].symmetric - sym[0].symmetric) < 1e-6);
  // principal value: pi cot(pi z)
  CHECK(std::abs(sym[1].symmetric - pi / std::tan(pi * z)) < 1e-6);
  CHECK_THROWS_AS(divergence_demo(0), Error);
}

TEST_CASE("field CSV layout") {
  FloquetField g(strip(), 2, 1, 3);
  for (std::size_t i = 0; i < g.num_points(); ++i)
    for (std::size_t j = 0; j < g.num_eta(); ++j) g.at(i, j) = cplx(double(i), double(j));
  std::ostringstream os;
  write_field_csv(g, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "re_z,im_z,eta,re_g,im_g");
  int rows = 0;
  std::string second;
  while (std::getline(in, line)) {
    if (rows == 1) second = line;
    ++rows;
  }
  CHECK(rows == int(g.num_points() * g.num_eta()));
  // point-major ordering: the second row is the first point at the second eta
  CHECK(second.substr(second.rfind(',') + 1) == "1");
}
