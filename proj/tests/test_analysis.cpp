#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pbergman/analysis.hpp"
#include "pbergman/error.hpp"

using namespace pbergman;

namespace {

const KernelContext& strip_ctx() {
  static const KernelContext ctx(builtin_strip_map(0.5));
  return ctx;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidArgument;
}

KernelContext solved_context(const PeriodicCellSpec& spec) {
  return KernelContext(make_sc_map(spec, solve_sc_parameters(spec)));
}

}  // namespace

TEST_CASE("phi' on the strip is identically one") {
  const PhiPrimeReport r = phi_prime_bounds(strip_ctx());
  CHECK(r.inf == 1.0);
  CHECK(r.sup == 1.0);
  CHECK_FALSE(r.blow_up);
  CHECK(r.levels.size() == 4);
}

TEST_CASE("phi' stays bounded for a gently bent channel") {
  const auto spec = polyline_cell({cplx(1.0, -0.5), cplx(0.5, -0.55), cplx(0.0, -0.5)},
                                  {cplx(1.0, 0.5), cplx(0.5, 0.52), cplx(0.0, 0.5)}, 0.6);
  const PhiPrimeReport r = phi_prime_bounds(solved_context(spec));
  const double C = std::max(r.sup, 1.0 / r.inf);
  CHECK(C < 10.0);
  CHECK(r.inf > 0.0);
}

TEST_CASE("phi' blows up at a reentrant corner") {
  const PhiPrimeReport r = phi_prime_bounds(solved_context(zigzag_cell(0.5)));
  CHECK(r.blow_up);
  REQUIRE(r.levels.size() == 4);
  for (std::size_t i = 1; i < r.levels.size(); ++i) CHECK(r.levels[i].sup > r.levels[i - 1].sup);
}

TEST_CASE("decay rate of the strip kernel") {
  const auto& ctx = strip_ctx();
  const DecayFit fit = decay_profile(ctx, default_decay_probes(ctx), 8);
  CHECK(fit.n.front() == 2);
  CHECK(fit.n.back() == 8);
  CHECK(std::abs(fit.rate / pi - 1.0) < 0.05);
  CHECK(fit.rate_full == doctest::Approx(pi));
  CHECK(fit.rate_half == doctest::Approx(pi / 2.0));
  CHECK(fit.c_high / fit.c_low < 10.0);
  CHECK_FALSE(fit.truncated);
  const std::string cmp = fit.comparison();
  CHECK(cmp.find("pi^2/log") != std::string::npos);

  // peaks from the closed form (pi/4) sech^2(pi (z - conj w) / 2) on the same probes
  const auto probes = default_decay_probes(ctx);
  for (std::size_t i = 0; i < fit.n.size(); ++i) {
    double peak = 0.0;
    for (cplx g : probes) peak = std::max(peak, std::abs(oracle::strip_periodic_kernel(g + double(fit.n[i]), 0.0, 0.5)));
    CHECK(fit.peak[i] == doctest::Approx(peak).epsilon(1e-12));
  }
}

TEST_CASE("decay rate does not depend on the probe set") {
  const auto& ctx = strip_ctx();
  const std::vector<cplx> left = {cplx(0.1, -0.2), cplx(0.2, 0.1), cplx(0.3, 0.3)};
  const std::vector<cplx> right = {cplx(0.6, 0.0), cplx(0.8, -0.35), cplx(0.9, 0.2)};
  const double a = decay_profile(ctx, left, 8).rate, b = decay_profile(ctx, right, 8).rate;
  CHECK(std::abs(a - b) / std::max(a, b) < 0.02);
}

TEST_CASE("decay fit past underflow") {
  const auto& ctx = strip_ctx();
  CHECK(kind_of([&] { decay_profile(ctx, default_decay_probes(ctx), 310, 300); }) == ErrorKind::UnderflowBeyondN);
  const DecayFit fit = decay_profile(ctx, default_decay_probes(ctx), 260, 200);
  CHECK(fit.truncated);
}

TEST_CASE("weight admissibility") {
  const auto one = weight_check(constant_weight(), 1.0, 0.5, 20);
  CHECK(one.C == 1.0);
  const auto stretched = weight_check(stretched_exponential_weight(0.5), 1.0, 0.5, 20);
  CHECK(stretched.C == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stretched.samples > 0);
  const auto quad = custom_weight([](double x) { return std::exp(x * x); }, "gauss");
  CHECK(kind_of([&] { weight_check(quad, 1.0, 0.5, 20); }) == ErrorKind::NotAWeight);
  CHECK(kind_of([] { weight_check(constant_weight(), 1.0, 1.0, 5); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { weight_check(constant_weight(), 0.0, 0.5, 5); }) == ErrorKind::InvalidArgument);
  CHECK(stretched_exponential_weight(0.5)(4.0) == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("Schur row integrals for the strip") {
  const auto& ctx = strip_ctx();
  const auto probes = schur_probes(ctx);
  CHECK(probes.size() == 20);
  for (const WeightSpec& w : {constant_weight(), stretched_exponential_weight(0.5)}) {
    const SchurReport r = schur_bound(ctx, w, 16);
    CHECK(std::isfinite(r.sup_row));
    CHECK(r.sup_row > 0.0);
    CHECK(r.stability < 0.01);
    CHECK(r.sup_row_doubled >= r.sup_row);
    // the per-period contributions decay away from the probe's own period
    const std::size_t mid = r.per_period.size() / 2;
    for (std::size_t k = mid + 2; k < r.per_period.size(); ++k)
      CHECK(r.per_period[k] <= r.per_period[k - 1] * (1.0 + 1e-12));
  }
  // the unweighted row integral bounds the symmetric column integral as well
  const SchurReport plain = schur_bound(ctx, constant_weight(), 8);
  const SchurReport wider = schur_bound(ctx, constant_weight(), 16);
  CHECK(wider.sup_row >= plain.sup_row);
}

TEST_CASE("Schur test detects non-summable weights") {
  const auto& ctx = strip_ctx();
  const auto fast = custom_weight([](double x) { return std::exp(-6.0 * std::abs(x)); }, "fast");
  CHECK(kind_of([&] { schur_bound(ctx, fast, 8, 16); }) == ErrorKind::NotSummable);
}
