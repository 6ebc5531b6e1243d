#include "pbergman/cellgeom.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pbergman/error.hpp"

namespace pbergman {

namespace {

constexpr double kGeomTol = 1e-12;

// Left-to-right copy of a polyline stored in Re 1 -> Re 0 order.
std::vector<cplx> left_to_right(const std::vector<cplx>& poly) {
  return {poly.rbegin(), poly.rend()};
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidCell, what); }

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_intersect(cplx p1, cplx p2, cplx q1, cplx q2) {
  const double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  const double eps = 1e-14;
  if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
      ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)))
    return true;
  auto on_segment = [&](cplx a, cplx b, cplx c, double d) {
    return std::abs(d) <= eps && std::min(a.real(), b.real()) - eps <= c.real() &&
           c.real() <= std::max(a.real(), b.real()) + eps &&
           std::min(a.imag(), b.imag()) - eps <= c.imag() &&
           c.imag() <= std::max(a.imag(), b.imag()) + eps;
  };
  return on_segment(p1, p2, q1, d1) || on_segment(p1, p2, q2, d2) ||
         on_segment(q1, q2, p1, d3) || on_segment(q1, q2, p2, d4);
}

// Polyline height over x; from_right picks the segment to the right of a
// vertical edge or breakpoint.
double eval_graph(const std::vector<cplx>& ltr, double x, bool from_right) {
  const std::size_t n = ltr.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double x0 = ltr[i].real(), x1 = ltr[i + 1].real();
    if (x1 - x0 <= 0.0) continue;
    const bool inside = from_right ? (x0 <= x && x < x1) : (x0 < x && x <= x1);
    if (inside) {
      const double s = (x - x0) / (x1 - x0);
      return ltr[i].imag() + s * (ltr[i + 1].imag() - ltr[i].imag());
    }
  }
  // Endpoint requests fall back to the nearest segment.
  return from_right ? eval_graph(ltr, x, false) : ltr.back().imag();
}

void validate(const PeriodicCellSpec& spec) {
  const auto& lo = spec.lower_vertices;
  const auto& up = spec.upper_vertices;
  if (lo.size() < 2 || up.size() < 2) invalid("each polyline needs at least two vertices");
  if (spec.beta_lower.size() != lo.size() || spec.beta_upper.size() != up.size())
    invalid("turning exponent count does not match vertex count");
  if (!(spec.height_bound > 0.0)) invalid("height bound must be positive");

  for (const auto* poly : {&lo, &up}) {
    if (std::abs(poly->front().real() - 1.0) > kGeomTol) invalid("first vertex must have Re = 1");
    if (std::abs(poly->back().real()) > kGeomTol) invalid("last vertex must have Re = 0");
    if (std::abs(poly->front() - (poly->back() + 1.0)) > kGeomTol)
      invalid("first vertex must be the +1 translate of the last vertex");
    for (cplx z : *poly) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) invalid("non-finite vertex");
      if (z.real() < -kGeomTol || z.real() > 1.0 + kGeomTol ||
          std::abs(z.imag()) > spec.height_bound + kGeomTol)
        invalid("vertex outside [0,1] x [-M, M]");
    }
    const auto ltr = left_to_right(*poly);
    for (std::size_t i = 0; i + 1 < ltr.size(); ++i) {
      if (ltr[i + 1].real() < ltr[i].real() - kGeomTol)
        invalid("polyline is not monotone in Re z");
      if (std::abs(ltr[i + 1] - ltr[i]) < kGeomTol) invalid("repeated vertex");
    }
  }

  for (const auto* beta : {&spec.beta_lower, &spec.beta_upper}) {
    double sum = 0.0;
    for (double b : *beta) {
      if (!std::isfinite(b)) invalid("non-finite turning exponent");
      sum += b;
    }
    if (std::abs(sum) > kGeomTol) {
      std::ostringstream os;
      os << "turning exponents sum to " << sum << ", expected 0";
      invalid(os.str());
    }
  }

  const double a = lo.back().imag(), b = up.back().imag();
  if (std::abs(a - spec.junction_low) > kGeomTol || std::abs(b - spec.junction_high) > kGeomTol)
    invalid("junction interval does not match the polyline end points");
  if (!(b > a)) invalid("junction interval must satisfy b > a");

  // Exponents must agree with the polygon's angles (junction summed).
  for (int side = 0; side < 2; ++side) {
    const bool upper = side == 1;
    const auto& poly = upper ? up : lo;
    const auto& given = upper ? spec.beta_upper : spec.beta_lower;
    const auto geom = turning_exponents(poly, upper);
    const std::size_t n = poly.size();
    const double jg = geom.front() + geom.back(), jb = given.front() + given.back();
    if (std::abs(jg - jb) > 1e-9) invalid("junction exponent disagrees with polygon angle");
    if (std::abs(jb) >= 1.0) invalid("junction interior angle outside (0, 2 pi)");
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (std::abs(geom[k] - given[k]) > 1e-9) {
        std::ostringstream os;
        os << "exponent at vertex " << k + 1 << " is " << given[k] << " but the polygon angle gives "
           << geom[k];
        invalid(os.str());
      }
      if (std::abs(given[k]) >= 1.0) invalid("interior angle outside (0, 2 pi)");
    }
  }

  // Simplicity of the closed boundary and upper strictly above lower.
  std::vector<cplx> ring;
  for (cplx z : left_to_right(lo)) ring.push_back(z);
  for (cplx z : up) ring.push_back(z);
  const std::size_t m = ring.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == m - 1);
      if (adjacent) continue;
      if (segments_intersect(ring[i], ring[(i + 1) % m], ring[j], ring[(j + 1) % m]))
        invalid("cell boundary self-intersects");
    }
  }
}

}  // namespace

std::vector<double> turning_exponents(const std::vector<cplx>& poly, bool upper) {
  const auto p = left_to_right(poly);
  const std::size_t n = p.size();
  std::vector<double> beta(n, 0.0);
  auto turn = [](cplx din, cplx dout) { return std::arg(dout / din); };
  const double sign = upper ? 1.0 : -1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // list position of p[i] is n-1-i
    beta[n - 1 - i] = sign * turn(p[i] - p[i - 1], p[i + 1] - p[i]) / pi;
  }
  const cplx prev = n >= 2 ? p[n - 2] - 1.0 : p[0] - 1.0;
  const double junction = sign * turn(p[0] - prev, p[1] - p[0]) / pi;
  beta.front() = 0.5 * junction;
  beta.back() = 0.5 * junction;
  return beta;
}

PeriodicCellSpec rectangle_cell(double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "rectangle_cell: h must be positive");
  PeriodicCellSpec s;
  s.lower_vertices = {cplx(1.0, -h), cplx(0.0, -h)};
  s.upper_vertices = {cplx(1.0, h), cplx(0.0, h)};
  s.beta_lower = {0.0, 0.0};
  s.beta_upper = {0.0, 0.0};
  s.junction_low = -h;
  s.junction_high = h;
  s.height_bound = h;
  return s;
}

PeriodicCellSpec polyline_cell(std::vector<cplx> lower, std::vector<cplx> upper,
                               double height_bound) {
  PeriodicCellSpec s;
  s.beta_lower = turning_exponents(lower, false);
  s.beta_upper = turning_exponents(upper, true);
  s.junction_low = lower.back().imag();
  s.junction_high = upper.back().imag();
  s.lower_vertices = std::move(lower);
  s.upper_vertices = std::move(upper);
  s.height_bound = height_bound;
  return s;
}

PeriodicCellSpec zigzag_cell(double depth) {
  const double y = 0.5;
  return polyline_cell({cplx(1.0, -y), cplx(0.5, -y - depth), cplx(0.0, -y)},
                       {cplx(1.0, y), cplx(0.5, y + depth), cplx(0.0, y)}, y + std::abs(depth));
}

double shoelace_area(const PeriodicCellSpec& spec) {
  std::vector<cplx> ring = left_to_right(spec.lower_vertices);
  ring.insert(ring.end(), spec.upper_vertices.begin(), spec.upper_vertices.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) acc += cross(ring[i], ring[(i + 1) % ring.size()]);
  return 0.5 * std::abs(acc);
}

double lower_boundary_at(const PeriodicCellSpec& spec, double x) {
  return eval_graph(left_to_right(spec.lower_vertices), x, true);
}

double upper_boundary_at(const PeriodicCellSpec& spec, double x) {
  return eval_graph(left_to_right(spec.upper_vertices), x, true);
}

CellRegion build_cell(const PeriodicCellSpec& spec) {
  validate(spec);
  const auto lo = left_to_right(spec.lower_vertices);
  const auto up = left_to_right(spec.upper_vertices);

  std::vector<double> xs;
  for (cplx z : lo) xs.push_back(z.real());
  for (cplx z : up) xs.push_back(z.real());
  std::sort(xs.begin(), xs.end());
  std::vector<double> breaks;
  for (double x : xs)
    if (breaks.empty() || x - breaks.back() > kGeomTol) breaks.push_back(x);
  breaks.front() = 0.0;
  breaks.back() = 1.0;

  CellRegion region;
  region.junction_low = spec.junction_low;
  region.junction_high = spec.junction_high;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    Slab s;
    s.x0 = breaks[i];
    s.x1 = breaks[i + 1];
    s.lower0 = eval_graph(lo, s.x0, true);
    s.lower1 = eval_graph(lo, s.x1, false);
    s.upper0 = eval_graph(up, s.x0, true);
    s.upper1 = eval_graph(up, s.x1, false);
    if (!(s.upper0 > s.lower0 && s.upper1 > s.lower1) || s.area() <= 0.0)
      invalid("upper polyline must lie strictly above the lower polyline");
    region.area += s.area();
    region.slabs.push_back(s);
  }
  const double shoelace = shoelace_area(spec);
  if (std::abs(region.area - shoelace) > 1e-12 * shoelace)
    invalid("slab decomposition does not reproduce the polygon area");
  return region;
}

BranchTag BranchTag::for_point(cplx z, double cut_angle) {
  const double frac = z.real() - std::floor(z.real());
  return {frac < 0.5 ? Side::minus : Side::plus, cut_angle};
}

cplx log_branch(cplx w, const BranchTag& tag) {
  if (w == cplx(0.0, 0.0)) throw Error(ErrorKind::BranchViolation, "log of zero");
  const double lo = tag.window_low();
  const double a = arg_in_window(w, lo);
  if (a - lo < 1e-14 || lo + 2.0 * pi - a < 1e-14)
    throw Error(ErrorKind::BranchViolation, "argument lies on the branch cut of the window");
  const cplx logw(std::log(std::abs(w)), a);
  return logw / (I * 2.0 * pi);
}

}  // namespace pbergman
