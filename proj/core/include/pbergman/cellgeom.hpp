#pragma once

// Period cell geometry, the exponential map E(z) = exp(i 2 pi z) and its
// branch-aware inverse.

#include <vector>

#include "pbergman/numerics.hpp"

namespace pbergman {

/// One period of a 1-periodic channel. Both polylines are listed from the
/// vertex with real part 1 down to the vertex with real part 0; the first
/// vertex is the translate by +1 of the last one. turning exponents are listed
/// per vertex (the junction vertex appears twice and its physical exponent is
/// the sum of the two entries). Interior angle at a vertex: pi (beta + 1).
struct PeriodicCellSpec {
  std::vector<cplx> upper_vertices;
  std::vector<cplx> lower_vertices;
  std::vector<double> beta_upper;
  std::vector<double> beta_lower;
  double junction_low = 0.0;   // a
  double junction_high = 0.0;  // b
  double height_bound = 1.0;   // M
};

/// Rectangle (0,1) x (-h, h) with beta = 0 dummy vertices.
PeriodicCellSpec rectangle_cell(double h);

/// Cell built from polylines (Re 1 -> Re 0 order); exponents derived from the
/// polygon's turning angles.
PeriodicCellSpec polyline_cell(std::vector<cplx> lower, std::vector<cplx> upper,
                               double height_bound);

/// Mirror-symmetric zigzag: lower polyline (1,-1/2), (1/2,-1/2-depth), (0,-1/2),
/// upper polyline its reflection in the real axis.
PeriodicCellSpec zigzag_cell(double depth = 0.5);

/// Geometric turning exponents of a polyline given in Re 1 -> Re 0 order,
/// closing the junction through the periodic neighbour. upper selects the
/// orientation convention (domain below the curve).
std::vector<double> turning_exponents(const std::vector<cplx>& poly, bool upper);

/// Area of the cell polygon by the shoelace formula.
double shoelace_area(const PeriodicCellSpec& spec);

/// Validates the spec and decomposes the cell into vertical slabs.
CellRegion build_cell(const PeriodicCellSpec& spec);

/// Height of the lower / upper boundary above Re z = x (x in [0, 1]); at a
/// vertical edge the value approached from the right is returned.
double lower_boundary_at(const PeriodicCellSpec& spec, double x);
double upper_boundary_at(const PeriodicCellSpec& spec, double x);

/// E(z) = exp(i 2 pi z). The real part is reduced mod 1 first (exactly), so
/// E(z + m) == E(z) bit for bit whenever z + m is representable.
inline cplx exp_map(cplx z) {
  const double r = z.real() - std::round(z.real());
  return std::polar(std::exp(-2.0 * pi * z.imag()), 2.0 * pi * r);
}

/// Argument window used to invert E on one half of the cell. The cut follows
/// the image of the junction segment, whose mean argument is cut_angle.
struct BranchTag {
  enum class Side { minus, plus };

  Side side = Side::minus;
  double cut_angle = 0.0;

  /// Lower end of the half-open window [lo, lo + 2 pi).
  double window_low() const noexcept {
    return side == Side::minus ? cut_angle - 0.5 * pi : cut_angle + 0.5 * pi;
  }
  /// Tag for the half of the cell that contains Re z mod 1.
  static BranchTag for_point(cplx z, double cut_angle = 0.0);
};

/// (i 2 pi)^{-1} log w with the argument taken in the tag's window. Throws
/// BranchViolation for w = 0 or an argument on the window's boundary ray.
cplx log_branch(cplx w, const BranchTag& tag);

}  // namespace pbergman
