#pragma once

// Floquet transform on the periodic domain: forward partial sums over
// translated cells, inversion by periodic trapezoid quadrature in the
// quasimomentum, and the checks that go with them.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pbergman/numerics.hpp"

namespace pbergman {

/// A function on the periodic domain, evaluated on translated cells.
struct SampledFunction {
  std::function<cplx(cplx)> f;
  int window = 0;  ///< truncation |m| <= window; 0 lets the transform choose
  std::string label;
};

/// Gaussian mollifier phi_eps(z) = exp(-eps z^2), eps in (0, 1].
struct MollifierEps {
  double eps = 1e-3;

  explicit MollifierEps(double e);
  cplx operator()(cplx z) const { return std::exp(-eps * z * z); }
};

/// g(z_i, eta_j) on cell quadrature nodes plus paired junction points
/// (i y, 1 + i y), times the uniform grid eta_j = -pi + 2 pi j / N.
class FloquetField {
public:
  FloquetField(CellRegion region, int order, int edge_points, int n_eta);

  const CellRegion& region() const noexcept { return region_; }
  int order() const noexcept { return order_; }
  const std::vector<CellNode>& nodes() const noexcept { return nodes_; }
  /// Junction heights; edge point k sits at i y_k (left) and 1 + i y_k (right).
  const std::vector<double>& edge_heights() const noexcept { return edge_y_; }
  const std::vector<double>& eta() const noexcept { return eta_; }
  std::size_t num_points() const noexcept { return points_.size(); }
  std::size_t num_eta() const noexcept { return eta_.size(); }
  /// Sample locations: cell nodes first, then left edge points, then right.
  const std::vector<cplx>& points() const noexcept { return points_; }
  std::size_t left_edge_index(std::size_t k) const { return nodes_.size() + k; }
  std::size_t right_edge_index(std::size_t k) const { return nodes_.size() + edge_y_.size() + k; }

  cplx& at(std::size_t point, std::size_t j) { return values_[point * eta_.size() + j]; }
  cplx at(std::size_t point, std::size_t j) const { return values_[point * eta_.size() + j]; }

  /// Highest |m| present in the field (-1 when unknown). The trapezoid rule
  /// inverts exactly while bandwidth + |m| < N.
  int bandwidth = -1;

  /// Barycentric interpolation of g(., eta_j) at z0 in the base cell.
  cplx interpolate(cplx z0, std::size_t j) const;
  /// Interpolation weights at z0 (node index, weight), reusable across eta.
  std::vector<std::pair<std::size_t, double>> interpolation_stencil(cplx z0) const;

  bool all_finite() const;

private:
  CellRegion region_;
  int order_;
  std::vector<CellNode> nodes_;
  std::vector<double> edge_y_;
  std::vector<double> eta_;
  std::vector<cplx> points_;
  std::vector<cplx> values_;
};

struct ForwardOptions {
  int order = 32;        ///< tensor Gauss-Legendre order per slab
  int edge_points = 16;  ///< junction sample heights
  int n_eta = 256;
  double shell_tol = 1e-10;  ///< adaptive truncation: outer shell / running norm
  int max_window = 1 << 16;
};

struct ForwardReport {
  int window = 0;
  double last_shell = 0.0;    ///< norm^2 of the outermost doubling shell
  double running_norm = 0.0;  ///< sum over |m| <= window of ||f||^2 on cells
  bool truncation_warning = false;
  std::string message;
};

/// (2 pi)^{-1/2} sum_{m_lo <= m <= m_hi} e^{-i eta m} (phi_eps f)(z + m).
cplx floquet_forward_point(const std::function<cplx(cplx)>& f, cplx z, double eta, int m_lo,
                           int m_hi, const std::optional<MollifierEps>& mollifier = std::nullopt);

/// Forward transform on a cell grid. With f.window == 0 the window doubles
/// until the outer shell falls below options.shell_tol of the running norm;
/// a truncation warning is reported (not thrown) when max_window is reached.
/// The eta grid is enlarged to at least 2 window + 1 points.
FloquetField floquet_forward(const SampledFunction& f, const CellRegion& region,
                             const std::optional<MollifierEps>& mollifier = std::nullopt,
                             const ForwardOptions& options = {}, ForwardReport* report = nullptr);

/// (2 pi)^{-1/2} int e^{i [Re z] eta} g(z - [Re z], eta) d eta by the periodic
/// trapezoid rule. Throws GridTooCoarse when the rule cannot resolve the
/// integrand (degree bound exceeded, or N vs N/2 estimate above tol when the
/// bandwidth is unknown).
cplx floquet_inverse(const FloquetField& g, cplx z, double tol = 1e-8);

struct QuasiperiodicityReport {
  double max_residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// max over eta_j and junction heights of |g(1 + i y, eta) - e^{i eta} g(i y, eta)|.
QuasiperiodicityReport check_quasiperiodicity(const FloquetField& g, double tol);

/// <a, b> in L^2((-pi, pi); L^2(cell)) with the field's quadrature.
cplx transform_inner_product(const FloquetField& a, const FloquetField& b);

struct IsometryReport {
  double norm_domain_sq = 0.0;     ///< sum_{|m| <= window} ||f||^2 on cell m
  double norm_transform_sq = 0.0;  ///< ||F f||^2
  double relative_gap = 0.0;
  int window = 0;
};

/// Both sides of the isometry with matched truncation.
IsometryReport isometry_check(const SampledFunction& f, const CellRegion& region,
                              const std::optional<MollifierEps>& mollifier = std::nullopt,
                              const ForwardOptions& options = {});

struct DivergenceRow {
  long M = 0;
  cplx one_sided{};        ///< sum_{m=1}^{M} 1/(z + m)
  double minus_log = 0.0;  ///< Re one_sided - ln M
  cplx symmetric{};        ///< sum_{|m| <= M} 1/(z + m), paired
};

/// Partial sums of the transform of 1/z at eta = 0 for M, 2M, 4M, ... up to
/// M * 2^(levels-1), evaluated at z (default 1/2 + 3i/8).
std::vector<DivergenceRow> divergence_demo(long M, int levels = 2, cplx z = cplx(0.5, 0.375));

/// CSV dump with columns re_z, im_z, eta, re_g, im_g (point-major, then eta).
void write_field_csv(const FloquetField& g, std::ostream& out);

}  // namespace pbergman
