#pragma once

// Shared numerical substrate: 1D rules, cell (2D) quadrature, adaptive line
// integration, damped least squares and a few complex helpers.

#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pbergman {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// ---------------------------------------------------------------------------
// 1D rules
// ---------------------------------------------------------------------------

struct QuadratureRule {
  enum class Kind { gauss_legendre, gauss_jacobi, periodic_trapezoid };

  Kind kind = Kind::gauss_legendre;
  std::vector<double> nodes;
  std::vector<double> weights;
  /// Highest polynomial (or trigonometric) degree integrated exactly. Checked
  /// against reference moments when the rule is built.
  int exact_degree = 0;
  double alpha = 0.0;  ///< Jacobi exponent at x = +1
  double beta = 0.0;   ///< Jacobi exponent at x = -1

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1],
/// alpha, beta > -1 (Golub-Welsch).
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

/// n-point periodic trapezoid rule on [-pi, pi): nodes -pi + 2 pi j / n,
/// weights 2 pi / n. Exact for trigonometric polynomials of degree < n.
QuadratureRule periodic_trapezoid(int n);

/// Cached Gauss-Legendre rule; rules are immutable once built.
const QuadratureRule& cached_gauss_legendre(int n);

/// Barycentric Lagrange interpolation on a fixed node set.
class BarycentricInterpolant {
public:
  explicit BarycentricInterpolant(std::vector<double> nodes);

  /// Lagrange basis values at x (sums to one).
  std::vector<double> basis(double x) const;
  const std::vector<double>& nodes() const noexcept { return nodes_; }

private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Cell regions and 2D quadrature
// ---------------------------------------------------------------------------

/// Vertical slab x0 <= x <= x1 bounded below and above by straight segments.
/// Lower boundary runs from (x0, lower0) to (x1, lower1), upper likewise.
struct Slab {
  double x0 = 0.0, x1 = 0.0;
  double lower0 = 0.0, lower1 = 0.0;
  double upper0 = 0.0, upper1 = 0.0;

  double area() const noexcept {
    return 0.5 * (x1 - x0) * ((upper0 - lower0) + (upper1 - lower1));
  }
  double lower_at(double x) const noexcept {
    return lower0 + (lower1 - lower0) * (x - x0) / (x1 - x0);
  }
  double upper_at(double x) const noexcept {
    return upper0 + (upper1 - upper0) * (x - x0) / (x1 - x0);
  }
};

/// Quadrature-ready decomposition of a period cell into slabs.
struct CellRegion {
  std::vector<Slab> slabs;
  double area = 0.0;
  double junction_low = 0.0;   ///< a: bottom of the junction segments
  double junction_high = 0.0;  ///< b: top of the junction segments

  /// Slab containing Re z (closed on the left), or -1 when outside [0, 1].
  int slab_index(double x) const noexcept;
  bool contains(cplx z, double margin = 0.0) const noexcept;
};

struct CellNode {
  cplx z;
  double weight = 0.0;
  int slab = 0;
  int iu = 0;  ///< index along x inside the slab
  int iv = 0;  ///< index along y inside the slab
};

/// Tensor Gauss-Legendre nodes (order x order per slab), slab-major ordering.
std::vector<CellNode> cell_nodes(const CellRegion& region, int order);

/// Composite rule refined geometrically toward the four corners of every
/// slab (order x order Gauss-Legendre per panel, `levels` refinements with
/// ratio `ratio`). Meant for integrands with corner singularities; iu and iv
/// of the returned nodes are -1.
std::vector<CellNode> graded_cell_nodes(const CellRegion& region, int order, int levels,
                                        double ratio = 0.15);

struct Estimate {
  cplx value{};
  double error = 0.0;
};

/// Integrates f over the cell with an order x order tensor rule per slab; the
/// error estimate is the difference against the doubled order. Throws
/// EstimateAboveTolerance when the estimate exceeds tol.
Estimate integrate_cell(const CellRegion& region, const std::function<cplx(cplx)>& f,
                        int order = 32,
                        double tol = std::numeric_limits<double>::infinity());

// ---------------------------------------------------------------------------
// Line integrals
// ---------------------------------------------------------------------------

/// Finite interval, adaptive Gauss-Kronrod (15 point) with bisection.
Estimate integrate_interval(const std::function<cplx(double)>& f, double a, double b,
                            double tol = 1e-14, int max_depth = 20);

struct LineCutoffPolicy {
  double threshold = 1e-16;  ///< truncate where |f| falls below threshold * peak
  double initial_extent = 1.0;
  double max_extent = 1e4;
};

/// Integral over the whole real line of an exponentially decaying integrand.
/// The tails are cut where |f| drops below the policy threshold (relative to
/// the largest sampled magnitude). Throws NoDecayDetected otherwise.
Estimate integrate_line_adaptive(const std::function<cplx(double)>& f,
                                 const LineCutoffPolicy& policy = {});

// ---------------------------------------------------------------------------
// Nonlinear least squares
// ---------------------------------------------------------------------------

struct SolverBudget {
  int max_iterations = 200;
  double gradient_tol = 1e-13;
  double step_tol = 1e-14;
  double cost_tol = 1e-30;
  double initial_damping = 1e-3;
  double fd_step = 6e-6;  // about eps^(1/3), central differences
};

struct NllsReport {
  Eigen::VectorXd x;
  double cost = 0.0;  ///< 0.5 * |r|^2 at x
  int iterations = 0;
  bool converged = false;
  std::string status;
  std::vector<double> trace;  ///< cost after each accepted or rejected trial
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Levenberg-Marquardt on a central-difference Jacobian. Deterministic: the
/// same inputs give bitwise identical traces. Never throws on non-convergence;
/// the report carries the best iterate and converged = false.
NllsReport nlls_solve(const ResidualFn& residual, Eigen::VectorXd init,
                      const SolverBudget& budget = {});

// ---------------------------------------------------------------------------
// Complex helpers
// ---------------------------------------------------------------------------

cplx sech(cplx z);
/// sech^2 computed as 4 e^{-2z} / (1 + e^{-2z})^2 on the decaying side.
cplx sech2(cplx z);

/// Argument of w chosen in the half-open window [lo, lo + 2 pi).
double arg_in_window(cplx w, double lo);

/// Pairwise (cascade) summation; order-deterministic.
cplx pairwise_sum(std::span<const cplx> terms);

}  // namespace pbergman
