#include "pbergman/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pbergman/error.hpp"

namespace pbergman {

namespace {

double legendre_moment(int k) { return (k % 2 == 1) ? 0.0 : 2.0 / (k + 1); }

void verify_exactness(const QuadratureRule& rule) {
  const int deg = rule.exact_degree;
  for (int k = 0; k <= deg; ++k) {
    double sum = 0.0, ref = 0.0, scale = 0.0;
    if (rule.kind == QuadratureRule::Kind::gauss_legendre) {
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double t = rule.weights[i] * std::pow(rule.nodes[i], k);
        sum += t;
        scale += std::abs(t);
      }
      ref = legendre_moment(k);
    } else {
      // (1+x)^k moments keep every term positive.
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double t = rule.weights[i] * std::pow(1.0 + rule.nodes[i], k);
        sum += t;
        scale += std::abs(t);
      }
      const double a = rule.alpha + 1.0, b = rule.beta + k + 1.0;
      ref = std::exp((rule.alpha + rule.beta + k + 1) * std::log(2.0) + std::lgamma(a) +
                     std::lgamma(b) - std::lgamma(a + b));
    }
    if (std::abs(sum - ref) > 1e-11 * std::max(scale, 1.0))
      throw Error(ErrorKind::QuadratureFailure,
                  "rule fails exactness at degree " + std::to_string(k));
  }
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::gauss_legendre;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Re-evaluate the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  rule.exact_degree = 2 * n - 1;
  verify_exactness(rule);
  return rule;
}

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "gauss_jacobi: n must be >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0))
    throw Error(ErrorKind::InvalidArgument, "gauss_jacobi: exponents must exceed -1");
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      diag(0) = (beta - alpha) / (ab + 2.0);
    } else {
      const double s = 2.0 * k + ab;
      diag(k) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    double b2;
    if (k == 1) {
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      const double s = 2.0 * k + ab;
      b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    sub(k - 1) = std::sqrt(b2);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  if (n == 1) {
    eig.compute(Eigen::MatrixXd::Constant(1, 1, diag(0)));
  } else {
    eig.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                              std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::gauss_jacobi;
  rule.alpha = alpha;
  rule.beta = beta;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  rule.exact_degree = 2 * n - 1;
  verify_exactness(rule);
  return rule;
}

QuadratureRule periodic_trapezoid(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "periodic_trapezoid: n must be >= 1");
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::periodic_trapezoid;
  rule.nodes.resize(n);
  rule.weights.assign(n, 2.0 * pi / n);
  for (int j = 0; j < n; ++j) rule.nodes[j] = -pi + 2.0 * pi * j / n;
  rule.exact_degree = n - 1;
  std::vector<int> probes;
  for (int k = 1; k <= std::min(n - 1, 8); ++k) probes.push_back(k);
  if (n > 9) probes.push_back(n - 1);
  for (int k : probes) {
    cplx s = 0.0;
    for (int j = 0; j < n; ++j) s += rule.weights[j] * std::exp(I * (double(k) * rule.nodes[j]));
    if (std::abs(s) > 1e-11)
      throw Error(ErrorKind::QuadratureFailure, "trapezoid rule fails at frequency " +
                                                    std::to_string(k));
  }
  return rule;
}

const QuadratureRule& cached_gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

BarycentricInterpolant::BarycentricInterpolant(std::vector<double> nodes)
    : nodes_(std::move(nodes)), weights_(nodes_.size(), 1.0) {
  const std::size_t n = nodes_.size();
  for (std::size_t j = 0; j < n; ++j) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) w *= (nodes_[j] - nodes_[k]);
    weights_[j] = 1.0 / w;
  }
  double wmax = 0.0;
  for (double w : weights_) wmax = std::max(wmax, std::abs(w));
  for (double& w : weights_) w /= wmax;
}

std::vector<double> BarycentricInterpolant::basis(double x) const {
  const std::size_t n = nodes_.size();
  std::vector<double> l(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (x == nodes_[j]) {
      l[j] = 1.0;
      return l;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    l[j] = weights_[j] / (x - nodes_[j]);
    denom += l[j];
  }
  for (double& v : l) v /= denom;
  return l;
}

int CellRegion::slab_index(double x) const noexcept {
  if (slabs.empty() || x < slabs.front().x0 || x > slabs.back().x1) return -1;
  for (std::size_t i = 0; i < slabs.size(); ++i)
    if (x < slabs[i].x1) return static_cast<int>(i);
  return static_cast<int>(slabs.size()) - 1;
}

bool CellRegion::contains(cplx z, double margin) const noexcept {
  const int s = slab_index(z.real());
  if (s < 0) return false;
  const Slab& sl = slabs[s];
  return z.imag() > sl.lower_at(z.real()) + margin && z.imag() < sl.upper_at(z.real()) - margin;
}

std::vector<CellNode> cell_nodes(const CellRegion& region, int order) {
  const QuadratureRule& gl = cached_gauss_legendre(order);
  std::vector<CellNode> out;
  out.reserve(region.slabs.size() * order * order);
  for (std::size_t s = 0; s < region.slabs.size(); ++s) {
    const Slab& sl = region.slabs[s];
    const double hx = 0.5 * (sl.x1 - sl.x0);
    for (int iu = 0; iu < order; ++iu) {
      const double su = 0.5 * (gl.nodes[iu] + 1.0);
      const double x = sl.x0 + (sl.x1 - sl.x0) * su;
      const double lo = sl.lower0 + (sl.lower1 - sl.lower0) * su;
      const double hi = sl.upper0 + (sl.upper1 - sl.upper0) * su;
      const double hy = 0.5 * (hi - lo);
      for (int iv = 0; iv < order; ++iv) {
        const double y = lo + hy * (gl.nodes[iv] + 1.0);
        out.push_back({cplx(x, y), gl.weights[iu] * gl.weights[iv] * hx * hy,
                       static_cast<int>(s), iu, iv});
      }
    }
  }
  return out;
}

std::vector<CellNode> graded_cell_nodes(const CellRegion& region, int order, int levels,
                                        double ratio) {
  if (order < 1 || levels < 0 || !(ratio > 0.0 && ratio < 1.0))
    throw Error(ErrorKind::InvalidArgument, "graded_cell_nodes: bad order, levels or ratio");
  // panels of the unit square [u0, u1] x [v0, v1]
  struct Panel {
    double u0, u1, v0, v1;
  };
  std::vector<Panel> panels;
  for (int cu = 0; cu < 2; ++cu)
    for (int cv = 0; cv < 2; ++cv) {
      // quadrant with its corner at (cu, cv); t measures distance from that corner
      auto emit = [&](double a0, double a1, double b0, double b1) {
        const double u0 = cu ? 1.0 - a1 : a0, u1 = cu ? 1.0 - a0 : a1;
        const double v0 = cv ? 1.0 - b1 : b0, v1 = cv ? 1.0 - b0 : b1;
        panels.push_back({u0, u1, v0, v1});
      };
      double s = 0.5;
      for (int l = 0; l < levels; ++l) {
        const double t = ratio * s;
        emit(t, s, 0.0, t);
        emit(0.0, t, t, s);
        emit(t, s, t, s);
        s = t;
      }
      emit(0.0, s, 0.0, s);
    }

  const QuadratureRule& gl = cached_gauss_legendre(order);
  std::vector<CellNode> out;
  out.reserve(region.slabs.size() * panels.size() * order * order);
  for (std::size_t k = 0; k < region.slabs.size(); ++k) {
    const Slab& sl = region.slabs[k];
    for (const Panel& p : panels) {
      const double hu = 0.5 * (p.u1 - p.u0), hv = 0.5 * (p.v1 - p.v0);
      for (int iu = 0; iu < order; ++iu) {
        const double u = p.u0 + hu * (gl.nodes[iu] + 1.0);
        const double x = sl.x0 + (sl.x1 - sl.x0) * u;
        const double lo = sl.lower0 + (sl.lower1 - sl.lower0) * u;
        const double hi = sl.upper0 + (sl.upper1 - sl.upper0) * u;
        const double jac = (sl.x1 - sl.x0) * (hi - lo);
        for (int iv = 0; iv < order; ++iv) {
          const double v = p.v0 + hv * (gl.nodes[iv] + 1.0);
          out.push_back({cplx(x, lo + (hi - lo) * v), gl.weights[iu] * gl.weights[iv] * hu * hv * jac,
                         static_cast<int>(k), -1, -1});
        }
      }
    }
  }
  return out;
}

namespace {

cplx cell_sum(const CellRegion& region, const std::function<cplx(cplx)>& f, int order) {
  const auto nodes = cell_nodes(region, order);
  std::vector<cplx> terms;
  terms.reserve(nodes.size());
  for (const auto& nd : nodes) terms.push_back(nd.weight * f(nd.z));
  return pairwise_sum(terms);
}

}  // namespace

Estimate integrate_cell(const CellRegion& region, const std::function<cplx(cplx)>& f,
                        int order, double tol) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "integrate_cell: order must be >= 1");
  const cplx coarse = cell_sum(region, f, order);
  const cplx fine = cell_sum(region, f, 2 * order);
  Estimate est{fine, std::abs(fine - coarse)};
  if (!(est.error <= tol))
    throw Error(ErrorKind::EstimateAboveTolerance,
                "cell quadrature self-estimate " + std::to_string(est.error));
  return est;
}

Estimate integrate_interval(const std::function<cplx(double)>& f, double a, double b,
                            double tol, int max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const cplx v = gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, tol, &err);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw Error(ErrorKind::QuadratureFailure, "non-finite integral on a finite interval");
  return {v, err};
}

Estimate integrate_line_adaptive(const std::function<cplx(double)>& f,
                                 const LineCutoffPolicy& policy) {
  double peak = 0.0;
  const int probes = 64;
  for (int i = 0; i <= probes; ++i) {
    const double t = policy.initial_extent * (2.0 * i / probes - 1.0);
    peak = std::max(peak, std::abs(f(t)));
  }
  if (peak == 0.0) return {};
  auto tail_small = [&](double T) {
    for (double s : {1.0, 1.25, 1.5, 2.0})
      if (std::abs(f(s * T)) > policy.threshold * peak ||
          std::abs(f(-s * T)) > policy.threshold * peak)
        return false;
    return true;
  };
  double T = policy.initial_extent;
  while (!tail_small(T)) {
    T *= 2.0;
    if (T > policy.max_extent)
      throw Error(ErrorKind::NoDecayDetected,
                  "integrand above cutoff beyond |t| = " + std::to_string(policy.max_extent));
  }
  const int pieces = static_cast<int>(std::ceil(T / 0.5));
  const double h = T / pieces;
  Estimate total;
  std::vector<cplx> parts;
  for (int side : {-1, 1}) {
    for (int k = 0; k < pieces; ++k) {
      const double a = side * k * h, b = side * (k + 1) * h;
      const auto e = integrate_interval(f, std::min(a, b), std::max(a, b), 1e-12, 10);
      parts.push_back(e.value);
      total.error += e.error;
    }
  }
  total.value = pairwise_sum(parts);
  total.error += policy.threshold * peak * 2.0 * T;
  return total;
}

NllsReport nlls_solve(const ResidualFn& residual, Eigen::VectorXd init,
                      const SolverBudget& budget) {
  NllsReport rep;
  Eigen::VectorXd x = std::move(init);
  const Eigen::Index n = x.size();
  Eigen::VectorXd r = residual(x);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) {
    rep.x = x;
    rep.cost = cost;
    rep.status = "non-finite residual at initial point";
    return rep;
  }

  auto jacobian = [&](const Eigen::VectorXd& at) {
    Eigen::MatrixXd J(r.size(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = budget.fd_step * std::max(1.0, std::abs(at(i)));
      Eigen::VectorXd xp = at, xm = at;
      xp(i) += h;
      xm(i) -= h;
      J.col(i) = (residual(xp) - residual(xm)) / (2.0 * h);
    }
    return J;
  };

  Eigen::MatrixXd J = jacobian(x);
  Eigen::MatrixXd A = J.transpose() * J;
  Eigen::VectorXd g = J.transpose() * r;
  double mu = budget.initial_damping * std::max(A.diagonal().maxCoeff(), 1e-300);
  double nu = 2.0;

  for (int iter = 0; iter < budget.max_iterations; ++iter) {
    rep.iterations = iter;
    if (cost <= budget.cost_tol) {
      rep.converged = true;
      rep.status = "cost below tolerance";
      break;
    }
    if (g.lpNorm<Eigen::Infinity>() <= budget.gradient_tol) {
      rep.converged = true;
      rep.status = "gradient below tolerance";
      break;
    }
    Eigen::MatrixXd Ad = A;
    Ad.diagonal().array() += mu;
    const Eigen::VectorXd delta = Ad.ldlt().solve(-g);
    if (delta.norm() <= budget.step_tol * (x.norm() + budget.step_tol)) {
      rep.converged = true;
      rep.status = "step below tolerance";
      break;
    }
    const Eigen::VectorXd xn = x + delta;
    const Eigen::VectorXd rn = residual(xn);
    const double cn = 0.5 * rn.squaredNorm();
    rep.trace.push_back(cn);
    const double predicted = 0.5 * delta.dot(mu * delta - g);
    const double gain = (cost - cn) / predicted;
    if (std::isfinite(cn) && gain > 0.0) {
      x = xn;
      r = rn;
      cost = cn;
      J = jacobian(x);
      A = J.transpose() * J;
      g = J.transpose() * r;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      nu = 2.0;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) {
        rep.status = "damping overflow";
        break;
      }
    }
    rep.iterations = iter + 1;
  }
  if (rep.status.empty()) rep.status = "iteration budget exhausted";
  rep.x = x;
  rep.cost = cost;
  return rep;
}

cplx sech(cplx z) {
  if (z.real() < 0.0) z = -z;
  const cplx e = std::exp(-z);
  return 2.0 * e / (1.0 + e * e);
}

cplx sech2(cplx z) {
  if (z.real() < 0.0) z = -z;
  const cplx e = std::exp(-2.0 * z);
  const cplx d = 1.0 + e;
  return 4.0 * e / (d * d);
}

double arg_in_window(cplx w, double lo) {
  double a = std::arg(w);
  const double k = std::floor((a - lo) / (2.0 * pi));
  a -= k * 2.0 * pi;
  if (a < lo) a += 2.0 * pi;
  if (a >= lo + 2.0 * pi) a -= 2.0 * pi;
  return a;
}

cplx pairwise_sum(std::span<const cplx> terms) {
  const std::size_t n = terms.size();
  if (n <= 16) {
    cplx s = 0.0;
    for (const cplx& t : terms) s += t;
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(terms.subspan(0, h)) + pairwise_sum(terms.subspan(h));
}

}  // namespace pbergman
