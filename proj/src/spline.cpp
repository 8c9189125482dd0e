#include "krrtf/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace krrtf {

double SplineNet::operator()(double x) const { return eval(*this, x); }

double eval(const SplineNet& net, double x) {
  double s = net.d0;
  for (const ReluUnit& u : net.units) {
    s += u.c * std::max(0.0, u.a * x + u.b);
  }
  return s;
}

SplineNet build_pwl(const ScalarFn& f, const std::vector<double>& nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("partition needs at least two nodes");
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (!(nodes[k] > nodes[k - 1])) throw std::invalid_argument("partition is not strictly increasing");
  }
  const std::size_t n = nodes.size() - 1;
  std::vector<double> values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = f(nodes[k]);

  SplineNet net;
  net.lo = nodes.front();
  net.hi = nodes.back();
  net.nodes = nodes;
  net.d0 = values[0];
  net.units.reserve(n);
  double prev_slope = 0.0;
  for (std::size_t s = 1; s <= n; ++s) {
    const double slope = (values[s] - values[s - 1]) / (nodes[s] - nodes[s - 1]);
    net.units.push_back(ReluUnit{1.0, -nodes[s - 1], s == 1 ? slope : slope - prev_slope});
    prev_slope = slope;
  }
  return net;
}

int ceil_count(double x) {
  const double slack = 1e-12 * std::max(1.0, std::abs(x));
  return static_cast<int>(std::ceil(x - slack));
}

int square_width(double delta, double eps) {
  if (!(delta > 0.0) || !(eps > 0.0)) throw std::invalid_argument("square spline needs delta, eps > 0");
  return std::max(1, ceil_count(delta / std::sqrt(eps)));
}

int flip_width(double delta, double eps) {
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("flip spline needs delta in (0, 1)");
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("flip spline needs eps in (0, 1)");
  const double g = 1.0 / std::sqrt(1.0 - delta) - 1.0;
  return std::max({1, ceil_count(2.0 * g / std::sqrt(eps)), ceil_count(g)});
}

int inv_width(double delta, double eps) {
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("inverse spline needs delta in (0, 1)");
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("inverse spline needs eps in (0, 1)");
  return ceil_count(3.0 / std::sqrt(delta * eps));
}

SplineNet approx_square(double delta, double eps) {
  const int n = square_width(delta, eps);
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) nodes[k] = -delta + 2.0 * delta * k / n;
  nodes.front() = -delta;
  nodes.back() = delta;
  return build_pwl([](double x) { return x * x; }, nodes);
}

SplineNet approx_flip(double delta, double eps) {
  const int n = flip_width(delta, eps);
  const double top = 1.0 / std::sqrt(1.0 - delta);
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double y = 1.0 + (static_cast<double>(k) / n) * (top - 1.0);
    nodes[k] = 1.0 - 1.0 / (y * y);
  }
  nodes.front() = 0.0;
  nodes.back() = delta;
  return build_pwl([](double x) { return x / (1.0 - x); }, nodes);
}

SplineNet approx_inv(double delta, double eps) {
  const int n = inv_width(delta, eps);
  const double top = 1.0 / std::sqrt(delta);
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double y = top - (static_cast<double>(k) / n) * (top - 1.0);
    nodes[k] = 1.0 / (y * y);
  }
  nodes.front() = delta;
  nodes.back() = 1.0;
  return build_pwl([](double x) { return 1.0 / x; }, nodes);
}

double measure_sup_error(const SplineNet& net, const ScalarFn& f, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("grid needs at least two points");
  double worst = 0.0;
  const double span = net.hi - net.lo;
  for (int i = 0; i < grid_points; ++i) {
    const double x = i + 1 == grid_points ? net.hi : net.lo + span * i / (grid_points - 1);
    worst = std::max(worst, std::abs(f(x) - eval(net, x)));
  }
  return worst;
}

double interpolation_error_bound(const std::vector<double>& nodes, const CurvatureFn& curvature) {
  double worst = 0.0;
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const double h = nodes[k] - nodes[k - 1];
    worst = std::max(worst, h * h / 8.0 * curvature(nodes[k - 1], nodes[k]));
  }
  return worst;
}

}  // namespace krrtf
