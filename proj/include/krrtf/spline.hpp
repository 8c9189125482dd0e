#pragma once

#include <functional>
#include <vector>

namespace krrtf {

struct ReluUnit {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
};

// phi(x) = sum_s c_s ReLU(a_s x + b_s) + d0 on [lo, hi].
struct SplineNet {
  double d0 = 0.0;
  std::vector<ReluUnit> units;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> nodes;

  int width() const { return static_cast<int>(units.size()); }
  double operator()(double x) const;
};

using ScalarFn = std::function<double(double)>;
// Returns sup |f''| over [a, b].
using CurvatureFn = std::function<double(double, double)>;

double eval(const SplineNet& net, double x);

SplineNet build_pwl(const ScalarFn& f, const std::vector<double>& nodes);

int square_width(double delta, double eps);
int flip_width(double delta, double eps);
int inv_width(double delta, double eps);

// x^2 on [-delta, delta].
SplineNet approx_square(double delta, double eps);
// x / (1 - x) on [0, delta].
SplineNet approx_flip(double delta, double eps);
// 1 / x on [delta, 1].
SplineNet approx_inv(double delta, double eps);

double measure_sup_error(const SplineNet& net, const ScalarFn& f, int grid_points = 100000);

// max_k (h_k^2 / 8) sup_{[x_{k-1}, x_k]} |f''|
double interpolation_error_bound(const std::vector<double>& nodes, const CurvatureFn& curvature);

// ceil with a relative allowance for rounding noise just above an integer.
int ceil_count(double x);

}  // namespace krrtf
