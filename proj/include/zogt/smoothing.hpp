#pragma once

#include <functional>

#include <Eigen/Core>

#include "zogt/rng.hpp"

namespace zogt {

/// Unit direction on the sphere S^{n-1}.
struct SphereDirection {
  Eigen::VectorXd v;
};

/// Two-point zeroth-order gradient of the eta-smoothed objective:
/// g = (n / 2 eta) (h_plus - h_minus) v.
struct ZoGradient {
  Eigen::VectorXd g;
  double eta = 0.0;
  int n = 0;
};

/// Uniform draw on the unit sphere: n standard normals, normalized.
SphereDirection sample_unit_sphere(RngStream& rng, int n);

/// Uniform draw in the unit ball: sphere direction scaled by U^{1/n}.
Eigen::VectorXd sample_unit_ball(RngStream& rng, int n);

ZoGradient zo_gradient(double h_plus, double h_minus,
                       const SphereDirection& v, double eta, int n);

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

/// Monte Carlo estimate of the ball-smoothed value
/// h^eta(x) = E_{u in B}[h(x + eta u)].
double smoothed_value_mc(const ScalarFn& h, const Eigen::VectorXd& x,
                         double eta, long samples, RngStream& rng);

/// Monte Carlo stationarity surrogate: norm of the averaged two-point
/// estimator of grad h^eta(x) over `samples` sphere directions.
double smoothed_grad_norm_mc(const ScalarFn& h, const Eigen::VectorXd& x,
                             double eta, long samples, RngStream& rng);

}  // namespace zogt
