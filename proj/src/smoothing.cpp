#include "zogt/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace zogt {

SphereDirection sample_unit_sphere(RngStream& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_unit_sphere: n must be >= 1");
  Eigen::VectorXd v(n);
  double norm = 0.0;
  do {
    v = rng.gaussian(n);
    norm = v.norm();
  } while (norm < 1e-300);
  return SphereDirection{v / norm};
}

Eigen::VectorXd sample_unit_ball(RngStream& rng, int n) {
  const SphereDirection dir = sample_unit_sphere(rng, n);
  const double radius = std::pow(rng.uniform(), 1.0 / n);
  return radius * dir.v;
}

ZoGradient zo_gradient(double h_plus, double h_minus,
                       const SphereDirection& v, double eta, int n) {
  if (!(eta > 0.0)) throw std::invalid_argument("zo_gradient: eta must be > 0");
  const double scale = (static_cast<double>(n) / (2.0 * eta)) * (h_plus - h_minus);
  return ZoGradient{scale * v.v, eta, n};
}

double smoothed_value_mc(const ScalarFn& h, const Eigen::VectorXd& x,
                         double eta, long samples, RngStream& rng) {
  if (!(eta > 0.0) || samples < 1)
    throw std::invalid_argument("smoothed_value_mc: bad eta or sample count");
  const int n = static_cast<int>(x.size());
  double sum = 0.0;
  for (long s = 0; s < samples; ++s) {
    sum += h(x + eta * sample_unit_ball(rng, n));
  }
  return sum / static_cast<double>(samples);
}

double smoothed_grad_norm_mc(const ScalarFn& h, const Eigen::VectorXd& x,
                             double eta, long samples, RngStream& rng) {
  if (!(eta > 0.0) || samples < 1)
    throw std::invalid_argument("smoothed_grad_norm_mc: bad eta or sample count");
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (long s = 0; s < samples; ++s) {
    const SphereDirection v = sample_unit_sphere(rng, n);
    const double hp = h(x + eta * v.v);
    const double hm = h(x - eta * v.v);
    acc += zo_gradient(hp, hm, v, eta, n).g;
  }
  return (acc / static_cast<double>(samples)).norm();
}

}  // namespace zogt
