#include "isoflow/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace isoflow {

namespace {
constexpr unsigned kMaxDepth = 15;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, kMaxDepth, tol);
}

double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                    double ay, double by, double tol) {
  return integrate(
      [&](double x) { return integrate([&](double y) { return f(x, y); }, ay, by, tol); }, ax, bx,
      tol);
}

double integrate_3d(const std::function<double(double, double, double)>& f, double ax, double bx,
                    double ay, double by, double az, double bz, double tol) {
  return integrate(
      [&](double x) {
        return integrate_2d([&](double y, double z) { return f(x, y, z); }, ay, by, az, bz, tol);
      },
      ax, bx, tol);
}

} // namespace isoflow
