#pragma once

#include <functional>

namespace isoflow {

/// Adaptive Gauss-Kronrod (61 point) quadrature on [a, b] with relative
/// tolerance `tol`. Infinite limits are accepted.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-11);

/// Nested adaptive quadrature on a box.
double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                    double ay, double by, double tol = 1e-10);
double integrate_3d(const std::function<double(double, double, double)>& f, double ax, double bx,
                    double ay, double by, double az, double bz, double tol = 1e-9);

} // namespace isoflow
