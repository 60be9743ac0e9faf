#pragma once

#include <functional>

namespace hybridns {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Analytic fields evaluated at (x, y, t). Implementations must be pure.
using ScalarField = std::function<double(double x, double y, double t)>;
using VectorField = std::function<Vec2(double x, double y, double t)>;

inline VectorField zero_vector_field() {
  return [](double, double, double) { return Vec2{}; };
}

inline ScalarField zero_scalar_field() {
  return [](double, double, double) { return 0.0; };
}

}  // namespace hybridns
