#include <cmath>

#include "hybridns/fespace.hpp"

namespace hybridns {

const QuadratureRule& degree5_rule() {
  static const QuadratureRule rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0;
    const double b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0;
    const double b2 = (9.0 - 2.0 * s15) / 21.0;
    // Weights normalized to the reference area 1/2.
    const double w0 = 9.0 / 80.0;
    const double w1 = (155.0 - s15) / 2400.0;
    const double w2 = (155.0 + s15) / 2400.0;
    QuadratureRule r;
    r.degree = 5;
    r.points = {
        {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, w0},
        {{b1, a1, a1}, w1},
        {{a1, b1, a1}, w1},
        {{a1, a1, b1}, w1},
        {{b2, a2, a2}, w2},
        {{a2, b2, a2}, w2},
        {{a2, a2, b2}, w2},
    };
    return r;
  }();
  return rule;
}

}  // namespace hybridns
