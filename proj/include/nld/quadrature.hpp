#ifndef NLD_QUADRATURE_HPP
#define NLD_QUADRATURE_HPP

#include <vector>

#include "nld/errors.hpp"

namespace nld {

struct QuadratureSpec {
    int nodes_per_dim = 96;      // composite Gauss-Legendre total per dimension
    int panel_order = 16;        // GL order within each panel
    double contour_delta = 0.3;  // offset of the vertical contours
    double onaxis_epsilon = 1e-4;  // node offset guarding diagonal cancellation
    double truncation = 0.0;     // 0 = derive from the test function's decay
};

namespace quadrature {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

struct Grid {
    std::vector<double> x;
    std::vector<double> w;
};

// Composite rule on [a, b]: `total` nodes split into panels of `order`.
Grid composite_gl(double a, double b, int total, int order);

}  // namespace quadrature
}  // namespace nld

#endif
