#include "nld/quadrature.hpp"

#include <cmath>

namespace nld {
namespace quadrature {

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    if (order < 1) throw ValidationError("gauss_legendre: order >= 1");
    nodes.assign(order, 0.0);
    weights.assign(order, 0.0);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev initial guess, Newton on P_n
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
}

Grid composite_gl(double a, double b, int total, int order) {
    if (total < 1) throw ValidationError("composite_gl: need at least one node");
    int ord = std::min(order, total);
    int panels = std::max(1, total / ord);
    std::vector<double> xs, ws;
    gauss_legendre(ord, xs, ws);
    Grid g;
    g.x.reserve(panels * ord);
    g.w.reserve(panels * ord);
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        for (int i = 0; i < ord; ++i) {
            g.x.push_back(lo + 0.5 * h * (xs[i] + 1.0));
            g.w.push_back(0.5 * h * ws[i]);
        }
    }
    return g;
}

}  // namespace quadrature
}  // namespace nld
