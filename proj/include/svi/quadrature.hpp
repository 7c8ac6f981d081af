// Gauss-Legendre quadrature helpers.
#pragma once

#include <utility>
#include <vector>

namespace svi {

struct GaussLegendre {
    std::vector<double> nodes;   // on (-1, 1)
    std::vector<double> weights;
};

// Nodes/weights by Newton iteration on the Legendre polynomial; cached per n.
const GaussLegendre& gauss_legendre(int n);

template <class F>
double integrate_gl(F&& f, double a, double b, int n)
{
    const GaussLegendre& gl = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return half * sum;
}

} // namespace svi
