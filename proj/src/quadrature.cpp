#include "svi/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace svi {

namespace {

GaussLegendre compute_gl(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        gl.nodes[n - 1 - i] = x;
        gl.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return gl;
}

} // namespace

const GaussLegendre& gauss_legendre(int n)
{
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

} // namespace svi
