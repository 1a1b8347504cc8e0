#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace thb {

/// Gauss-Legendre rule with q nodes on the reference interval [0,1];
/// exact for polynomials of degree <= 2q-1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order() const { return static_cast<int>(nodes.size()); }
};

inline GaussRule gauss_legendre(int q) {
    if (q < 1 || q > 30) throw std::invalid_argument("gauss_legendre: order out of range");
    GaussRule rule;
    rule.nodes.resize(q);
    rule.weights.resize(q);
    // Newton iteration on P_q over [-1,1], then map to [0,1].
    for (int i = 0; i < q; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (q == 1) p1 = x;
            for (int n = 2; n <= q; ++n) {
                double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            double pq = (q == 1) ? x : p1;
            dp = q * (x * pq - p0) / (x * x - 1.0);
            double dx = pq / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[q - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[q - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace thb
