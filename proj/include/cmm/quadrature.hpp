#pragma once

#include <vector>

namespace cmm::quadrature {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for int exp(-x^2) f(x) dx over the real line.
Rule gauss_hermite(int n);
/// Gauss-Laguerre rule for int_0^inf exp(-x) f(x) dx.
Rule gauss_laguerre(int n);

} // namespace cmm::quadrature
