#include "cmm/quadrature.hpp"

#include "cmm/common.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace cmm::quadrature {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come from
// the first eigenvector components scaled by the zeroth moment.
Rule from_jacobi(const Eigen::VectorXd& diagonal, const Eigen::VectorXd& off_diagonal, double mu0)
{
    const auto n = diagonal.size();
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        jacobi(i, i) = diagonal(i);
        if (i + 1 < n) {
            jacobi(i, i + 1) = off_diagonal(i);
            jacobi(i + 1, i) = off_diagonal(i);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw NumericalError("Golub-Welsch eigen-decomposition failed");

    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

} // namespace

Rule gauss_hermite(int n)
{
    require(n >= 1, "quadrature order must be positive");
    Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off = Eigen::VectorXd::Zero(std::max(n - 1, 0));
    for (int i = 0; i + 1 < n; ++i)
        off(i) = std::sqrt((i + 1) / 2.0);
    return from_jacobi(diagonal, off, std::sqrt(kPi));
}

Rule gauss_laguerre(int n)
{
    require(n >= 1, "quadrature order must be positive");
    Eigen::VectorXd diagonal(n);
    Eigen::VectorXd off = Eigen::VectorXd::Zero(std::max(n - 1, 0));
    for (int i = 0; i < n; ++i) {
        diagonal(i) = 2.0 * i + 1.0;
        if (i + 1 < n)
            off(i) = i + 1.0;
    }
    return from_jacobi(diagonal, off, 1.0);
}

} // namespace cmm::quadrature
