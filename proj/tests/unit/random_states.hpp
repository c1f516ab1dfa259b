#pragma once

#include <random>

#include "qpsn/quantum_state.hpp"

namespace testgen {

using qpsn::qstate::Complex;
using qpsn::qstate::DensityMatrix;
using qpsn::qstate::Matrix;

// Random mixed state of the given dimension: G G^dagger / tr with complex
// Gaussian G, optionally rank-deficient.
inline Matrix random_density(std::mt19937_64& rng, int dim, int rank = -1)
{
    std::normal_distribution<double> n(0.0, 1.0);
    if (rank < 1 || rank > dim) rank = dim;
    Eigen::MatrixXcd g(dim, rank);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < rank; ++j) g(i, j) = Complex(n(rng), n(rng));
    Eigen::MatrixXcd m = g * g.adjoint();
    m /= m.trace().real();
    m = 0.5 * (m + m.adjoint()).eval();
    return Matrix(m);
}

inline DensityMatrix random_state(std::mt19937_64& rng, int dim)
{
    std::uniform_int_distribution<int> r(1, dim);
    return DensityMatrix::from_matrix(random_density(rng, dim, r(rng)));
}

inline double max_abs_diff(const Matrix& a, const Matrix& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testgen
