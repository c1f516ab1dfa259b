#pragma once

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "qpsn/quantum_state.hpp"

namespace oracle {

using qpsn::qstate::Complex;
using qpsn::qstate::Matrix;

// Depolarizing written with Pauli Kraus operators instead of the partial trace.
inline Matrix pauli_depolarize(const Matrix& rho, int qubit, double p)
{
    Eigen::Matrix2cd X, Y, Z, I = Eigen::Matrix2cd::Identity();
    X << 0, 1, 1, 0;
    Y << 0, Complex(0, -1), Complex(0, 1), 0;
    Z << 1, 0, 0, -1;
    auto lift = [&](const Eigen::Matrix2cd& k) -> Eigen::MatrixXcd {
        if (rho.rows() == 2) return k;
        return qubit == 0 ? Eigen::kroneckerProduct(k, I).eval() : Eigen::kroneckerProduct(I, k).eval();
    };
    Eigen::MatrixXcd r = rho;
    Eigen::MatrixXcd out = (1.0 - 3.0 * p / 4.0) * r;
    for (const auto* k : {&X, &Y, &Z}) {
        const Eigen::MatrixXcd K = lift(*k);
        out += (p / 4.0) * K * r * K.adjoint();
    }
    return Matrix(out);
}

// Element-wise relaxation: populations flow |1> -> |0>, coherences decay with T2.
inline Matrix relax_oracle(const Matrix& rho, int qubit, double t, double T1, double T2)
{
    const int dim = static_cast<int>(rho.rows());
    const int shift = dim == 2 ? 0 : (qubit == 0 ? 1 : 0);
    const double keep = std::exp(-t / T1);
    const double coh = std::exp(-t / T2);
    Matrix out = rho;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const int bi = (i >> shift) & 1, bj = (j >> shift) & 1;
            if (bi == 0 && bj == 0)
                out(i, j) = rho(i, j) + (1.0 - keep) * rho(i | (1 << shift), j | (1 << shift));
            else if (bi == 1 && bj == 1)
                out(i, j) = keep * rho(i, j);
            else
                out(i, j) = coh * rho(i, j);
        }
    return out;
}

}  // namespace oracle
