#include "qpsn/quantum_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace qpsn::qstate {

namespace {

using Matrix2 = Eigen::Matrix2cd;

void require_qubit(const DensityMatrix& rho, int qubit)
{
    if (qubit < 0 || qubit >= rho.num_qubits()) {
        std::ostringstream os;
        os << "qubit index " << qubit << " invalid for a " << rho.dim() << "-dimensional state";
        throw StateError(os.str());
    }
}

void require_probability(double p, const char* what)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw StateError(std::string(what) + " must lie in [0, 1]");
    }
}

// K acting on `qubit`, identity elsewhere.
Matrix embed(const Matrix2& k, int qubit, int dim)
{
    if (dim == 2) {
        return k;
    }
    const Matrix2 id = Matrix2::Identity();
    Matrix out(4, 4);
    const Matrix2& left = qubit == 0 ? k : id;
    const Matrix2& right = qubit == 0 ? id : k;
    for (int a = 0; a < 2; ++a)
        for (int ap = 0; ap < 2; ++ap)
            for (int b = 0; b < 2; ++b)
                for (int bp = 0; bp < 2; ++bp)
                    out(2 * a + b, 2 * ap + bp) = left(a, ap) * right(b, bp);
    return out;
}

template <std::size_t N>
DensityMatrix apply_kraus(const DensityMatrix& rho, int qubit, const std::array<Matrix2, N>& ops)
{
    const Matrix& m = rho.matrix();
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (const auto& k : ops) {
        const Matrix full = embed(k, qubit, rho.dim());
        out += full * m * full.adjoint();
    }
    // Re-symmetrise to keep rounding from accumulating an anti-Hermitian part.
    Matrix herm = 0.5 * (out + out.adjoint());
    return DensityMatrix::unchecked(std::move(herm));
}

}  // namespace

Validity check_state(const Matrix& m)
{
    if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
        return {false, "dimension must be 2 or 4"};
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
                return {false, "non-finite entry"};
            }
            if (std::abs(m(i, j) - std::conj(m(j, i))) > kHermitianTol) {
                return {false, "not Hermitian"};
            }
        }
    }
    if (std::abs(m.trace() - Complex(1.0, 0.0)) > kTraceTol) {
        return {false, "trace differs from 1"};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(m), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        return {false, "eigensolver failed"};
    }
    if (solver.eigenvalues().minCoeff() < -kEigenTol) {
        return {false, "negative eigenvalue"};
    }
    return {true, {}};
}

DensityMatrix DensityMatrix::from_matrix(const Matrix& m)
{
    const Validity v = check_state(m);
    if (!v.ok) {
        throw StateError("invalid density matrix: " + v.reason);
    }
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& amplitudes)
{
    if (amplitudes.size() != 2 && amplitudes.size() != 4) {
        throw StateError("state vector must have 2 or 4 amplitudes");
    }
    const double norm = amplitudes.norm();
    if (!(norm > 0.0)) {
        throw StateError("state vector has zero norm");
    }
    const Eigen::VectorXcd v = amplitudes / norm;
    return from_matrix(v * v.adjoint());
}

DensityMatrix make_epr()
{
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
    return DensityMatrix::unchecked(std::move(m));
}

double depolar_prob(double length_km, double p_per_km)
{
    if (!(length_km >= 0.0)) {
        throw StateError("fiber length must be non-negative");
    }
    if (!(p_per_km >= 0.0)) {
        throw StateError("per-km depolarization coefficient must be non-negative");
    }
    const double p = 1.0 - std::pow(10.0, -length_km * p_per_km);
    return std::clamp(p, 0.0, 1.0);
}

DensityMatrix apply_depolarizing(const DensityMatrix& rho, int qubit, double p)
{
    require_qubit(rho, qubit);
    require_probability(p, "depolarizing probability");
    if (p == 0.0) {
        return rho;
    }

    const Matrix& m = rho.matrix();
    Matrix replaced = Matrix::Zero(m.rows(), m.cols());
    if (rho.dim() == 2) {
        replaced = 0.5 * Matrix::Identity(2, 2);
    } else if (qubit == 0) {
        // I/2 (x) Tr_0(rho)
        for (int b = 0; b < 2; ++b)
            for (int bp = 0; bp < 2; ++bp) {
                const Complex reduced = m(b, bp) + m(2 + b, 2 + bp);
                for (int a = 0; a < 2; ++a)
                    replaced(2 * a + b, 2 * a + bp) = 0.5 * reduced;
            }
    } else {
        // Tr_1(rho) (x) I/2
        for (int a = 0; a < 2; ++a)
            for (int ap = 0; ap < 2; ++ap) {
                const Complex reduced = m(2 * a, 2 * ap) + m(2 * a + 1, 2 * ap + 1);
                for (int b = 0; b < 2; ++b)
                    replaced(2 * a + b, 2 * ap + b) = 0.5 * reduced;
            }
    }
    return DensityMatrix::unchecked((1.0 - p) * m + p * replaced);
}

DensityMatrix apply_t1t2(const DensityMatrix& rho, int qubit, double t, double T1, double T2)
{
    require_qubit(rho, qubit);
    if (!(t >= 0.0)) {
        throw StateError("elapsed time must be non-negative");
    }
    if (!(T1 > 0.0) || !(T2 > 0.0)) {
        throw StateError("T1 and T2 must be positive");
    }
    if (T2 > 2.0 * T1 * (1.0 + 1e-12)) {
        throw StateError("unphysical relaxation times: T2 must not exceed 2*T1");
    }
    if (t == 0.0) {
        return rho;
    }

    const double keep = std::exp(-t / T1);  // surviving excited population
    const double gamma = 1.0 - keep;
    // Amplitude damping alone scales coherences by sqrt(keep) = exp(-t/(2 T1));
    // the dephasing step supplies the remainder of exp(-t/T2).
    const double extra = std::min(1.0, std::exp(-t / T2 + t / (2.0 * T1)));
    const double flip = 0.5 * (1.0 - extra);

    std::array<Matrix2, 2> damping;
    damping[0] << 1.0, 0.0, 0.0, std::sqrt(keep);
    damping[1] << 0.0, std::sqrt(gamma), 0.0, 0.0;
    std::array<Matrix2, 2> dephasing;
    dephasing[0] = std::sqrt(1.0 - flip) * Matrix2::Identity();
    dephasing[1] << std::sqrt(flip), 0.0, 0.0, -std::sqrt(flip);

    return apply_kraus(apply_kraus(rho, qubit, damping), qubit, dephasing);
}

double fidelity(const DensityMatrix& rho)
{
    if (rho.dim() != 4) {
        throw StateError("fidelity against the Bell state needs a two-qubit state");
    }
    const Matrix& m = rho.matrix();
    const double f = 0.5 * (m(0, 0) + m(3, 3) + m(0, 3) + m(3, 0)).real();
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace qpsn::qstate
