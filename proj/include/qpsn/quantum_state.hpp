#pragma once

// One- and two-qubit density matrices, the fiber and memory noise channels
// that act on them, and fidelity against the |00> + |11> Bell state.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qpsn::qstate {

using Complex = std::complex<double>;
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kEigenTol = 1e-10;

/// Thrown when a matrix does not describe a physical state, or a channel
/// parameter lies outside its domain.
class StateError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Hermitian, unit-trace, positive semidefinite matrix of dimension 2 or 4.
///
/// Instances can only be obtained through validated factories or as channel
/// outputs, so every DensityMatrix in circulation satisfies the invariants.
/// For dimension 4, qubit 0 is the left tensor factor (basis |q0 q1>).
class DensityMatrix {
public:
    /// Validates `m`; throws StateError if any invariant fails.
    static DensityMatrix from_matrix(const Matrix& m);

    static DensityMatrix pure(const Eigen::VectorXcd& amplitudes);

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    int num_qubits() const noexcept { return dim() == 4 ? 2 : 1; }
    const Matrix& matrix() const noexcept { return m_; }
    Complex operator()(int row, int col) const { return m_(row, col); }
    double trace() const { return m_.trace().real(); }

    // Channel outputs skip the eigensolve; the channels are CPTP by construction.
    static DensityMatrix unchecked(Matrix m) { return DensityMatrix(std::move(m)); }

private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

/// Result of checking a raw matrix against the DensityMatrix invariants.
struct Validity {
    bool ok;
    std::string reason;
};
Validity check_state(const Matrix& m);

DensityMatrix make_epr();

/// 1 - 10^(-length * p_L), clamped to [0, 1].
double depolar_prob(double length_km, double p_per_km);

/// Replacement-form depolarizing channel on one qubit:
/// rho -> (1-p) rho + p (I/2 on `qubit`, tensored with the partial trace over it).
DensityMatrix apply_depolarizing(const DensityMatrix& rho, int qubit, double p);

/// Amplitude damping toward |0> with gamma = 1 - exp(-t/T1), followed by pure
/// dephasing so that coherences decay by exactly exp(-t/T2) overall.
/// Times are nanoseconds; T1 and T2 may be +infinity. Requires T2 <= 2*T1.
DensityMatrix apply_t1t2(const DensityMatrix& rho, int qubit, double t, double T1, double T2);

/// <Psi|rho|Psi> with |Psi> = (|00> + |11>)/sqrt(2).
double fidelity(const DensityMatrix& rho);

}  // namespace qpsn::qstate
