#pragma once

// Asymptotic BB84 key rate over a packet-switched path:
//
//   R = K * Q * [1 - f*H2(e_Z) - H2(e_X)],   K = P^n * (T_Q - n*T_P) / T_Q
//
// with a single-photon channel model supplying the gain Q and QBER e.

#include <cstdint>
#include <span>
#include <vector>

namespace qpsn::qkd {

struct QkdParams {
    double length_km = 0.0;
    int n = 0;                     // intermediate switches
    double alpha_db_per_km = 0.2;
    double eta_det = 0.5;
    double p_dark = 1e-6;          // per gate, per detector
    double f = 1.15;               // reconciliation inefficiency
    double e_d = 0.01;             // misalignment error
    double P = 0.5;                // outgoing-channel availability
    double tq_over_tp = 100.0;     // payload duration over header processing time

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct GainQber {
    double Q = 0.0;
    double e = 0.5;
};

struct QkdResult {
    double Q = 0.0;
    double e_Z = 0.5;
    double e_X = 0.5;
    double K = 0.0;
    double R = 0.0;
};

/// H2(x), with H2(0) = H2(1) = 0.
double binary_entropy(double x);

/// Routing factor, clamped to [0, 1] (0 once n*T_P exceeds T_Q).
double k_factor(double P, int n, double tq_over_tp);

/// eta = eta_det * 10^(-alpha L / 10), Y0 = 2 p_dark,
/// Q = 1 - (1 - Y0)(1 - eta), e*Q = Y0/2 + e_d*eta. Q = 0 gives e = 0.5.
GainQber gain_qber(const QkdParams& params);

/// Key rate per transmission; the bracket is clamped at zero.
QkdResult secret_key_rate(const QkdParams& params);

/// Frame-level estimate of K: each frame passes n availability draws and
/// loses T_P/T_Q of its payload per hop. Deterministic for a given seed.
double monte_carlo_k(double P, int n, double tq_over_tp, std::int64_t trials, std::uint64_t seed);

struct SweepRow {
    double length_km = 0.0;
    int n = 0;
    double Q = 0.0;
    double e = 0.0;
    double K = 0.0;
    double R = 0.0;
};

/// One row per (n, L), n-major, in the order given. `base` supplies every
/// parameter except length and switch count.
std::vector<SweepRow> qkd_sweep(std::span<const double> length_grid, std::span<const int> n_list,
                                const QkdParams& base);

}  // namespace qpsn::qkd
