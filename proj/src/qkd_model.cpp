#include "qpsn/qkd_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qpsn/switching.hpp"

namespace qpsn::qkd {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

void require_routing(double P, int n, double tq_over_tp)
{
    require(P >= 0.0 && P <= 1.0, "availability P must lie in [0, 1]");
    require(n >= 0, "switch count must be non-negative");
    require(tq_over_tp > 0.0, "T_Q/T_P must be positive");
}

}  // namespace

void QkdParams::validate() const
{
    require(length_km >= 0.0 && std::isfinite(length_km), "length must be finite and non-negative");
    require(alpha_db_per_km >= 0.0, "attenuation must be non-negative");
    require(eta_det >= 0.0 && eta_det <= 1.0, "detector efficiency must lie in [0, 1]");
    require(p_dark >= 0.0 && p_dark <= 0.5, "dark-count probability must lie in [0, 0.5]");
    require(f >= 1.0, "reconciliation inefficiency must be at least 1");
    require(e_d >= 0.0 && e_d <= 0.5, "misalignment error must lie in [0, 0.5]");
    require_routing(P, n, tq_over_tp);
}

double binary_entropy(double x)
{
    require(x >= 0.0 && x <= 1.0, "binary entropy argument must lie in [0, 1]");
    if (x == 0.0 || x == 1.0) {
        return 0.0;
    }
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double k_factor(double P, int n, double tq_over_tp)
{
    require_routing(P, n, tq_over_tp);
    const double k = std::pow(P, n) * (tq_over_tp - n) / tq_over_tp;
    return std::clamp(k, 0.0, 1.0);
}

GainQber gain_qber(const QkdParams& params)
{
    params.validate();
    const double eta = params.eta_det * std::pow(10.0, -params.alpha_db_per_km * params.length_km / 10.0);
    const double y0 = 2.0 * params.p_dark;
    const double Q = 1.0 - (1.0 - y0) * (1.0 - eta);
    if (Q <= 0.0) {
        return {0.0, 0.5};
    }
    const double e = (0.5 * y0 + params.e_d * eta) / Q;
    return {Q, std::clamp(e, 0.0, 0.5)};
}

QkdResult secret_key_rate(const QkdParams& params)
{
    const GainQber channel = gain_qber(params);
    QkdResult r;
    r.Q = channel.Q;
    r.e_Z = channel.e;
    r.e_X = channel.e;
    r.K = k_factor(params.P, params.n, params.tq_over_tp);
    const double bracket = 1.0 - params.f * binary_entropy(r.e_Z) - binary_entropy(r.e_X);
    r.R = bracket > 0.0 ? r.K * r.Q * bracket : 0.0;
    return r;
}

double monte_carlo_k(double P, int n, double tq_over_tp, std::int64_t trials, std::uint64_t seed)
{
    require_routing(P, n, tq_over_tp);
    require(trials >= 1, "need at least one trial");
    sim::Rng rng(seed);
    const double per_hop_loss = 1.0 / tq_over_tp;
    double surviving_total = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
        double fraction = 1.0;
        bool discarded = false;
        for (int hop = 0; hop < n; ++hop) {
            // Every hop draws, so the stream position does not depend on outcomes.
            if (!sim::availability_draw(P, rng)) {
                discarded = true;
            }
            fraction = std::max(0.0, fraction - per_hop_loss);
        }
        if (!discarded) {
            surviving_total += fraction;
        }
    }
    return surviving_total / static_cast<double>(trials);
}

std::vector<SweepRow> qkd_sweep(std::span<const double> length_grid, std::span<const int> n_list,
                                const QkdParams& base)
{
    require(!length_grid.empty() && !n_list.empty(), "sweep grids must be non-empty");
    std::vector<SweepRow> rows;
    rows.reserve(length_grid.size() * n_list.size());
    for (int n : n_list) {
        for (double L : length_grid) {
            QkdParams p = base;
            p.length_km = L;
            p.n = n;
            const QkdResult r = secret_key_rate(p);
            rows.push_back(SweepRow{L, n, r.Q, r.e_Z, r.K, r.R});
        }
    }
    return rows;
}

}  // namespace qpsn::qkd
