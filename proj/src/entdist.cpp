#include "qpsn/entdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpsn/quantum_state.hpp"

namespace qpsn::ent {

namespace {

using qstate::DensityMatrix;

struct Arm {
    int qubit;
    sim::StoreForwardRun run;
};

sim::StoreForwardRun send_over(std::span<const sim::LinkSpec> links, const EntParams& params)
{
    sim::SwitchPolicy policy{sim::StoreForwardPolicy{params.processing_time}, 1.0};
    sim::FrameSpec frame{params.qubits_per_frame, params.emission_period, 0, frame::EncodingScheme::EprHalf};
    auto run = sim::simulate_store_forward(links, policy, frame, 0);
    if (!run.delivered) {
        throw std::logic_error("lossless frame was not delivered");
    }
    return run;
}

DensityMatrix evolve_half(DensityMatrix rho, const Arm& arm, std::size_t pair, const EntParams& params,
                          std::vector<NoiseEvent>& log)
{
    for (const auto& stage : arm.run.qubits[pair].stages) {
        if (stage.kind == sim::StageKind::Fiber) {
            const double p = qstate::depolar_prob(stage.length_km, params.p_per_km);
            rho = qstate::apply_depolarizing(rho, arm.qubit, p);
            log.push_back({NoiseEvent::Kind::Fiber, arm.qubit, stage.length_km, p, 0});
        } else {
            rho = qstate::apply_t1t2(rho, arm.qubit, static_cast<double>(stage.duration), params.T1_ns, params.T2_ns);
            log.push_back({NoiseEvent::Kind::Storage, arm.qubit, 0.0, 0.0, stage.duration});
        }
    }
    return rho;
}

FidelityRow to_row(ScenarioKind kind, int hops, const EntParams& p, const FidelityRecord& r)
{
    return FidelityRow{kind, p.total_length_km, hops, p.T1_ns, p.T2_ns, p.processing_time, r.pair_index, r.fidelity};
}

void append_run(std::vector<FidelityRow>& rows, ScenarioKind kind, int hops, const EntParams& p)
{
    for (const auto& r : run_scenario(make_scenario(kind, hops), p)) {
        rows.push_back(to_row(kind, hops, p, r));
    }
}

}  // namespace

EntScenario make_scenario(ScenarioKind kind, int hops)
{
    if (kind == ScenarioKind::Central) {
        return CentralSource{hops, hops};
    }
    return SenderSource{hops};
}

const char* to_string(ScenarioKind kind) noexcept
{
    return kind == ScenarioKind::Central ? "central" : "sender";
}

ScenarioKind kind_of(const EntScenario& scenario) noexcept
{
    return std::holds_alternative<CentralSource>(scenario) ? ScenarioKind::Central : ScenarioKind::Sender;
}

void EntParams::validate() const
{
    if (!(total_length_km >= 0.0) || !std::isfinite(total_length_km)) {
        throw std::invalid_argument("total length must be finite and non-negative");
    }
    if (!(T1_ns > 0.0) || !(T2_ns > 0.0)) {
        throw std::invalid_argument("T1 and T2 must be positive");
    }
    if (T2_ns > 2.0 * T1_ns * (1.0 + 1e-12)) {
        throw std::invalid_argument("T2 must not exceed 2*T1");
    }
    if (processing_time < 0 || emission_period <= 0 || qubits_per_frame < 1) {
        throw std::invalid_argument("need processing_time >= 0, emission_period > 0 and at least one qubit");
    }
    if (!(p_per_km >= 0.0)) {
        throw std::invalid_argument("per-km depolarization must be non-negative");
    }
}

EntParams noiseless(EntParams params)
{
    params.p_per_km = 0.0;
    params.T1_ns = std::numeric_limits<double>::infinity();
    params.T2_ns = std::numeric_limits<double>::infinity();
    return params;
}

sim::Nanos FidelityRecord::storage_total(int qubit) const noexcept
{
    sim::Nanos total = 0;
    for (const auto& e : noise_log) {
        if (e.kind == NoiseEvent::Kind::Storage && e.qubit == qubit) {
            total += e.duration;
        }
    }
    return total;
}

std::vector<FidelityRecord> run_scenario(const EntScenario& scenario, const EntParams& params)
{
    params.validate();
    std::vector<Arm> arms;
    std::optional<int> retained_qubit;

    if (const auto* central = std::get_if<CentralSource>(&scenario)) {
        if (central->left_hops < 0 || central->right_hops < 0) {
            throw std::invalid_argument("hop counts must be non-negative");
        }
        const auto topo =
            sim::Topology::split_chain(central->left_hops, central->right_hops, params.total_length_km, params.p_per_km);
        const auto paths = topo.arms();
        arms.push_back({0, send_over(paths[0], params)});
        arms.push_back({1, send_over(paths[1], params)});
    } else {
        const auto& sender = std::get<SenderSource>(scenario);
        if (sender.hops < 0) {
            throw std::invalid_argument("hop count must be non-negative");
        }
        const auto topo = sim::Topology::linear_chain(sender.hops, params.total_length_km, params.p_per_km);
        arms.push_back({1, send_over(topo.links, params)});
        retained_qubit = 0;
    }

    std::vector<FidelityRecord> records;
    records.reserve(static_cast<std::size_t>(params.qubits_per_frame));
    for (std::size_t i = 0; i < static_cast<std::size_t>(params.qubits_per_frame); ++i) {
        FidelityRecord rec;
        rec.pair_index = static_cast<int>(i);
        DensityMatrix rho = qstate::make_epr();
        sim::SimTime last{};
        for (const auto& arm : arms) {
            rho = evolve_half(rho, arm, i, params, rec.noise_log);
            last = std::max(last, *arm.run.qubits[i].arrived);
        }
        if (retained_qubit) {
            // The sender's half waits in memory from emission until its partner lands.
            const auto& travelling = arms.front().run.qubits[i];
            const sim::Nanos held = last - travelling.emitted;
            rho = qstate::apply_t1t2(rho, *retained_qubit, static_cast<double>(held), params.T1_ns, params.T2_ns);
            rec.noise_log.push_back({NoiseEvent::Kind::Storage, *retained_qubit, 0.0, 0.0, held});
        }
        rec.arrival_time = last;
        rec.fidelity = qstate::fidelity(rho);
        records.push_back(std::move(rec));
    }
    return records;
}

double mean_fidelity(std::span<const FidelityRecord> records)
{
    if (records.empty()) {
        throw std::invalid_argument("no fidelity records to average");
    }
    double sum = 0.0;
    for (const auto& r : records) {
        sum += r.fidelity;
    }
    return sum / static_cast<double>(records.size());
}

std::vector<MeanRow> summarize(std::span<const FidelityRow> rows)
{
    std::vector<MeanRow> out;
    std::size_t count = 0;
    for (const auto& r : rows) {
        const bool same = !out.empty() && out.back().scenario == r.scenario &&
                          out.back().total_length_km == r.total_length_km && out.back().hops == r.hops &&
                          out.back().T1_ns == r.T1_ns && out.back().T2_ns == r.T2_ns && out.back().proc_ns == r.proc_ns;
        if (!same) {
            if (!out.empty()) {
                out.back().mean_fidelity /= static_cast<double>(count);
            }
            out.push_back(MeanRow{r.scenario, r.total_length_km, r.hops, r.T1_ns, r.T2_ns, r.proc_ns, 0.0});
            count = 0;
        }
        out.back().mean_fidelity += r.fidelity;
        ++count;
    }
    if (!out.empty()) {
        out.back().mean_fidelity /= static_cast<double>(count);
    }
    return out;
}

std::vector<FidelityRow> sweep_length_hops(const EntParams& params, std::span<const double> length_grid,
                                           std::span<const int> hops_list, ScenarioKind kind)
{
    if (length_grid.empty() || hops_list.empty()) {
        throw std::invalid_argument("sweep grids must be non-empty");
    }
    std::vector<FidelityRow> rows;
    for (int hops : hops_list) {
        for (double L : length_grid) {
            EntParams p = params;
            p.total_length_km = L;
            append_run(rows, kind, hops, p);
        }
    }
    return rows;
}

std::vector<FidelityRow> sweep_t1t2_length(const EntParams& params, std::span<const double> t_grid,
                                           std::span<const double> length_grid, int hops)
{
    if (t_grid.empty() || length_grid.empty()) {
        throw std::invalid_argument("sweep grids must be non-empty");
    }
    std::vector<FidelityRow> rows;
    for (double T : t_grid) {
        for (double L : length_grid) {
            EntParams p = params;
            p.T1_ns = T;
            p.T2_ns = T;
            p.total_length_km = L;
            append_run(rows, ScenarioKind::Central, hops, p);
        }
    }
    return rows;
}

std::vector<FidelityRow> sweep_proc_t1(const EntParams& params, std::span<const sim::Nanos> proc_grid,
                                       std::span<const double> t_grid, int hops, double hop_km)
{
    if (proc_grid.empty() || t_grid.empty()) {
        throw std::invalid_argument("sweep grids must be non-empty");
    }
    std::vector<FidelityRow> rows;
    for (sim::Nanos proc : proc_grid) {
        for (double T : t_grid) {
            EntParams p = params;
            p.p_per_km = 0.0;
            p.total_length_km = hops * hop_km;
            p.processing_time = proc;
            p.T1_ns = T;
            p.T2_ns = T;
            append_run(rows, ScenarioKind::Central, hops, p);
        }
    }
    return rows;
}

std::optional<double> crossing_length(std::span<const double> lengths, std::span<const double> fidelities,
                                      double threshold)
{
    if (lengths.size() != fidelities.size() || lengths.empty()) {
        throw std::invalid_argument("crossing needs matching, non-empty grids");
    }
    if (fidelities[0] < threshold) {
        return 0.0;
    }
    for (std::size_t i = 0; i + 1 < lengths.size(); ++i) {
        const double a = fidelities[i];
        const double b = fidelities[i + 1];
        if (a >= threshold && b < threshold) {
            return lengths[i] + (a - threshold) / (a - b) * (lengths[i + 1] - lengths[i]);
        }
    }
    return std::nullopt;
}

ScenarioComparison compare_scenarios(const EntParams& params, std::span<const double> length_grid, int hops)
{
    ScenarioComparison cmp;
    const int hops_list[] = {hops};
    cmp.rows = sweep_length_hops(params, length_grid, hops_list, ScenarioKind::Central);
    const auto sender = sweep_length_hops(params, length_grid, hops_list, ScenarioKind::Sender);
    cmp.rows.insert(cmp.rows.end(), sender.begin(), sender.end());

    for (const auto& m : summarize(cmp.rows)) {
        (m.scenario == ScenarioKind::Central ? cmp.central : cmp.sender).push_back(m);
    }
    auto crossing = [&](const std::vector<MeanRow>& means) {
        std::vector<double> fids;
        for (const auto& m : means) {
            fids.push_back(m.mean_fidelity);
        }
        return crossing_length(length_grid, fids);
    };
    cmp.central_crossing = crossing(cmp.central);
    cmp.sender_crossing = crossing(cmp.sender);
    return cmp;
}

}  // namespace qpsn::ent
