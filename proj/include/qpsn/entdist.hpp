#pragma once

// Entanglement distribution over store-and-forward chains. Each EPR pair's
// density matrix is evolved deterministically: every fiber segment applies a
// depolarizing channel to the half that crosses it, every relay (and, for a
// sender-side source, the local memory) applies T1/T2 decay for the time the
// half is held. Fidelity is taken when the last half reaches its receiver.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qpsn/switching.hpp"

namespace qpsn::ent {

/// Source in the middle; each half crosses its own arm of relays.
struct CentralSource {
    int left_hops = 0;
    int right_hops = 0;
};

/// Source at one end; it keeps one half and sends the other down the chain.
struct SenderSource {
    int hops = 0;
};

using EntScenario = std::variant<CentralSource, SenderSource>;

enum class ScenarioKind { Central, Sender };

/// Central: `hops` relays on each arm. Sender: `hops` relays on the chain.
EntScenario make_scenario(ScenarioKind kind, int hops);
const char* to_string(ScenarioKind kind) noexcept;
ScenarioKind kind_of(const EntScenario& scenario) noexcept;

struct EntParams {
    double total_length_km = 0.0;
    double T1_ns = 0.5e6;
    double T2_ns = 0.5e6;
    sim::Nanos processing_time = 125'000;
    sim::Nanos emission_period = 5'000;
    int qubits_per_frame = 10;
    double p_per_km = 0.008;

    void validate() const;
};

/// p_L = 0 and T1 = T2 = infinity.
EntParams noiseless(EntParams params);

struct NoiseEvent {
    enum class Kind { Fiber, Storage };
    Kind kind = Kind::Fiber;
    int qubit = 0;
    double length_km = 0.0;  // Fiber
    double p_depol = 0.0;    // Fiber
    sim::Nanos duration = 0; // Storage
};

struct FidelityRecord {
    int pair_index = 0;
    sim::SimTime arrival_time;
    double fidelity = 1.0;
    std::vector<NoiseEvent> noise_log;

    sim::Nanos storage_total(int qubit) const noexcept;
};

/// Hop lengths are the total length divided evenly: per arm, then per link.
std::vector<FidelityRecord> run_scenario(const EntScenario& scenario, const EntParams& params);

double mean_fidelity(std::span<const FidelityRecord> records);

/// One emitted pair at one sweep point; the CSV row of the entdist outputs.
struct FidelityRow {
    ScenarioKind scenario = ScenarioKind::Central;
    double total_length_km = 0.0;
    int hops = 0;
    double T1_ns = 0.0;
    double T2_ns = 0.0;
    sim::Nanos proc_ns = 0;
    int pair_index = 0;
    double fidelity = 0.0;
};

/// Pair-averaged view of consecutive rows sharing a sweep point.
struct MeanRow {
    ScenarioKind scenario = ScenarioKind::Central;
    double total_length_km = 0.0;
    int hops = 0;
    double T1_ns = 0.0;
    double T2_ns = 0.0;
    sim::Nanos proc_ns = 0;
    double mean_fidelity = 0.0;
};

std::vector<MeanRow> summarize(std::span<const FidelityRow> rows);

/// Rows ordered hops-major, then length, then pair.
std::vector<FidelityRow> sweep_length_hops(const EntParams& params, std::span<const double> length_grid,
                                           std::span<const int> hops_list, ScenarioKind kind);

/// T1 = T2 = T for each T in t_grid; T-major, then length. Central source.
std::vector<FidelityRow> sweep_t1t2_length(const EntParams& params, std::span<const double> t_grid,
                                           std::span<const double> length_grid, int hops = 3);

/// Fiber noise off, `hops` relays per arm, `hop_km` per hop (total = hops * hop_km).
/// Processing-time-major, then T. Central source.
std::vector<FidelityRow> sweep_proc_t1(const EntParams& params, std::span<const sim::Nanos> proc_grid,
                                       std::span<const double> t_grid, int hops = 3, double hop_km = 20.0);

/// Length at which fidelity first falls below `threshold`, linearly
/// interpolated between grid points; 0 if it starts below, nullopt if it
/// never crosses on the grid.
std::optional<double> crossing_length(std::span<const double> lengths, std::span<const double> fidelities,
                                      double threshold = 0.5);

struct ScenarioComparison {
    std::vector<FidelityRow> rows;  // central rows first, then sender rows
    std::vector<MeanRow> central;
    std::vector<MeanRow> sender;
    std::optional<double> central_crossing;
    std::optional<double> sender_crossing;
};

/// Both scenarios on the same length grid with the same relay count.
ScenarioComparison compare_scenarios(const EntParams& params, std::span<const double> length_grid, int hops = 1);

}  // namespace qpsn::ent
