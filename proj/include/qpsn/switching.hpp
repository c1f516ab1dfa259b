#pragma once

// Network model on top of the event queue: chain topologies, fiber delay,
// burst (just-in-time) switching with guard times, and memory-backed
// store-and-forward relaying.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "qpsn/event_queue.hpp"
#include "qpsn/frame_codec.hpp"

namespace qpsn::sim {

/// Fiber group delay, 5 us per km.
inline constexpr Nanos kFiberDelayPerKm = 5000;

/// Seeded 64-bit generator. Draws are converted to doubles by hand so that
/// sequences are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Independent stream seed derived from a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

enum class NodeKind { Source, Relay, Receiver };

struct LinkSpec {
    double length_km = 0.0;
    double p_per_km = 0.0;
    double attenuation_db_per_km = 0.2;  // carried for reference; loss is not simulated
};

struct LinearChain {};
struct SplitChain {
    int left_hops = 0;
    int right_hops = 0;
};

/// Nodes in path order; links[i] joins nodes[i] and nodes[i+1].
/// A linear chain runs Source, Relay..., Receiver. A split chain runs
/// Receiver, Relay..., Source, Relay..., Receiver with the source in the middle.
struct Topology {
    std::vector<NodeKind> nodes;
    std::vector<LinkSpec> links;
    std::variant<LinearChain, SplitChain> shape;

    /// `relays` intermediate nodes, total length split evenly over relays+1 links.
    static Topology linear_chain(int relays, double total_km, double p_per_km);
    /// Each arm gets half the total length, split evenly over its links.
    static Topology split_chain(int left_relays, int right_relays, double total_km, double p_per_km);

    /// Throws std::invalid_argument on structural or range violations.
    void validate() const;
    int relay_count() const;
    /// Link sequences ordered from the source outward: one for a linear
    /// chain, {left, right} for a split chain.
    std::vector<std::vector<LinkSpec>> arms() const;
};

struct BurstPolicy {
    Nanos guard0 = 0;
    double backoff_factor = 2.0;
};

struct StoreForwardPolicy {
    Nanos processing_time = 0;
};

struct SwitchPolicy {
    std::variant<BurstPolicy, StoreForwardPolicy> kind;
    double availability_p = 1.0;

    void validate() const;
};

/// length * 5000 ns, rounded to the nearest nanosecond.
Nanos propagation_delay(double length_km);

/// Header processing at one burst-switched relay. Returns the remaining guard
/// time, or nullopt (drop) when processing would not finish before the payload.
std::optional<Nanos> burst_step(Nanos guard, Nanos processing_time);

/// guard0 * factor^attempt; throws std::overflow_error past the Nanos range.
Nanos retransmit_guard(Nanos guard0, int attempt, double factor = 2.0);

/// True with probability P.
bool availability_draw(double P, Rng& rng);

/// How long a relay holds a frame: the longer of the header processing time
/// and the time for the whole payload to arrive.
Nanos relay_pause(Nanos processing_time, std::int64_t payload_len, Nanos emission_period);

struct StorageSlot {
    SimTime arrival;
    SimTime release;
    Nanos duration() const noexcept { return release - arrival; }
};

/// Qubit i arrives at header_arrival + i*period and leaves at
/// header_arrival + pause + i*period.
std::vector<StorageSlot> relay_storage_schedule(SimTime header_arrival, Nanos pause, std::int64_t payload_len,
                                                Nanos emission_period);

enum class DropReason { None, GuardExhausted, ChannelUnavailable, CutoffExceeded };

const char* to_string(DropReason reason) noexcept;

struct BurstAttempt {
    int attempt = 0;             // 0 for the first transmission
    Nanos guard = 0;             // guard time the source used
    bool delivered = false;
    int relays_visited = 0;      // relays that processed this frame's header
    int hops_forwarded = 0;      // relays that passed the payload on
    int drop_relay = 0;          // 1-based relay index, 0 if not dropped
    DropReason reason = DropReason::None;
    SimTime start;
    SimTime end;
};

struct BurstRun {
    std::vector<BurstAttempt> attempts;
    Trace trace;

    bool delivered() const noexcept { return !attempts.empty() && attempts.back().delivered; }
};

/// Sends one frame over a linear chain with burst switching, retransmitting
/// with a larger guard (retransmit_guard) after each drop, up to
/// `max_attempts` transmissions in total. Relays read and regenerate the
/// encoded header, rewriting its guard-time field.
BurstRun simulate_burst(const Topology& chain, const SwitchPolicy& policy, Nanos processing_time,
                        std::uint64_t seed, int max_attempts = 1);

struct FrameSpec {
    std::int64_t payload_len = 10;
    Nanos emission_period = 5000;
    Nanos max_cutoff = 0;  // 0 disables the memory cut-off
    frame::EncodingScheme encoding = frame::EncodingScheme::EprHalf;
};

enum class StageKind { Fiber, Storage };

struct Stage {
    StageKind kind = StageKind::Fiber;
    int link_or_node = 0;   // link index for Fiber, node index for Storage
    double length_km = 0.0; // Fiber only
    Nanos duration = 0;     // propagation or storage time
};

struct QubitJourney {
    std::int64_t index = 0;
    SimTime emitted;
    std::optional<SimTime> arrived;
    std::vector<Stage> stages;

    Nanos storage_total() const noexcept;
};

struct StoreForwardRun {
    bool delivered = false;
    int dropped_at = 0;  // node index where the frame was dropped, 0 if delivered
    DropReason reason = DropReason::None;
    std::vector<QubitJourney> qubits;
    std::vector<std::int64_t> arrival_order;  // qubit indices in receiver arrival order
    frame::FrameHeader final_header;          // as regenerated by the last relay
    Trace trace;
};

/// Sends one frame (header, payload_len qubits at emission_period spacing,
/// trailer) over `links` from a source through relays to a receiver. Each
/// relay holds the payload for relay_pause(); while its outgoing channel is
/// unavailable it holds for further pauses, dropping the frame once the
/// header's memory cut-off is exceeded.
StoreForwardRun simulate_store_forward(std::span<const LinkSpec> links, const SwitchPolicy& policy,
                                       const FrameSpec& frame, std::uint64_t seed);

}  // namespace qpsn::sim
