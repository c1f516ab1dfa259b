#include "qpsn/switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace qpsn::sim {

namespace {

std::string node_name(int node) { return "n" + std::to_string(node); }

frame::MacAddress node_mac(int node)
{
    return {0x02, 0x00, 0x00, 0x00, static_cast<std::uint8_t>(node >> 8), static_cast<std::uint8_t>(node & 0xFF)};
}

void require_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("availability probability must lie in [0, 1]");
    }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Topology

Topology Topology::linear_chain(int relays, double total_km, double p_per_km)
{
    if (relays < 0) {
        throw std::invalid_argument("relay count must be non-negative");
    }
    Topology t;
    t.shape = LinearChain{};
    t.nodes.push_back(NodeKind::Source);
    t.nodes.insert(t.nodes.end(), static_cast<std::size_t>(relays), NodeKind::Relay);
    t.nodes.push_back(NodeKind::Receiver);
    const double seg = total_km / (relays + 1);
    t.links.assign(static_cast<std::size_t>(relays + 1), LinkSpec{seg, p_per_km});
    t.validate();
    return t;
}

Topology Topology::split_chain(int left_relays, int right_relays, double total_km, double p_per_km)
{
    if (left_relays < 0 || right_relays < 0) {
        throw std::invalid_argument("relay count must be non-negative");
    }
    Topology t;
    t.shape = SplitChain{left_relays, right_relays};
    t.nodes.push_back(NodeKind::Receiver);
    t.nodes.insert(t.nodes.end(), static_cast<std::size_t>(left_relays), NodeKind::Relay);
    t.nodes.push_back(NodeKind::Source);
    t.nodes.insert(t.nodes.end(), static_cast<std::size_t>(right_relays), NodeKind::Relay);
    t.nodes.push_back(NodeKind::Receiver);
    const double arm = total_km / 2.0;
    t.links.assign(static_cast<std::size_t>(left_relays + 1), LinkSpec{arm / (left_relays + 1), p_per_km});
    t.links.insert(t.links.end(), static_cast<std::size_t>(right_relays + 1),
                   LinkSpec{arm / (right_relays + 1), p_per_km});
    t.validate();
    return t;
}

void Topology::validate() const
{
    if (nodes.size() != links.size() + 1) {
        throw std::invalid_argument("topology needs exactly one link between consecutive nodes");
    }
    for (const auto& l : links) {
        if (!(l.length_km >= 0.0) || !std::isfinite(l.length_km)) {
            throw std::invalid_argument("link length must be finite and non-negative");
        }
        if (!(l.p_per_km >= 0.0)) {
            throw std::invalid_argument("per-km depolarization must be non-negative");
        }
    }
    std::vector<NodeKind> expected;
    if (const auto* split = std::get_if<SplitChain>(&shape)) {
        if (split->left_hops < 0 || split->right_hops < 0) {
            throw std::invalid_argument("hop counts must be non-negative");
        }
        expected.push_back(NodeKind::Receiver);
        expected.insert(expected.end(), static_cast<std::size_t>(split->left_hops), NodeKind::Relay);
        expected.push_back(NodeKind::Source);
        expected.insert(expected.end(), static_cast<std::size_t>(split->right_hops), NodeKind::Relay);
        expected.push_back(NodeKind::Receiver);
    } else {
        if (nodes.size() < 2) {
            throw std::invalid_argument("a linear chain needs a source and a receiver");
        }
        expected.assign(nodes.size(), NodeKind::Relay);
        expected.front() = NodeKind::Source;
        expected.back() = NodeKind::Receiver;
    }
    if (nodes != expected) {
        throw std::invalid_argument("node roles do not match the topology shape");
    }
}

int Topology::relay_count() const
{
    return static_cast<int>(std::count(nodes.begin(), nodes.end(), NodeKind::Relay));
}

std::vector<std::vector<LinkSpec>> Topology::arms() const
{
    if (const auto* split = std::get_if<SplitChain>(&shape)) {
        const auto mid = links.begin() + split->left_hops + 1;
        std::vector<LinkSpec> left(links.begin(), mid);
        std::reverse(left.begin(), left.end());
        return {left, std::vector<LinkSpec>(mid, links.end())};
    }
    return {links};
}

void SwitchPolicy::validate() const
{
    require_probability(availability_p);
    if (const auto* burst = std::get_if<BurstPolicy>(&kind)) {
        if (burst->guard0 <= 0) {
            throw std::invalid_argument("burst guard time must be positive");
        }
        if (!(burst->backoff_factor >= 1.0)) {
            throw std::invalid_argument("retransmission backoff factor must be at least 1");
        }
    } else if (std::get<StoreForwardPolicy>(kind).processing_time < 0) {
        throw std::invalid_argument("processing time must be non-negative");
    }
}

// ---------------------------------------------------------------------------
// Timing rules

Nanos propagation_delay(double length_km)
{
    if (!(length_km >= 0.0)) {
        throw std::invalid_argument("fiber length must be non-negative");
    }
    return std::llround(length_km * static_cast<double>(kFiberDelayPerKm));
}

std::optional<Nanos> burst_step(Nanos guard, Nanos processing_time)
{
    if (guard < 0 || processing_time < 0) {
        throw std::invalid_argument("guard and processing time must be non-negative");
    }
    const Nanos remaining = guard - processing_time;
    if (remaining <= 0) {
        return std::nullopt;
    }
    return remaining;
}

Nanos retransmit_guard(Nanos guard0, int attempt, double factor)
{
    if (attempt < 1) {
        throw std::invalid_argument("retransmission attempts are numbered from 1");
    }
    if (guard0 < 0 || !(factor >= 1.0)) {
        throw std::invalid_argument("guard must be non-negative and backoff factor at least 1");
    }
    if (factor == std::floor(factor) && factor < 9.2e18) {
        const auto f = static_cast<Nanos>(factor);
        Nanos g = guard0;
        for (int i = 0; i < attempt; ++i) {
            if (__builtin_mul_overflow(g, f, &g)) {
                throw std::overflow_error("retransmission guard overflows the nanosecond range");
            }
        }
        return g;
    }
    const double g = static_cast<double>(guard0) * std::pow(factor, attempt);
    if (!(g < 9.2e18)) {
        throw std::overflow_error("retransmission guard overflows the nanosecond range");
    }
    return std::llround(g);
}

bool availability_draw(double P, Rng& rng)
{
    require_probability(P);
    return rng.uniform() < P;
}

Nanos relay_pause(Nanos processing_time, std::int64_t payload_len, Nanos emission_period)
{
    if (processing_time < 0 || payload_len < 0 || emission_period < 0) {
        throw std::invalid_argument("relay pause inputs must be non-negative");
    }
    Nanos arrival_span = 0;
    if (__builtin_mul_overflow(payload_len, emission_period, &arrival_span)) {
        throw std::overflow_error("payload duration overflows the nanosecond range");
    }
    return std::max(processing_time, arrival_span);
}

std::vector<StorageSlot> relay_storage_schedule(SimTime header_arrival, Nanos pause, std::int64_t payload_len,
                                                Nanos emission_period)
{
    if (pause < 0 || payload_len < 0 || emission_period < 0) {
        throw std::invalid_argument("storage schedule inputs must be non-negative");
    }
    std::vector<StorageSlot> slots;
    slots.reserve(static_cast<std::size_t>(payload_len));
    for (std::int64_t i = 0; i < payload_len; ++i) {
        const SimTime arrival = header_arrival + i * emission_period;
        slots.push_back(StorageSlot{arrival, arrival + pause});
    }
    return slots;
}

const char* to_string(DropReason reason) noexcept
{
    switch (reason) {
        case DropReason::None: return "none";
        case DropReason::GuardExhausted: return "guard-exhausted";
        case DropReason::ChannelUnavailable: return "channel-unavailable";
        case DropReason::CutoffExceeded: return "cutoff-exceeded";
    }
    return "unknown";
}

Nanos QubitJourney::storage_total() const noexcept
{
    Nanos total = 0;
    for (const auto& s : stages) {
        if (s.kind == StageKind::Storage) {
            total += s.duration;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Burst switching

namespace {

struct BurstState {
    const std::vector<LinkSpec>* links = nullptr;
    std::vector<Nanos> delays;
    Nanos processing_time = 0;
    double availability_p = 1.0;
    BurstPolicy policy;
    int max_attempts = 1;
    Rng rng{0};
    std::vector<BurstAttempt> attempts;

    // Per relay, for the attempt in flight.
    std::vector<SimTime> processed_at;
    std::vector<bool> forwarding;
    std::vector<DropReason> verdict;

    int receiver() const { return static_cast<int>(links->size()); }
};

void start_attempt(EventQueue& q, const std::shared_ptr<BurstState>& st);

void finish_attempt(EventQueue& q, const std::shared_ptr<BurstState>& st, int node, DropReason reason)
{
    BurstAttempt& a = st->attempts.back();
    a.end = q.now();
    if (reason == DropReason::None) {
        a.delivered = true;
        return;
    }
    a.drop_relay = node;
    a.reason = reason;
    if (static_cast<int>(st->attempts.size()) < st->max_attempts) {
        Nanos back = 0;
        for (int i = 0; i < node; ++i) {
            back += st->delays[static_cast<std::size_t>(i)];
        }
        q.schedule_in(back, "src nack", [st](EventQueue& qq) { start_attempt(qq, st); });
    }
}

void header_arrives(EventQueue& q, const std::shared_ptr<BurstState>& st, int node, frame::Octets bytes);

void payload_arrives(EventQueue& q, const std::shared_ptr<BurstState>& st, int node)
{
    if (node == st->receiver()) {
        finish_attempt(q, st, node, DropReason::None);
        return;
    }
    const auto idx = static_cast<std::size_t>(node);
    const bool in_time = st->processed_at[idx] < q.now();
    if (in_time != (st->verdict[idx] != DropReason::GuardExhausted)) {
        throw std::logic_error("burst timing disagrees with the header guard field");
    }
    if (!st->forwarding[idx]) {
        finish_attempt(q, st, node, st->verdict[idx]);
        return;
    }
    st->attempts.back().hops_forwarded++;
    q.schedule_in(st->delays[idx], "payload@" + node_name(node + 1),
                  [st, node](EventQueue& qq) { payload_arrives(qq, st, node + 1); });
}

void header_arrives(EventQueue& q, const std::shared_ptr<BurstState>& st, int node, frame::Octets bytes)
{
    if (node == st->receiver()) {
        return;
    }
    const auto idx = static_cast<std::size_t>(node);
    st->attempts.back().relays_visited++;
    frame::FrameHeader h = frame::decode(bytes).header;
    const auto next_guard = burst_step(static_cast<Nanos>(h.guard_time), st->processing_time);
    const bool available = availability_draw(st->availability_p, st->rng);
    st->processed_at[idx] = q.now() + st->processing_time;
    st->verdict[idx] = !next_guard ? DropReason::GuardExhausted
                       : !available ? DropReason::ChannelUnavailable
                                    : DropReason::None;
    st->forwarding[idx] = st->verdict[idx] == DropReason::None;
    if (!st->forwarding[idx]) {
        return;
    }
    h.guard_time = static_cast<std::uint64_t>(*next_guard);
    h.src_addr = node_mac(node);
    frame::Octets regenerated = frame::encode(h);
    q.schedule_in(st->processing_time, "hdr-fwd@" + node_name(node),
                  [st, node, regenerated = std::move(regenerated)](EventQueue& qq) {
                      qq.schedule_in(st->delays[static_cast<std::size_t>(node)], "hdr@" + node_name(node + 1),
                                     [st, node, regenerated](EventQueue& q3) {
                                         header_arrives(q3, st, node + 1, regenerated);
                                     });
                  });
}

void start_attempt(EventQueue& q, const std::shared_ptr<BurstState>& st)
{
    const int k = static_cast<int>(st->attempts.size());
    BurstAttempt a;
    a.attempt = k;
    a.guard = k == 0 ? st->policy.guard0 : retransmit_guard(st->policy.guard0, k, st->policy.backoff_factor);
    a.start = q.now();
    st->attempts.push_back(a);
    std::fill(st->forwarding.begin(), st->forwarding.end(), false);
    std::fill(st->verdict.begin(), st->verdict.end(), DropReason::None);

    frame::FrameHeader h;
    h.dest_addr = node_mac(st->receiver());
    h.src_addr = node_mac(0);
    h.qdu.payload_len = 1;
    h.qdu.encoding_scheme = static_cast<std::uint8_t>(frame::EncodingScheme::Bb84Polarization);
    h.qdu.emission_period = 1;
    h.guard_time = static_cast<std::uint64_t>(a.guard);
    h.ttl = 120;
    frame::Octets bytes = frame::encode(h);

    const std::string tag = "a" + std::to_string(k) + " ";
    q.schedule_in(st->delays[0], tag + "hdr@" + node_name(1),
                  [st, bytes = std::move(bytes)](EventQueue& qq) { header_arrives(qq, st, 1, bytes); });
    q.schedule_in(a.guard + st->delays[0], tag + "payload@" + node_name(1),
                  [st](EventQueue& qq) { payload_arrives(qq, st, 1); });
}

}  // namespace

BurstRun simulate_burst(const Topology& chain, const SwitchPolicy& policy, Nanos processing_time,
                        std::uint64_t seed, int max_attempts)
{
    chain.validate();
    policy.validate();
    if (!std::holds_alternative<LinearChain>(chain.shape)) {
        throw std::invalid_argument("burst simulation runs over a linear chain");
    }
    if (processing_time < 0 || max_attempts < 1) {
        throw std::invalid_argument("processing time must be non-negative and max_attempts at least 1");
    }
    auto st = std::make_shared<BurstState>();
    st->links = &chain.links;
    for (const auto& l : chain.links) {
        st->delays.push_back(propagation_delay(l.length_km));
    }
    st->processing_time = processing_time;
    st->availability_p = policy.availability_p;
    st->policy = std::get<BurstPolicy>(policy.kind);
    st->max_attempts = max_attempts;
    st->rng = Rng(seed);
    st->processed_at.assign(chain.nodes.size(), SimTime{});
    st->forwarding.assign(chain.nodes.size(), false);
    st->verdict.assign(chain.nodes.size(), DropReason::None);

    EventQueue q;
    q.schedule(SimTime{0}, "src start", [st](EventQueue& qq) { start_attempt(qq, st); });
    BurstRun run;
    run.trace = q.run();
    run.attempts = std::move(st->attempts);
    return run;
}

// ---------------------------------------------------------------------------
// Store-and-forward relaying

namespace {

struct RelayState {
    SimTime header_arrival;
    Nanos hold = 0;
    bool header_seen = false;
    bool dropped = false;
};

struct ForwardState {
    std::vector<Nanos> delays;
    std::vector<LinkSpec> links;
    Nanos processing_time = 0;
    double availability_p = 1.0;
    FrameSpec frame;
    Rng rng{0};
    std::vector<RelayState> nodes;
    StoreForwardRun run;

    int receiver() const { return static_cast<int>(links.size()); }
};

void send_qubit(EventQueue& q, const std::shared_ptr<ForwardState>& st, int from, std::int64_t i);

void qubit_arrives(EventQueue& q, const std::shared_ptr<ForwardState>& st, int node, std::int64_t i)
{
    auto& journey = st->run.qubits[static_cast<std::size_t>(i)];
    if (node == st->receiver()) {
        journey.arrived = q.now();
        st->run.arrival_order.push_back(i);
        return;
    }
    RelayState& relay = st->nodes[static_cast<std::size_t>(node)];
    if (relay.dropped) {
        return;
    }
    if (!relay.header_seen) {
        throw std::logic_error("qubit reached a relay ahead of its header");
    }
    const SimTime release = relay.header_arrival + relay.hold + i * st->frame.emission_period;
    const Nanos stored = release - q.now();
    journey.stages.push_back(Stage{StageKind::Storage, node, 0.0, stored});
    q.schedule(release, "q" + std::to_string(i) + "-release@" + node_name(node),
               [st, node, i](EventQueue& qq) { send_qubit(qq, st, node, i); });
}

void send_qubit(EventQueue& q, const std::shared_ptr<ForwardState>& st, int from, std::int64_t i)
{
    const auto link = static_cast<std::size_t>(from);
    st->run.qubits[static_cast<std::size_t>(i)].stages.push_back(
        Stage{StageKind::Fiber, from, st->links[link].length_km, st->delays[link]});
    q.schedule_in(st->delays[link], "q" + std::to_string(i) + "@" + node_name(from + 1),
                  [st, from, i](EventQueue& qq) { qubit_arrives(qq, st, from + 1, i); });
}

void header_arrives(EventQueue& q, const std::shared_ptr<ForwardState>& st, int node, frame::Octets bytes);

void send_header(EventQueue& q, const std::shared_ptr<ForwardState>& st, int from, frame::Octets bytes)
{
    q.schedule_in(st->delays[static_cast<std::size_t>(from)], "hdr@" + node_name(from + 1),
                  [st, from, bytes = std::move(bytes)](EventQueue& qq) { header_arrives(qq, st, from + 1, bytes); });
}

void send_trailer(EventQueue& q, const std::shared_ptr<ForwardState>& st, int from, frame::Octets bytes)
{
    q.schedule_in(st->delays[static_cast<std::size_t>(from)], "trl@" + node_name(from + 1),
                  [st, from, bytes = std::move(bytes)](EventQueue& qq) {
                      const int node = from + 1;
                      if (node == st->receiver()) {
                          const auto t = frame::decode(bytes).header;
                          st->run.delivered = t.role == frame::Role::Trailer && st->run.dropped_at == 0;
                          return;
                      }
                      const RelayState& relay = st->nodes[static_cast<std::size_t>(node)];
                      if (relay.dropped) {
                          return;
                      }
                      qq.schedule_in(relay.hold, "trl-fwd@" + node_name(node),
                                     [st, node, bytes](EventQueue& q3) { send_trailer(q3, st, node, bytes); });
                  });
}

void header_arrives(EventQueue& q, const std::shared_ptr<ForwardState>& st, int node, frame::Octets bytes)
{
    frame::FrameHeader h = frame::decode(bytes).header;
    if (node == st->receiver()) {
        st->run.final_header = h;
        return;
    }
    RelayState& relay = st->nodes[static_cast<std::size_t>(node)];
    relay.header_seen = true;
    relay.header_arrival = q.now();
    const Nanos pause = relay_pause(st->processing_time, h.qdu.payload_len, static_cast<Nanos>(h.qdu.emission_period));

    Nanos hold = pause;
    auto bumped = frame::bump_elapsed_memory(h, static_cast<std::uint64_t>(pause));
    while (!bumped.expired && !availability_draw(st->availability_p, st->rng)) {
        // Outgoing channel busy: keep the payload in memory for another pause.
        hold += pause;
        bumped = frame::bump_elapsed_memory(bumped.header, static_cast<std::uint64_t>(pause));
    }
    if (bumped.expired) {
        relay.dropped = true;
        st->run.dropped_at = node;
        st->run.reason = DropReason::CutoffExceeded;
        return;
    }
    relay.hold = hold;
    bumped.header.src_addr = node_mac(node);
    frame::Octets regenerated = frame::encode(bumped.header);
    q.schedule_in(hold, "hdr-fwd@" + node_name(node), [st, node, regenerated = std::move(regenerated)](EventQueue& qq) {
        send_header(qq, st, node, regenerated);
    });
}

}  // namespace

StoreForwardRun simulate_store_forward(std::span<const LinkSpec> links, const SwitchPolicy& policy,
                                       const FrameSpec& frame_spec, std::uint64_t seed)
{
    policy.validate();
    if (links.empty()) {
        throw std::invalid_argument("a path needs at least one link");
    }
    if (frame_spec.payload_len < 1 || frame_spec.emission_period <= 0 || frame_spec.max_cutoff < 0) {
        throw std::invalid_argument("frame needs at least one qubit and a positive emission period");
    }
    const auto* sf = std::get_if<StoreForwardPolicy>(&policy.kind);
    if (!sf) {
        throw std::invalid_argument("store-and-forward simulation needs a StoreForwardPolicy");
    }
    if (policy.availability_p == 0.0 && frame_spec.max_cutoff == 0 && links.size() > 1) {
        throw std::invalid_argument("a never-available channel without a memory cut-off never releases the frame");
    }

    auto st = std::make_shared<ForwardState>();
    st->links.assign(links.begin(), links.end());
    for (const auto& l : links) {
        st->delays.push_back(propagation_delay(l.length_km));
    }
    st->processing_time = sf->processing_time;
    st->availability_p = policy.availability_p;
    st->frame = frame_spec;
    st->rng = Rng(seed);
    st->nodes.assign(links.size() + 1, RelayState{});
    st->run.qubits.resize(static_cast<std::size_t>(frame_spec.payload_len));

    frame::FrameHeader h;
    h.dest_addr = node_mac(st->receiver());
    h.src_addr = node_mac(0);
    h.qdu.payload_len = static_cast<std::uint32_t>(frame_spec.payload_len);
    h.qdu.encoding_scheme = static_cast<std::uint8_t>(frame_spec.encoding);
    h.qdu.emission_period = static_cast<std::uint64_t>(frame_spec.emission_period);
    h.max_cutoff_time = static_cast<std::uint64_t>(frame_spec.max_cutoff);
    h.ttl = 120;
    frame::Octets header_bytes = frame::encode(h);
    frame::Octets trailer_bytes = frame::encode(frame::make_trailer(h));

    EventQueue q;
    q.schedule(SimTime{0}, "src hdr-tx", [st, header_bytes](EventQueue& qq) { send_header(qq, st, 0, header_bytes); });
    for (std::int64_t i = 0; i < frame_spec.payload_len; ++i) {
        const SimTime t{i * frame_spec.emission_period};
        st->run.qubits[static_cast<std::size_t>(i)].index = i;
        st->run.qubits[static_cast<std::size_t>(i)].emitted = t;
        q.schedule(t, "src q" + std::to_string(i) + "-tx", [st, i](EventQueue& qq) { send_qubit(qq, st, 0, i); });
    }
    q.schedule(SimTime{frame_spec.payload_len * frame_spec.emission_period}, "src trl-tx",
               [st, trailer_bytes](EventQueue& qq) { send_trailer(qq, st, 0, trailer_bytes); });

    st->run.trace = q.run();
    return std::move(st->run);
}

}  // namespace qpsn::sim
