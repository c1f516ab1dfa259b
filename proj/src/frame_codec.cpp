#include "qpsn/frame_codec.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <limits>
#include <optional>

namespace qpsn::frame {

namespace {

constexpr std::uint8_t kTlvEnd = 0;
constexpr std::uint8_t kTlvChassis = 1;
constexpr std::uint8_t kTlvPort = 2;
constexpr std::uint8_t kTlvTtl = 3;
constexpr std::uint8_t kTlvOrgSpecific = 127;

constexpr std::uint8_t kChassisSubtypeMac = 4;
constexpr std::uint8_t kPortSubtypeMac = 3;

enum QuantumSubtype : std::uint8_t {
    kRole = 1,
    kQdu = 2,
    kElapsed = 3,
    kCutoff = 4,
    kQec = 5,
    kGuard = 6,
};

constexpr std::size_t kEthernetPrefix = 14;
constexpr std::size_t kMaxTlvValue = 0x1FF;

class Writer {
public:
    void put(std::uint64_t value, int width)
    {
        for (int shift = 8 * (width - 1); shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(value >> shift));
        }
    }
    void put(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

    void tlv_prefix(std::uint8_t type, std::size_t length)
    {
        put((static_cast<std::uint64_t>(type) << 9) | length, 2);
    }
    void quantum_tlv(std::uint8_t subtype, std::uint64_t value, int width)
    {
        tlv_prefix(kTlvOrgSpecific, 4 + static_cast<std::size_t>(width));
        put(kQuantumOui);
        put(subtype, 1);
        put(value, width);
    }

    Octets take() { return std::move(out_); }

private:
    Octets out_;
};

std::uint64_t read_be(std::span<const std::uint8_t> bytes)
{
    std::uint64_t v = 0;
    for (std::uint8_t b : bytes) {
        v = (v << 8) | b;
    }
    return v;
}

void check_width(std::uint64_t value, int bits, const char* field)
{
    if (bits < 64 && value >> bits != 0) {
        throw EncodeError(std::string(field) + " overflows its " + std::to_string(bits) + "-bit wire field");
    }
}

MacAddress to_mac(std::span<const std::uint8_t> bytes)
{
    MacAddress mac{};
    std::copy_n(bytes.begin(), mac.size(), mac.begin());
    return mac;
}

struct Seen {
    bool chassis = false, port = false, ttl = false;
    bool role = false, qdu = false, elapsed = false, cutoff = false, qec = false, guard = false;
};

void mark(bool& flag, std::size_t offset, const char* name)
{
    if (flag) {
        throw DecodeError(DecodeErrorKind::Duplicate, offset, name);
    }
    flag = true;
}

void expect_length(std::size_t actual, std::size_t expected, std::size_t offset, const char* name)
{
    if (actual != expected) {
        throw DecodeError(DecodeErrorKind::BadLength, offset, name);
    }
}

}  // namespace

std::string to_string(DecodeErrorKind kind)
{
    switch (kind) {
        case DecodeErrorKind::Truncated: return "Truncated";
        case DecodeErrorKind::MandatoryMissing: return "MandatoryMissing";
        case DecodeErrorKind::BadEtherType: return "BadEtherType";
        case DecodeErrorKind::BadLength: return "BadLength";
        case DecodeErrorKind::BadValue: return "BadValue";
        case DecodeErrorKind::Duplicate: return "Duplicate";
        case DecodeErrorKind::TrailingData: return "TrailingData";
    }
    return "Unknown";
}

DecodeError::DecodeError(DecodeErrorKind kind, std::size_t offset, std::string tlv)
    : std::runtime_error(to_string(kind) + " at offset " + std::to_string(offset) + (tlv.empty() ? "" : " (" + tlv + ")")),
      kind_(kind),
      offset_(offset),
      tlv_(std::move(tlv))
{
}

FrameHeader make_trailer(const FrameHeader& header)
{
    FrameHeader trailer;
    trailer.dest_addr = header.dest_addr;
    trailer.src_addr = header.src_addr;
    trailer.role = Role::Trailer;
    return trailer;
}

bool is_live(const FrameHeader& header) noexcept
{
    return header.max_cutoff_time == 0 || header.elapsed_memory_time <= header.max_cutoff_time;
}

std::size_t encoded_size(Role role) noexcept
{
    constexpr std::size_t quantum_tlv = 2 + 4;  // prefix + OUI + subtype
    const std::size_t role_tlv = quantum_tlv + 1;
    const std::size_t end_tlv = 2;
    if (role == Role::Trailer) {
        return kEthernetPrefix + role_tlv + end_tlv;
    }
    return kEthernetPrefix + (2 + 7) + (2 + 7) + (2 + 2) + role_tlv + (quantum_tlv + 8) + (quantum_tlv + 8) +
           (quantum_tlv + 8) + (quantum_tlv + 1) + (quantum_tlv + 4) + end_tlv;
}

Octets encode(const FrameHeader& header)
{
    Writer w;
    w.put(header.dest_addr);
    w.put(header.src_addr);
    w.put(kLldpEtherType, 2);

    if (header.role == Role::Trailer) {
        FrameHeader canonical = make_trailer(header);
        if (!(canonical == header)) {
            throw EncodeError("a trailer carries only addresses and the role flag");
        }
        w.quantum_tlv(kRole, static_cast<std::uint8_t>(Role::Trailer), 1);
        w.tlv_prefix(kTlvEnd, 0);
        return w.take();
    }
    if (header.role != Role::Header) {
        throw EncodeError("role must be header or trailer");
    }

    const QduDescriptor& q = header.qdu;
    check_width(q.payload_len, 16, "payload_len");
    check_width(q.emission_period, 32, "emission_period");
    check_width(header.guard_time, 32, "guard_time");
    check_width(header.ttl, 16, "ttl");
    if (q.payload_len == 0) {
        throw EncodeError("a header frame must announce at least one QDU");
    }
    if (q.emission_period == 0) {
        throw EncodeError("emission_period must be positive");
    }

    w.tlv_prefix(kTlvChassis, 7);
    w.put(kChassisSubtypeMac, 1);
    w.put(header.src_addr);
    w.tlv_prefix(kTlvPort, 7);
    w.put(kPortSubtypeMac, 1);
    w.put(header.src_addr);
    w.tlv_prefix(kTlvTtl, 2);
    w.put(header.ttl, 2);

    w.quantum_tlv(kRole, static_cast<std::uint8_t>(Role::Header), 1);

    w.tlv_prefix(kTlvOrgSpecific, 4 + 8);
    w.put(kQuantumOui);
    w.put(kQdu, 1);
    w.put(q.payload_len, 2);
    w.put(q.encoding_scheme, 1);
    w.put(q.emission_period, 4);
    w.put(q.multiplexing, 1);

    w.quantum_tlv(kElapsed, header.elapsed_memory_time, 8);
    w.quantum_tlv(kCutoff, header.max_cutoff_time, 8);
    w.quantum_tlv(kQec, header.qec_protocol, 1);
    w.quantum_tlv(kGuard, header.guard_time, 4);
    w.tlv_prefix(kTlvEnd, 0);
    return w.take();
}

DecodedFrame decode(std::span<const std::uint8_t> bytes)
{
    const std::size_t size = bytes.size();
    if (size < 6) throw DecodeError(DecodeErrorKind::Truncated, 0, "destination address");
    if (size < 12) throw DecodeError(DecodeErrorKind::Truncated, 6, "source address");
    if (size < 14) throw DecodeError(DecodeErrorKind::Truncated, 12, "EtherType");

    DecodedFrame result;
    FrameHeader& h = result.header;
    h.dest_addr = to_mac(bytes.subspan(0, 6));
    h.src_addr = to_mac(bytes.subspan(6, 6));
    if (read_be(bytes.subspan(12, 2)) != kLldpEtherType) {
        throw DecodeError(DecodeErrorKind::BadEtherType, 12);
    }

    Seen seen;
    std::size_t pos = kEthernetPrefix;
    std::optional<std::size_t> end_offset;
    while (!end_offset) {
        if (pos + 2 > size) {
            throw DecodeError(DecodeErrorKind::Truncated, pos, pos == size ? "End of LLDPDU" : "TLV prefix");
        }
        const auto prefix = static_cast<std::uint16_t>(read_be(bytes.subspan(pos, 2)));
        const auto type = static_cast<std::uint8_t>(prefix >> 9);
        const std::size_t length = prefix & kMaxTlvValue;
        if (pos + 2 + length > size) {
            throw DecodeError(DecodeErrorKind::Truncated, pos, "TLV value");
        }
        const auto value = bytes.subspan(pos + 2, length);

        switch (type) {
            case kTlvEnd:
                expect_length(length, 0, pos, "End of LLDPDU");
                end_offset = pos;
                break;
            case kTlvChassis:
                mark(seen.chassis, pos, "Chassis ID");
                expect_length(length, 7, pos, "Chassis ID");
                if (value[0] != kChassisSubtypeMac || to_mac(value.subspan(1)) != h.src_addr) {
                    throw DecodeError(DecodeErrorKind::BadValue, pos, "Chassis ID");
                }
                break;
            case kTlvPort:
                mark(seen.port, pos, "Port ID");
                expect_length(length, 7, pos, "Port ID");
                if (value[0] != kPortSubtypeMac || to_mac(value.subspan(1)) != h.src_addr) {
                    throw DecodeError(DecodeErrorKind::BadValue, pos, "Port ID");
                }
                break;
            case kTlvTtl:
                mark(seen.ttl, pos, "TTL");
                expect_length(length, 2, pos, "TTL");
                h.ttl = static_cast<std::uint32_t>(read_be(value));
                break;
            case kTlvOrgSpecific: {
                if (length < 4) {
                    throw DecodeError(DecodeErrorKind::BadLength, pos, "organizationally specific");
                }
                const bool ours = std::equal(kQuantumOui.begin(), kQuantumOui.end(), value.begin());
                const std::uint8_t subtype = value[3];
                const auto data = value.subspan(4);
                if (!ours || subtype < kRole || subtype > kGuard) {
                    result.unknown.push_back({pos, type, Octets(value.begin(), value.end())});
                    break;
                }
                switch (subtype) {
                    case kRole:
                        mark(seen.role, pos, "role");
                        expect_length(data.size(), 1, pos, "role");
                        if (data[0] > 1) {
                            throw DecodeError(DecodeErrorKind::BadValue, pos, "role");
                        }
                        h.role = static_cast<Role>(data[0]);
                        break;
                    case kQdu:
                        mark(seen.qdu, pos, "QDU descriptor");
                        expect_length(data.size(), 8, pos, "QDU descriptor");
                        h.qdu.payload_len = static_cast<std::uint32_t>(read_be(data.subspan(0, 2)));
                        h.qdu.encoding_scheme = data[2];
                        h.qdu.emission_period = read_be(data.subspan(3, 4));
                        h.qdu.multiplexing = data[7];
                        break;
                    case kElapsed:
                        mark(seen.elapsed, pos, "elapsed memory time");
                        expect_length(data.size(), 8, pos, "elapsed memory time");
                        h.elapsed_memory_time = read_be(data);
                        break;
                    case kCutoff:
                        mark(seen.cutoff, pos, "max cut-off time");
                        expect_length(data.size(), 8, pos, "max cut-off time");
                        h.max_cutoff_time = read_be(data);
                        break;
                    case kQec:
                        mark(seen.qec, pos, "QEC protocol");
                        expect_length(data.size(), 1, pos, "QEC protocol");
                        h.qec_protocol = data[0];
                        break;
                    case kGuard:
                        mark(seen.guard, pos, "guard time");
                        expect_length(data.size(), 4, pos, "guard time");
                        h.guard_time = read_be(data);
                        break;
                }
                break;
            }
            default:
                result.unknown.push_back({pos, type, Octets(value.begin(), value.end())});
                break;
        }
        pos += 2 + length;
    }

    if (pos != size) {
        throw DecodeError(DecodeErrorKind::TrailingData, pos);
    }
    if (!seen.role) {
        throw DecodeError(DecodeErrorKind::MandatoryMissing, *end_offset, "role");
    }
    if (h.role == Role::Header) {
        const std::pair<bool, const char*> mandatory[] = {
            {seen.chassis, "Chassis ID"},
            {seen.port, "Port ID"},
            {seen.ttl, "TTL"},
            {seen.qdu, "QDU descriptor"},
        };
        for (const auto& [present, name] : mandatory) {
            if (!present) {
                throw DecodeError(DecodeErrorKind::MandatoryMissing, *end_offset, name);
            }
        }
    }
    return result;
}

Octets splice_tlv(std::span<const std::uint8_t> encoded, std::uint8_t type, std::span<const std::uint8_t> value)
{
    if (encoded.size() < kEthernetPrefix + 2 || encoded[encoded.size() - 2] != 0 || encoded[encoded.size() - 1] != 0) {
        throw std::invalid_argument("encoded frame does not end with an End TLV");
    }
    if (type > 127 || value.size() > kMaxTlvValue) {
        throw std::invalid_argument("TLV type or length exceeds the prefix width");
    }
    Octets out(encoded.begin(), encoded.end() - 2);
    const auto prefix = static_cast<std::uint16_t>((type << 9) | value.size());
    out.push_back(static_cast<std::uint8_t>(prefix >> 8));
    out.push_back(static_cast<std::uint8_t>(prefix & 0xFF));
    out.insert(out.end(), value.begin(), value.end());
    out.push_back(0);
    out.push_back(0);
    return out;
}

BumpResult bump_elapsed_memory(const FrameHeader& header, std::uint64_t delta)
{
    BumpResult r{header, false};
    const std::uint64_t room = std::numeric_limits<std::uint64_t>::max() - header.elapsed_memory_time;
    r.header.elapsed_memory_time += std::min(delta, room);
    r.expired = !is_live(r.header);
    return r;
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

Octets from_hex(const std::string& text)
{
    Octets out;
    int pending = -1;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ':') {
            continue;
        }
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else throw std::invalid_argument(std::string("non-hex character '") + c + "'");
        if (pending < 0) {
            pending = v;
        } else {
            out.push_back(static_cast<std::uint8_t>(pending << 4 | v));
            pending = -1;
        }
    }
    if (pending >= 0) {
        throw std::invalid_argument("odd number of hex digits");
    }
    return out;
}

std::string format_mac(const MacAddress& mac)
{
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3], mac[4], mac[5]);
    return buf;
}

MacAddress parse_mac(const std::string& text)
{
    const Octets bytes = from_hex(text);
    if (bytes.size() != 6) {
        throw std::invalid_argument("link address must be 6 octets: " + text);
    }
    return to_mac(bytes);
}

}  // namespace qpsn::frame
