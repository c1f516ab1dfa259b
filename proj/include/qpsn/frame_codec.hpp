#pragma once

// Classical header/trailer of the hybrid quantum frame: an LLDPDU carried in an
// Ethernet frame, extended with organizationally-specific TLVs that describe
// the quantum payload.
//
// Wire layout (all multi-octet integers big-endian):
//
//   dest addr (6) | src addr (6) | EtherType 0x88CC (2) | TLV ... | End TLV
//
// Each TLV starts with a 16-bit prefix: type in the upper 7 bits, value length
// in the lower 9. A header frame carries, in order:
//
//   type 1   Chassis ID   subtype 4 (MAC address) + src addr
//   type 2   Port ID      subtype 3 (MAC address) + src addr
//   type 3   TTL          2 octets, seconds
//   type 127 OUI 00-00-00, subtype 1   role flag (1 octet: 0 header, 1 trailer)
//   type 127 OUI 00-00-00, subtype 2   QDU descriptor (8 octets):
//            payload_len(2) encoding_scheme(1) emission_period(4) multiplexing(1)
//   type 127 OUI 00-00-00, subtype 3   elapsed memory time ns (8)
//   type 127 OUI 00-00-00, subtype 4   max cut-off time ns (8), 0 = no cut-off
//   type 127 OUI 00-00-00, subtype 5   QEC protocol id (1)
//   type 127 OUI 00-00-00, subtype 6   guard time ns (4)
//   type 0   End of LLDPDU (length 0)
//
// A trailer frame is the minimal form: addresses, EtherType, role TLV, End.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpsn::frame {

using Octets = std::vector<std::uint8_t>;
using MacAddress = std::array<std::uint8_t, 6>;

inline constexpr std::uint16_t kLldpEtherType = 0x88CC;
inline constexpr std::array<std::uint8_t, 3> kQuantumOui{0x00, 0x00, 0x00};

enum class Role : std::uint8_t { Header = 0, Trailer = 1 };

enum class EncodingScheme : std::uint8_t { Bb84Polarization = 0, EprHalf = 1 };

// Metadata only; no physical multiplexing is modeled.
enum class Multiplexing : std::uint8_t { Tdm = 0, Wdm = 1 };

struct QduDescriptor {
    std::uint32_t payload_len = 0;       // wire width 16 bits
    std::uint8_t encoding_scheme = 0;
    std::uint64_t emission_period = 0;   // ns, wire width 32 bits
    std::uint8_t multiplexing = 0;

    friend bool operator==(const QduDescriptor&, const QduDescriptor&) = default;
};

struct FrameHeader {
    MacAddress dest_addr{};
    MacAddress src_addr{};
    Role role = Role::Header;
    QduDescriptor qdu;
    std::uint64_t guard_time = 0;           // ns, wire width 32 bits
    std::uint64_t elapsed_memory_time = 0;  // ns
    std::uint64_t max_cutoff_time = 0;      // ns, 0 disables the cut-off
    std::uint8_t qec_protocol = 0;          // 0 = none
    std::uint32_t ttl = 0;                  // seconds, wire width 16 bits

    friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

/// The trailer that closes the frame opened by `header`.
FrameHeader make_trailer(const FrameHeader& header);

/// False once the payload has spent longer in memory than its cut-off allows.
bool is_live(const FrameHeader& header) noexcept;

class EncodeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class DecodeErrorKind {
    Truncated,         // input ends inside a field or before the End TLV
    MandatoryMissing,  // a required TLV never appeared
    BadEtherType,
    BadLength,         // a known TLV declares the wrong value length
    BadValue,          // a known TLV carries an out-of-range value
    Duplicate,         // a known TLV appears twice
    TrailingData,      // bytes follow the End TLV
};

std::string to_string(DecodeErrorKind kind);

/// Structured decode failure. `offset` is the byte position of the element
/// being parsed (the TLV prefix for TLV-level errors); for MandatoryMissing it
/// is the offset of the End TLV and `tlv` names the missing element.
class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrorKind kind, std::size_t offset, std::string tlv = {});

    DecodeErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }
    const std::string& tlv() const noexcept { return tlv_; }

private:
    DecodeErrorKind kind_;
    std::size_t offset_;
    std::string tlv_;
};

/// A TLV the decoder does not interpret. For type 127 the value still holds
/// the OUI and subtype octets.
struct RawTlv {
    std::size_t offset = 0;
    std::uint8_t type = 0;
    Octets value;

    friend bool operator==(const RawTlv&, const RawTlv&) = default;
};

struct DecodedFrame {
    FrameHeader header;
    std::vector<RawTlv> unknown;
};

/// Throws EncodeError if a field overflows its wire width, a header frame has
/// an empty payload or zero emission period, or a trailer carries anything but
/// addresses.
Octets encode(const FrameHeader& header);

/// Exact byte count `encode` produces for a frame with this role.
std::size_t encoded_size(Role role) noexcept;

/// Strict parse; throws DecodeError. Unknown TLVs are skipped and returned.
DecodedFrame decode(std::span<const std::uint8_t> bytes);

/// Appends a TLV with the given type and value before the End TLV of an
/// encoded frame. Used to interleave vendor extensions.
Octets splice_tlv(std::span<const std::uint8_t> encoded, std::uint8_t type, std::span<const std::uint8_t> value);

struct BumpResult {
    FrameHeader header;
    bool expired = false;
};

/// Adds `delta` ns of memory residence; `expired` once the total exceeds a
/// set cut-off. Saturates rather than wrapping.
BumpResult bump_elapsed_memory(const FrameHeader& header, std::uint64_t delta);

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Accepts upper/lower-case hex with optional whitespace or ':' separators.
/// Throws std::invalid_argument on odd digit count or non-hex characters.
Octets from_hex(const std::string& text);

std::string format_mac(const MacAddress& mac);
MacAddress parse_mac(const std::string& text);

}  // namespace qpsn::frame
