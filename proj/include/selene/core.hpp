#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace selene {

// Event polarity: ON = brightness increase, OFF = decrease.
enum class Polarity : uint8_t { Off = 0, On = 1 };

// One sensor output tuple. Timestamps are integer microseconds.
struct Event {
    int64_t t = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    Polarity polarity = Polarity::Off;

    bool operator==(const Event&) const = default;
};

struct EventStream {
    std::vector<Event> events;
    uint16_t width = 0;
    uint16_t height = 0;

    bool operator==(const EventStream&) const = default;
};

// Bits are stored one per byte, value 0 or 1, most significant bit of each
// payload byte first.
using BitSeq = std::vector<uint8_t>;

constexpr uint8_t kStx = 0b01010101;
constexpr uint8_t kEtx = 0b00001111;

struct Packet {
    std::vector<uint8_t> payload;

    bool operator==(const Packet&) const = default;
};

struct DeframeResult {
    std::vector<Packet> packets;
    size_t residual_bits = 0;  // bits after the end of the last matched packet
};

enum class RateClass : uint8_t { Central = 0, Peripheral = 1 };

// Grid coordinates relative to the geometric grid center, stored in
// half-channel units so that even-sized grids keep integer coordinates.
struct ChannelId {
    uint32_t index = 0;
    int32_t cx_half = 0;
    int32_t cy_half = 0;

    bool operator==(const ChannelId&) const = default;
};

// Transmitter-side partition of the mirror array into guarded channel blocks.
struct ChannelLayout {
    uint32_t mirror_cols = 0;
    uint32_t mirror_rows = 0;
    uint32_t block_size = 0;  // M, mirrors per channel side
    uint32_t guard = 0;       // G, inter-channel spacing in blocks
    uint32_t grid_cols = 0;
    uint32_t grid_rows = 0;
    double f_c = 0.0;  // central refresh rate, Hz
    double f_p = 0.0;  // peripheral refresh rate, Hz
    double central_radius = 0.0;  // d, channel units; 0 = all peripheral
    std::vector<RateClass> rate_class;  // one entry per channel, row-major

    uint32_t channel_count() const { return grid_cols * grid_rows; }
    uint32_t pitch() const { return block_size * (1 + guard); }
    ChannelId channel_id(uint32_t index) const;
    RateClass class_of(uint32_t index) const { return rate_class[index]; }
    double rate_of(uint32_t index) const {
        return rate_class[index] == RateClass::Central ? f_c : f_p;
    }
    uint32_t central_count() const;
    uint32_t peripheral_count() const { return channel_count() - central_count(); }
};

struct BoundingBox {
    uint16_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive corners

    bool contains(uint16_t x, uint16_t y) const {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    }
    bool operator==(const BoundingBox&) const = default;
};

// Receiver-side association of channel index -> pixel region and decode pixel.
struct MappedChannel {
    ChannelId id;
    BoundingBox box;
    uint16_t center_x = 0;
    uint16_t center_y = 0;
};

struct ChannelMap {
    std::vector<MappedChannel> channels;  // sorted by id.index
    std::vector<BoundingBox> unresolved;  // boxes that produced no valid packet

    const MappedChannel* find(uint32_t index) const;
};

// --- bit plumbing ---------------------------------------------------------

void append_byte_msb(BitSeq& bits, uint8_t byte);
uint8_t read_byte_msb(const BitSeq& bits, size_t at);

// --- framing ---------------------------------------------------------------

// STX + payload (MSB first) + ETX. Throws std::invalid_argument on empty
// payload.
BitSeq frame_packet(const std::vector<uint8_t>& payload);

// Scans for STX, reads payload_len bytes, requires ETX. On a failed candidate
// resumes one bit after the STX; on a match resumes after the packet.
DeframeResult deframe_bits(const BitSeq& bits, size_t payload_len);

// --- layout ----------------------------------------------------------------

// All channels peripheral at a single default rate; channel coordinates are
// centered on the grid's geometric center. Throws if the grid does not fit.
ChannelLayout build_layout(uint32_t mirror_cols, uint32_t mirror_rows,
                           uint32_t block_size, uint32_t guard,
                           uint32_t grid_cols, uint32_t grid_rows,
                           double default_rate = 588.0);

// Channels within Euclidean distance d of the grid center become central at
// f_c, the rest peripheral at f_p. The distance test is inclusive (<= d):
// on the 57x35 grid with d = 15 this yields the 709/1286 partition, which
// the strict form does not.
ChannelLayout classify_rates(const ChannelLayout& layout, double d,
                             double f_c, double f_p);

// Aggregate bits per second: log2(symbols) * sum of per-channel rates.
double data_rate(const ChannelLayout& layout, uint32_t symbols);

}  // namespace selene
