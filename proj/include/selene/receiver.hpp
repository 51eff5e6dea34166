#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "selene/core.hpp"

namespace selene {

// Channel detection found nothing to map.
struct DetectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two boxes decoded the same channel index.
struct MappingAmbiguityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Heatmap {
    std::vector<uint32_t> counts;
    uint16_t width = 0;
    uint16_t height = 0;

    uint32_t at(uint16_t x, uint16_t y) const {
        return counts[static_cast<size_t>(y) * width + x];
    }
};

enum class DecodeMode : uint8_t { Absolute = 0, Relative = 1 };

struct DecoderConfig {
    DecodeMode mode = DecodeMode::Relative;
    double symbol_rate = 588.0;  // Hz
    size_t payload_len = 4;      // bytes
};

struct BoxCenter {
    BoundingBox box;
    uint16_t center_x = 0;
    uint16_t center_y = 0;
};

struct DecodedChannel {
    uint32_t index = 0;
    BitSeq bits;
    std::vector<Packet> packets;
};

// Per-pixel event counts over both polarities.
Heatmap build_heatmap(const EventStream& stream);

// Binarize at binarize_frac * max count, open with a square element of the
// given radius, then label connected components (4-connected by default) and
// return each component's tight bounding box with its geometric center
// (rounding half toward the box origin). Throws when nothing survives.
std::vector<BoxCenter> extract_channel_boxes(const Heatmap& hm, double binarize_frac,
                                             int morph_radius,
                                             bool eight_connected = false);

// Keeps the first event, then only polarity changes; output alternates
// strictly.
std::vector<Event> dedup(std::span<const Event> pixel_events);

// Fixed-window decoding against the transmitter clock: window i covers
// [t0 + i/Y, t0 + (i+1)/Y); an ON event makes the bit 1, an OFF event 0, the
// later event wins a conflict, and an empty window repeats the previous bit
// (bit -1 is 0).
BitSeq decode_absolute(std::span<const Event> deduped, const DecoderConfig& cfg,
                       double t0_us, size_t total_bits);

// Decoding from inter-event times only: each consecutive OFF pair spans
// T = t2 - t1 holding H = round(T*Y) bits, split into N0 = round(H*(t_on-t1)/T)
// zeros followed by H - N0 ones. Output is invariant under uniform timestamp
// shifts and is padded with the held mirror state up to total_bits.
BitSeq decode_relative(std::span<const Event> deduped, const DecoderConfig& cfg,
                       size_t total_bits);

// Offset of the symbol grid for absolute decoding, found by trying t0
// candidates in steps of Ts/8 across one packet length and keeping the one
// whose decoded prefix contains the most STX patterns.
double sync_absolute_t0(std::span<const Event> deduped, const DecoderConfig& cfg);

// Decode at each mapped channel's center pixel with the channel's rate-class
// frequency, then deframe.
std::vector<DecodedChannel> decode_all(const EventStream& stream, const ChannelMap& map,
                                       const ChannelLayout& layout, DecodeMode mode,
                                       size_t payload_len);

// Calibration: decode each box's center pixel with the relative decoder at
// base_rate, deframe 2-byte payloads, and read the channel index from the
// first valid packet. Boxes without a valid packet are reported unresolved;
// duplicate indices raise an error.
ChannelMap map_channels(const EventStream& stream, const std::vector<BoxCenter>& boxes,
                        double base_rate, size_t payload_len,
                        const ChannelLayout* layout = nullptr);

}  // namespace selene
