#include "selene/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selene {

ChannelId ChannelLayout::channel_id(uint32_t index) const {
    if (index >= channel_count())
        throw std::out_of_range("channel index " + std::to_string(index) +
                                " out of range (N=" + std::to_string(channel_count()) + ")");
    uint32_t gx = index % grid_cols;
    uint32_t gy = index / grid_cols;
    ChannelId id;
    id.index = index;
    id.cx_half = 2 * static_cast<int32_t>(gx) - static_cast<int32_t>(grid_cols - 1);
    id.cy_half = 2 * static_cast<int32_t>(gy) - static_cast<int32_t>(grid_rows - 1);
    return id;
}

uint32_t ChannelLayout::central_count() const {
    return static_cast<uint32_t>(
        std::count(rate_class.begin(), rate_class.end(), RateClass::Central));
}

const MappedChannel* ChannelMap::find(uint32_t index) const {
    auto it = std::lower_bound(channels.begin(), channels.end(), index,
                               [](const MappedChannel& m, uint32_t i) { return m.id.index < i; });
    if (it == channels.end() || it->id.index != index) return nullptr;
    return &*it;
}

void append_byte_msb(BitSeq& bits, uint8_t byte) {
    for (int b = 7; b >= 0; --b) bits.push_back((byte >> b) & 1);
}

uint8_t read_byte_msb(const BitSeq& bits, size_t at) {
    uint8_t v = 0;
    for (int b = 0; b < 8; ++b) v = static_cast<uint8_t>((v << 1) | (bits[at + b] & 1));
    return v;
}

BitSeq frame_packet(const std::vector<uint8_t>& payload) {
    if (payload.empty()) throw std::invalid_argument("frame_packet: empty payload");
    BitSeq bits;
    bits.reserve(8 * (payload.size() + 2));
    append_byte_msb(bits, kStx);
    for (uint8_t byte : payload) append_byte_msb(bits, byte);
    append_byte_msb(bits, kEtx);
    return bits;
}

DeframeResult deframe_bits(const BitSeq& bits, size_t payload_len) {
    DeframeResult out;
    const size_t packet_bits = 8 * (payload_len + 2);
    size_t consumed_end = 0;
    size_t i = 0;
    while (i + packet_bits <= bits.size()) {
        if (read_byte_msb(bits, i) != kStx) {
            ++i;
            continue;
        }
        size_t etx_at = i + 8 + 8 * payload_len;
        if (read_byte_msb(bits, etx_at) != kEtx) {
            ++i;  // failed candidate: resume one bit after this STX
            continue;
        }
        Packet p;
        p.payload.reserve(payload_len);
        for (size_t b = 0; b < payload_len; ++b)
            p.payload.push_back(read_byte_msb(bits, i + 8 + 8 * b));
        out.packets.push_back(std::move(p));
        i += packet_bits;
        consumed_end = i;
    }
    out.residual_bits = bits.size() - consumed_end;
    return out;
}

ChannelLayout build_layout(uint32_t mirror_cols, uint32_t mirror_rows,
                           uint32_t block_size, uint32_t guard,
                           uint32_t grid_cols, uint32_t grid_rows,
                           double default_rate) {
    if (block_size == 0 || grid_cols == 0 || grid_rows == 0)
        throw std::invalid_argument("build_layout: zero dimension");
    uint64_t pitch = static_cast<uint64_t>(block_size) * (1 + guard);
    if (grid_cols * pitch > mirror_cols)
        throw std::invalid_argument(
            "build_layout: grid width " + std::to_string(grid_cols * pitch) +
            " mirrors exceeds mirror_cols " + std::to_string(mirror_cols));
    if (grid_rows * pitch > mirror_rows)
        throw std::invalid_argument(
            "build_layout: grid height " + std::to_string(grid_rows * pitch) +
            " mirrors exceeds mirror_rows " + std::to_string(mirror_rows));
    ChannelLayout layout;
    layout.mirror_cols = mirror_cols;
    layout.mirror_rows = mirror_rows;
    layout.block_size = block_size;
    layout.guard = guard;
    layout.grid_cols = grid_cols;
    layout.grid_rows = grid_rows;
    layout.f_c = default_rate;
    layout.f_p = default_rate;
    layout.central_radius = 0.0;
    layout.rate_class.assign(layout.channel_count(), RateClass::Peripheral);
    return layout;
}

ChannelLayout classify_rates(const ChannelLayout& layout, double d,
                             double f_c, double f_p) {
    if (!(f_c >= f_p) || !(f_p > 0.0))
        throw std::invalid_argument("classify_rates: need f_c >= f_p > 0");
    if (d < 0.0) throw std::invalid_argument("classify_rates: negative radius");
    ChannelLayout out = layout;
    out.f_c = f_c;
    out.f_p = f_p;
    out.central_radius = d;
    // Coordinates are in half-channel units, so compare squared distance
    // against (2d)^2. d = 0 keeps everything peripheral.
    double limit = 4.0 * d * d;
    for (uint32_t i = 0; i < out.channel_count(); ++i) {
        ChannelId id = out.channel_id(i);
        double r2 = static_cast<double>(id.cx_half) * id.cx_half +
                    static_cast<double>(id.cy_half) * id.cy_half;
        bool central = d > 0.0 && r2 <= limit;
        out.rate_class[i] = central ? RateClass::Central : RateClass::Peripheral;
    }
    return out;
}

double data_rate(const ChannelLayout& layout, uint32_t symbols) {
    if (symbols < 2) throw std::invalid_argument("data_rate: need at least 2 symbols");
    double bits_per_symbol = std::log2(static_cast<double>(symbols));
    double nc = layout.central_count();
    double np = layout.peripheral_count();
    return bits_per_symbol * (nc * layout.f_c + np * layout.f_p);
}

}  // namespace selene
