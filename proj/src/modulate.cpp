#include "selene/modulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selene {

int64_t symbol_time_us(uint64_t k, double rate_hz) {
    return std::llround(static_cast<double>(k) * 1e6 / rate_hz);
}

bool FrameSchedule::state_at(uint32_t channel_index, int64_t t) const {
    bool state = false;
    for (const Transition& tr : transitions) {
        if (tr.channel_index != channel_index) continue;
        if (tr.t > t) break;
        state = tr.on;
    }
    return state;
}

namespace {

void emit_channel_transitions(std::vector<Transition>& out, uint32_t channel,
                              const BitSeq& bits, double rate_hz) {
    uint8_t prev = 0;
    for (size_t k = 0; k < bits.size(); ++k) {
        uint8_t bit = bits[k] ? 1 : 0;
        if (bit != prev) {
            out.push_back({symbol_time_us(k, rate_hz), channel, bit != 0});
            prev = bit;
        }
    }
}

void sort_transitions(std::vector<Transition>& ts) {
    std::sort(ts.begin(), ts.end(), [](const Transition& a, const Transition& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.channel_index < b.channel_index;
    });
}

}  // namespace

FrameSchedule modulate(const ChannelLayout& layout,
                       const std::vector<ChannelBitstream>& streams) {
    const uint32_t n = layout.channel_count();
    std::vector<const ChannelBitstream*> by_channel(n, nullptr);
    for (const ChannelBitstream& s : streams) {
        if (s.channel_index >= n)
            throw std::invalid_argument("modulate: stream for unknown channel " +
                                        std::to_string(s.channel_index));
        if (by_channel[s.channel_index])
            throw std::invalid_argument("modulate: duplicate stream for channel " +
                                        std::to_string(s.channel_index));
        by_channel[s.channel_index] = &s;
    }
    std::string missing;
    for (uint32_t i = 0; i < n; ++i) {
        if (by_channel[i]) continue;
        if (!missing.empty()) missing += ',';
        missing += std::to_string(i);
        if (missing.size() > 64) break;
    }
    if (!missing.empty())
        throw std::invalid_argument("modulate: missing streams for channels " + missing);

    FrameSchedule sched;
    for (uint32_t i = 0; i < n; ++i) {
        const ChannelBitstream& s = *by_channel[i];
        if (s.bits.empty())
            throw std::invalid_argument("modulate: empty bit stream for channel " +
                                        std::to_string(i));
        if (s.symbol_rate != layout.rate_of(i))
            throw std::invalid_argument(
                "modulate: channel " + std::to_string(i) + " rate " +
                std::to_string(s.symbol_rate) + " Hz does not match class rate " +
                std::to_string(layout.rate_of(i)) + " Hz");
        emit_channel_transitions(sched.transitions, i, s.bits, s.symbol_rate);
        sched.duration_us = std::max(
            sched.duration_us, symbol_time_us(s.bits.size(), s.symbol_rate));
    }
    sort_transitions(sched.transitions);
    return sched;
}

FrameSchedule mapping_schedule(const ChannelLayout& layout, double base_rate,
                               double duration_s) {
    if (!(base_rate > 0.0)) throw std::invalid_argument("mapping_schedule: base_rate <= 0");
    FrameSchedule sched;
    sched.duration_us = std::llround(duration_s * 1e6);
    if (sched.duration_us <= 0) {
        sched.duration_us = 0;
        return sched;
    }
    const uint32_t n = layout.channel_count();
    if (n > 0xFFFF)
        throw std::invalid_argument("mapping_schedule: channel index exceeds 2-byte payload");
    const size_t packet_bits = 8 * (2 + 2);
    const uint64_t total_symbols =
        static_cast<uint64_t>(std::floor(duration_s * base_rate));
    const uint64_t repeats = total_symbols / packet_bits;
    if (repeats == 0) return sched;

    for (uint32_t i = 0; i < n; ++i) {
        std::vector<uint8_t> payload = {static_cast<uint8_t>(i & 0xFF),
                                        static_cast<uint8_t>((i >> 8) & 0xFF)};
        BitSeq packet = frame_packet(payload);
        BitSeq bits;
        bits.reserve(packet.size() * repeats);
        for (uint64_t r = 0; r < repeats; ++r)
            bits.insert(bits.end(), packet.begin(), packet.end());
        size_t before = sched.transitions.size();
        emit_channel_transitions(sched.transitions, i, bits, base_rate);
        // Mirrors go dark after the last whole packet.
        bool end_state = sched.transitions.size() > before
                             ? sched.transitions.back().on
                             : false;
        if (end_state)
            sched.transitions.push_back({symbol_time_us(bits.size(), base_rate), i, false});
    }
    sort_transitions(sched.transitions);
    return sched;
}

std::vector<ChannelBitstream> fill_payloads(const ChannelLayout& layout,
                                            const std::vector<uint8_t>& payload,
                                            uint32_t packets_per_channel) {
    if (packets_per_channel == 0)
        throw std::invalid_argument("fill_payloads: need at least one packet");
    BitSeq packet = frame_packet(payload);
    std::vector<ChannelBitstream> streams;
    streams.reserve(layout.channel_count());
    for (uint32_t i = 0; i < layout.channel_count(); ++i) {
        ChannelBitstream s;
        s.channel_index = i;
        s.symbol_rate = layout.rate_of(i);
        s.bits.reserve(packet.size() * packets_per_channel);
        for (uint32_t r = 0; r < packets_per_channel; ++r)
            s.bits.insert(s.bits.end(), packet.begin(), packet.end());
        streams.push_back(std::move(s));
    }
    return streams;
}

}  // namespace selene
