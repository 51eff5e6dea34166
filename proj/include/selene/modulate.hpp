#pragma once

#include <cstdint>
#include <vector>

#include "selene/core.hpp"

namespace selene {

struct ChannelBitstream {
    uint32_t channel_index = 0;
    BitSeq bits;
    double symbol_rate = 0.0;  // Hz, must match the channel's rate class
};

struct Transition {
    int64_t t = 0;  // microseconds
    uint32_t channel_index = 0;
    bool on = false;

    bool operator==(const Transition&) const = default;
};

// Time-ordered mirror-block state transitions. Channels start OFF before the
// first transition; per channel the states strictly alternate.
struct FrameSchedule {
    std::vector<Transition> transitions;  // sorted by (t, channel_index)
    int64_t duration_us = 0;

    // Mirror state of one channel at time t (OFF before its first transition).
    bool state_at(uint32_t channel_index, int64_t t) const;
};

// Symbol boundary k at rate Y, rounded to integer microseconds without
// cumulative drift.
int64_t symbol_time_us(uint64_t k, double rate_hz);

// OOK: bit k of a stream occupies [k/Y, (k+1)/Y); a transition is emitted
// exactly where the bit differs from its predecessor (implicit leading 0).
// Requires one stream per channel with the channel's class rate.
FrameSchedule modulate(const ChannelLayout& layout,
                       const std::vector<ChannelBitstream>& streams);

// Calibration broadcast: every channel repeats its index (2 bytes,
// little-endian) framed as packets at base_rate, for as many whole packets as
// fit in the duration, then holds OFF until the end.
FrameSchedule mapping_schedule(const ChannelLayout& layout, double base_rate,
                               double duration_s);

// packets_per_channel copies of frame_packet(payload) per channel, at the
// channel's rate-class frequency.
std::vector<ChannelBitstream> fill_payloads(const ChannelLayout& layout,
                                            const std::vector<uint8_t>& payload,
                                            uint32_t packets_per_channel);

}  // namespace selene
