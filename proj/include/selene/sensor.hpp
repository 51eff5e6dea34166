#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "selene/core.hpp"
#include "selene/optics.hpp"

namespace selene {

// Dynamic-vision-sensor model parameters.
struct SensorConfig {
    double theta_on = 0.2;    // log-intensity ON threshold
    double theta_off = 0.22;  // log-intensity OFF threshold (asymmetric by default)
    double i_dark = 10.0;     // dark-current equivalent illuminance
    int64_t dup_spacing_us = 100;   // spacing between duplicate events
    double base_delay_us = 0.0;     // detection delay at the optical center
    double radial_delay_us_per_px = 0.0;
    double readout_bandwidth = 1e12;  // events per second the readout can stamp
    uint64_t queue_capacity = 1ull << 62;
    double noise_rate = 0.0;  // spurious ON events per pixel per second
    double optical_center_x = -1.0;  // negative = camera center
    double optical_center_y = -1.0;
    uint64_t rng_seed = 1;
    bool carry_residual = false;  // keep sub-threshold residual between steps
};

// Pre-readout event, timestamped with its generation time.
struct RawEvent {
    int64_t gen_t = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    Polarity polarity = Polarity::Off;
};

struct SensorStats {
    static constexpr int kRings = 8;  // equal-width distance bands to the corner
    uint64_t generated = 0;   // raw events incl. duplicates and noise
    uint64_t duplicates = 0;  // events beyond the first per threshold crossing
    uint64_t noise_events = 0;
    uint64_t dropped = 0;
    uint64_t emitted = 0;
    std::array<uint64_t, kRings> ring_generated{};
    std::array<uint64_t, kRings> ring_dropped{};
    double ring_width_px = 0.0;

    double loss_fraction(int ring_lo, int ring_hi) const;  // inclusive range
};

struct GenStats {
    uint64_t generated = 0;
    uint64_t duplicates = 0;
    uint64_t noise_events = 0;
};

// Threshold crossings of the log illuminance: a step of log-delta D emits
// floor(|D|/theta) same-polarity events spaced dup_spacing apart. Spurious ON
// events arrive as a per-pixel seeded Poisson process at noise_rate. Throws
// if lux + i_dark is not positive anywhere on the trace.
std::vector<RawEvent> generate_events(const PixelTrace& trace, const SensorConfig& cfg,
                                      GenStats* stats = nullptr);

// Single-server timestamping queue. Events are ordered by generation time
// with nearer-to-center first on ties; each is stamped at
// max(gen + detect_delay, previous stamp + 1/B), where detect_delay =
// base_delay + radial_delay_coeff * distance to the optical center. Arrivals
// that meet a full queue are dropped.
EventStream readout(std::vector<RawEvent> raw, const SensorConfig& cfg,
                    uint16_t width, uint16_t height, SensorStats* stats = nullptr);

struct SimResult {
    EventStream stream;
    SensorStats stats;
};

// render -> generate -> readout, deterministic for a fixed rng_seed.
SimResult simulate(const FrameSchedule& schedule, const Footprints& footprints,
                   const OpticalConfig& optics, const SensorConfig& cfg);

}  // namespace selene
