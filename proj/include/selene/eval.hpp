#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selene/core.hpp"
#include "selene/modulate.hpp"
#include "selene/optics.hpp"
#include "selene/receiver.hpp"
#include "selene/sensor.hpp"

namespace selene {

struct ChannelOutcome {
    uint32_t index = 0;
    uint32_t valid_packets = 0;
    uint64_t bits_compared = 0;
    uint64_t bit_errors = 0;
};

struct TrialResult {
    uint32_t channel_count = 0;
    double f_c = 0.0;
    double f_p = 0.0;
    DecodeMode mode = DecodeMode::Relative;
    std::vector<ChannelOutcome> channels;
    double mean_ber = 0.0;           // over channels with at least one valid packet
    uint32_t undefined_channels = 0; // channels with zero valid packets
    double valid_fraction = 0.0;     // valid packets / expected packets
    double bps = 0.0;                // data_rate of the layout
    SensorStats sensor;
    uint32_t mapped_channels = 0;
};

// Per-channel Hamming comparison of received payloads against the transmitted
// one. Channels with no valid packet stay out of the mean and are counted
// separately.
TrialResult ber(const std::vector<uint8_t>& tx_payload,
                const std::vector<DecodedChannel>& rx, uint32_t total_channels,
                uint32_t expected_packets_per_channel);

struct TrialConfig {
    ChannelLayout layout;
    ProjectionModel projection;
    OpticalConfig optics;
    SensorConfig sensor;
    DecodeMode mode = DecodeMode::Relative;
    std::vector<uint8_t> payload = {'g', 'o', 'o', 'd'};
    uint32_t packets_per_channel = 30;
    double mapping_rate_hz = 588.0;
    double mapping_seconds = 1.0;
    double binarize_frac = 0.2;
    int morph_radius = 1;
    uint64_t map_seed = 1;  // calibration runs on this seed, shared across a sweep
};

// Calibration pass: broadcast channel indices, build the heatmap, extract
// boxes, decode indices. Throws when no channels are detected or the mapping
// is ambiguous.
ChannelMap build_channel_map(const TrialConfig& cfg);

// fill_payloads -> modulate -> simulate -> map (or the supplied one) ->
// decode_all -> ber. Deterministic for a fixed seed.
TrialResult run_trial(const TrialConfig& cfg, const ChannelMap* cached_map = nullptr);

enum class SweepVariable { RefreshRate, ChannelCount, DecoderMode, Bandwidth, Ambient };

struct SweepPoint {
    double value = 0.0;
    std::optional<TrialResult> result;
    std::string error;  // set when the trial failed
};

// One trial per grid value; seeds derive as base seed + index; a failing
// point records its error and the sweep continues.
std::vector<SweepPoint> sweep(SweepVariable variable, const std::vector<double>& values,
                              const TrialConfig& base);

struct RateSearchResult {
    bool feasible = false;
    double f_c = 0.0;
    double f_p = 0.0;
    double bps = 0.0;
    TrialResult best;
};

// Largest integer f_c in [f_min, f_max] whose aggregate BER stays within
// ber_target; dual layouts (central_radius > 0) track f_p = f_c / 2.
RateSearchResult max_rate_search(const TrialConfig& base, double ber_target,
                                 uint32_t f_min, uint32_t f_max);

// Applies a sweep variable to a config (exposed for the CLI).
TrialConfig apply_sweep_value(const TrialConfig& base, SweepVariable variable, double value);

}  // namespace selene
