#include "selene/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selene {

namespace {

int popcount8(uint8_t v) { return __builtin_popcount(v); }

}  // namespace

TrialResult ber(const std::vector<uint8_t>& tx_payload,
                const std::vector<DecodedChannel>& rx, uint32_t total_channels,
                uint32_t expected_packets_per_channel) {
    TrialResult res;
    res.channel_count = total_channels;
    res.channels.reserve(rx.size());
    double ber_sum = 0.0;
    uint32_t defined = 0;
    uint64_t valid_total = 0;
    for (const DecodedChannel& dc : rx) {
        ChannelOutcome oc;
        oc.index = dc.index;
        for (const Packet& p : dc.packets) {
            if (p.payload.size() != tx_payload.size()) continue;
            ++oc.valid_packets;
            for (size_t b = 0; b < tx_payload.size(); ++b)
                oc.bit_errors += popcount8(p.payload[b] ^ tx_payload[b]);
        }
        oc.bits_compared = 8ull * tx_payload.size() * oc.valid_packets;
        if (oc.valid_packets > 0) {
            ber_sum += static_cast<double>(oc.bit_errors) /
                       static_cast<double>(oc.bits_compared);
            ++defined;
            valid_total += oc.valid_packets;
        }
        res.channels.push_back(oc);
    }
    res.undefined_channels = total_channels - defined;
    res.mean_ber = defined > 0 ? ber_sum / defined : 0.0;
    uint64_t expected = static_cast<uint64_t>(total_channels) * expected_packets_per_channel;
    res.valid_fraction =
        expected > 0 ? static_cast<double>(valid_total) / static_cast<double>(expected) : 0.0;
    return res;
}

ChannelMap build_channel_map(const TrialConfig& cfg) {
    Footprints fp = project_channels(cfg.layout, cfg.projection, cfg.optics);
    FrameSchedule sched = mapping_schedule(cfg.layout, cfg.mapping_rate_hz,
                                           cfg.mapping_seconds);
    SensorConfig sensor = cfg.sensor;
    sensor.rng_seed = cfg.map_seed;
    SimResult sim = simulate(sched, fp, cfg.optics, sensor);
    Heatmap hm = build_heatmap(sim.stream);
    std::vector<BoxCenter> boxes =
        extract_channel_boxes(hm, cfg.binarize_frac, cfg.morph_radius);
    return map_channels(sim.stream, boxes, cfg.mapping_rate_hz, 2, &cfg.layout);
}

TrialResult run_trial(const TrialConfig& cfg, const ChannelMap* cached_map) {
    Footprints fp = project_channels(cfg.layout, cfg.projection, cfg.optics);
    ChannelMap local_map;
    const ChannelMap* map = cached_map;
    if (!map) {
        local_map = build_channel_map(cfg);
        map = &local_map;
    }

    std::vector<ChannelBitstream> streams =
        fill_payloads(cfg.layout, cfg.payload, cfg.packets_per_channel);
    FrameSchedule sched = modulate(cfg.layout, streams);
    SimResult sim = simulate(sched, fp, cfg.optics, cfg.sensor);

    std::vector<DecodedChannel> decoded =
        decode_all(sim.stream, *map, cfg.layout, cfg.mode, cfg.payload.size());

    TrialResult res = ber(cfg.payload, decoded, cfg.layout.channel_count(),
                          cfg.packets_per_channel);
    res.f_c = cfg.layout.f_c;
    res.f_p = cfg.layout.f_p;
    res.mode = cfg.mode;
    res.bps = data_rate(cfg.layout, 2);
    res.sensor = sim.stats;
    res.mapped_channels = static_cast<uint32_t>(map->channels.size());
    return res;
}

TrialConfig apply_sweep_value(const TrialConfig& base, SweepVariable variable, double value) {
    TrialConfig cfg = base;
    switch (variable) {
        case SweepVariable::RefreshRate: {
            double d = base.layout.central_radius;
            double f_c = value;
            double f_p = d > 0.0 ? value / 2.0 : value;
            cfg.layout = classify_rates(base.layout, d, f_c, f_p);
            break;
        }
        case SweepVariable::ChannelCount: {
            double target = std::max(1.0, value);
            double aspect = static_cast<double>(base.layout.grid_cols) /
                            static_cast<double>(base.layout.grid_rows);
            uint32_t cols = static_cast<uint32_t>(std::clamp(
                std::round(std::sqrt(target * aspect)), 1.0,
                static_cast<double>(base.layout.grid_cols)));
            uint32_t rows = static_cast<uint32_t>(std::clamp(
                std::round(target / cols), 1.0, static_cast<double>(base.layout.grid_rows)));
            ChannelLayout fresh = build_layout(
                base.layout.mirror_cols, base.layout.mirror_rows, base.layout.block_size,
                base.layout.guard, cols, rows, base.layout.f_p);
            cfg.layout = classify_rates(fresh, base.layout.central_radius, base.layout.f_c,
                                        base.layout.f_p);
            break;
        }
        case SweepVariable::DecoderMode:
            cfg.mode = value < 0.5 ? DecodeMode::Absolute : DecodeMode::Relative;
            break;
        case SweepVariable::Bandwidth:
            cfg.sensor.readout_bandwidth = value;
            break;
        case SweepVariable::Ambient:
            cfg.optics.ambient_lux = value;
            break;
    }
    return cfg;
}

std::vector<SweepPoint> sweep(SweepVariable variable, const std::vector<double>& values,
                              const TrialConfig& base) {
    if (values.empty()) throw std::invalid_argument("sweep: empty value grid");
    std::vector<SweepPoint> out;
    out.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        SweepPoint pt;
        pt.value = values[i];
        try {
            TrialConfig cfg = apply_sweep_value(base, variable, values[i]);
            cfg.sensor.rng_seed = base.sensor.rng_seed + i;
            pt.result = run_trial(cfg);
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

RateSearchResult max_rate_search(const TrialConfig& base, double ber_target,
                                 uint32_t f_min, uint32_t f_max) {
    if (!(ber_target > 0.0) || !(ber_target < 1.0))
        throw std::invalid_argument("max_rate_search: ber_target outside (0,1)");
    if (f_min == 0 || f_min > f_max)
        throw std::invalid_argument("max_rate_search: bad rate bounds");

    auto probe = [&](uint32_t f, TrialResult& out) {
        TrialConfig cfg = apply_sweep_value(base, SweepVariable::RefreshRate,
                                            static_cast<double>(f));
        out = run_trial(cfg);
        return out.mean_ber <= ber_target && out.undefined_channels == 0;
    };

    RateSearchResult res;
    TrialResult trial;
    if (probe(f_max, trial)) {  // rate ceiling is already compliant
        res.feasible = true;
        res.best = trial;
    } else if (!probe(f_min, trial)) {
        res.feasible = false;
        return res;
    } else {
        res.feasible = true;
        res.best = trial;
        uint32_t lo = f_min, hi = f_max;  // lo compliant, hi not
        while (hi - lo > 1) {
            uint32_t mid = lo + (hi - lo) / 2;
            if (probe(mid, trial)) {
                lo = mid;
                res.best = trial;
            } else {
                hi = mid;
            }
        }
    }
    res.f_c = res.best.f_c;
    res.f_p = res.best.f_p;
    res.bps = res.best.bps;
    return res;
}

}  // namespace selene
