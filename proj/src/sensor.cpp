#include "selene/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selene {

namespace {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform in (0, 1], safe for log().
double uniform_pos(uint64_t& state) {
    return 1.0 - static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

uint64_t pixel_seed(uint64_t seed, uint16_t x, uint16_t y) {
    uint64_t s = seed ^ (static_cast<uint64_t>(x) << 32) ^ (static_cast<uint64_t>(y) << 16) ^
                 0xD1B54A32D192ED03ull;
    splitmix64(s);
    return s;
}

double log_lux(double lux, const SensorConfig& cfg) {
    double v = lux + cfg.i_dark;
    if (v <= 0.0)
        throw std::domain_error("generate_events: log undefined for lux " +
                                std::to_string(lux) + " with i_dark " +
                                std::to_string(cfg.i_dark));
    return std::log(v);
}

// Events for one log step; returns the count.
uint64_t emit_step(std::vector<RawEvent>& out, uint16_t x, uint16_t y, int64_t t,
                   double delta, const SensorConfig& cfg) {
    uint64_t k = 0;
    Polarity pol = Polarity::On;
    if (delta >= cfg.theta_on) {
        k = static_cast<uint64_t>(std::floor(delta / cfg.theta_on));
    } else if (delta <= -cfg.theta_off) {
        k = static_cast<uint64_t>(std::floor(-delta / cfg.theta_off));
        pol = Polarity::Off;
    }
    for (uint64_t j = 0; j < k; ++j)
        out.push_back({t + static_cast<int64_t>(j) * cfg.dup_spacing_us, x, y, pol});
    return k;
}

void append_noise(std::vector<RawEvent>& out, uint16_t x, uint16_t y,
                  int64_t t_end, const SensorConfig& cfg, uint64_t& count) {
    if (cfg.noise_rate <= 0.0 || t_end <= 0) return;
    uint64_t state = pixel_seed(cfg.rng_seed, x, y);
    double t = 0.0;
    for (;;) {
        t += -std::log(uniform_pos(state)) / cfg.noise_rate * 1e6;
        if (t > static_cast<double>(t_end)) break;
        out.push_back({static_cast<int64_t>(std::llround(t)), x, y, Polarity::On});
        ++count;
    }
}

std::vector<RawEvent> signal_events(const PixelTrace& trace, const SensorConfig& cfg,
                                    GenStats* stats) {
    if (!(cfg.theta_on > 0.0) || !(cfg.theta_off > 0.0))
        throw std::invalid_argument("generate_events: thresholds must be positive");
    std::vector<RawEvent> out;
    if (trace.steps.empty()) return out;
    double ref = log_lux(trace.steps[0].lux, cfg);
    for (size_t i = 1; i < trace.steps.size(); ++i) {
        double v = log_lux(trace.steps[i].lux, cfg);
        double delta = v - ref;
        uint64_t k = emit_step(out, trace.x, trace.y, trace.steps[i].t, delta, cfg);
        if (stats && k > 0) {
            stats->generated += k;
            stats->duplicates += k - 1;
        }
        if (cfg.carry_residual) {
            if (k > 0) ref += (delta > 0 ? 1.0 : -1.0) *
                              static_cast<double>(k) *
                              (delta > 0 ? cfg.theta_on : cfg.theta_off);
        } else {
            ref = v;
        }
    }
    return out;
}

}  // namespace

std::vector<RawEvent> generate_events(const PixelTrace& trace, const SensorConfig& cfg,
                                      GenStats* stats) {
    std::vector<RawEvent> out = signal_events(trace, cfg, stats);
    uint64_t noise = 0;
    append_noise(out, trace.x, trace.y, trace.t_end, cfg, noise);
    if (stats) {
        stats->generated += noise;
        stats->noise_events += noise;
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RawEvent& a, const RawEvent& b) { return a.gen_t < b.gen_t; });
    return out;
}

double SensorStats::loss_fraction(int ring_lo, int ring_hi) const {
    uint64_t gen = 0, drop = 0;
    for (int r = ring_lo; r <= ring_hi && r < kRings; ++r) {
        gen += ring_generated[r];
        drop += ring_dropped[r];
    }
    return gen == 0 ? 0.0 : static_cast<double>(drop) / static_cast<double>(gen);
}

EventStream readout(std::vector<RawEvent> raw, const SensorConfig& cfg,
                    uint16_t width, uint16_t height, SensorStats* stats) {
    if (!(cfg.readout_bandwidth > 0.0))
        throw std::invalid_argument("readout: bandwidth must be positive");
    if (cfg.queue_capacity < 1)
        throw std::invalid_argument("readout: queue capacity must be at least 1");

    const double cx = cfg.optical_center_x >= 0.0 ? cfg.optical_center_x : (width - 1) / 2.0;
    const double cy = cfg.optical_center_y >= 0.0 ? cfg.optical_center_y : (height - 1) / 2.0;
    const size_t total = static_cast<size_t>(width) * height;
    std::vector<double> dist2(total);
    std::vector<int64_t> delay(total);
    std::vector<uint8_t> ring(total);
    double corner = 0.0;
    for (double ex : {0.0, static_cast<double>(width - 1)})
        for (double ey : {0.0, static_cast<double>(height - 1)})
            corner = std::max(corner, std::hypot(ex - cx, ey - cy));
    const double ring_width = corner > 0.0 ? corner / SensorStats::kRings : 1.0;
    for (uint16_t y = 0; y < height; ++y) {
        for (uint16_t x = 0; x < width; ++x) {
            size_t i = static_cast<size_t>(y) * width + x;
            double dx = x - cx, dy = y - cy;
            dist2[i] = dx * dx + dy * dy;
            double d = std::sqrt(dist2[i]);
            delay[i] = std::llround(cfg.base_delay_us + cfg.radial_delay_us_per_px * d);
            ring[i] = static_cast<uint8_t>(
                std::min<int>(SensorStats::kRings - 1, static_cast<int>(d / ring_width)));
        }
    }
    auto pix = [&](const RawEvent& e) { return static_cast<size_t>(e.y) * width + e.x; };

    // Generation order with center-first priority on simultaneous events.
    std::sort(raw.begin(), raw.end(), [&](const RawEvent& a, const RawEvent& b) {
        if (a.gen_t != b.gen_t) return a.gen_t < b.gen_t;
        double da = dist2[pix(a)], db = dist2[pix(b)];
        if (da != db) return da < db;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.polarity < b.polarity;
    });

    if (stats) {
        stats->ring_width_px = ring_width;
        for (const RawEvent& e : raw) ++stats->ring_generated[ring[pix(e)]];
    }

    EventStream out;
    out.width = width;
    out.height = height;
    out.events.reserve(raw.size());
    const double service_us = 1e6 / cfg.readout_bandwidth;
    double free_at = -1e18;
    for (const RawEvent& e : raw) {
        size_t i = pix(e);
        int64_t arrival = e.gen_t + delay[i];
        auto it = std::upper_bound(out.events.begin(), out.events.end(), arrival,
                                   [](int64_t t, const Event& ev) { return t < ev.t; });
        uint64_t occupancy = out.events.size() - (it - out.events.begin());
        if (occupancy >= cfg.queue_capacity) {
            if (stats) {
                ++stats->dropped;
                ++stats->ring_dropped[ring[i]];
            }
            continue;
        }
        free_at = std::max(static_cast<double>(arrival), free_at + service_us);
        out.events.push_back({static_cast<int64_t>(std::floor(free_at)), e.x, e.y, e.polarity});
    }
    if (stats) stats->emitted = out.events.size();
    return out;
}

SimResult simulate(const FrameSchedule& schedule, const Footprints& footprints,
                   const OpticalConfig& optics, const SensorConfig& cfg) {
    SimResult res;
    const uint16_t width = footprints.camera_width;
    const uint16_t height = footprints.camera_height;
    const size_t total = static_cast<size_t>(width) * height;

    std::vector<std::vector<Transition>> by_channel(footprints.channels.size());
    for (const Transition& tr : schedule.transitions)
        by_channel[tr.channel_index].push_back(tr);

    struct Contribution {
        uint32_t channel;
        float gain;
    };
    std::vector<std::vector<Contribution>> contrib(total);
    auto idx = [&](const PixelCoord& p) { return static_cast<size_t>(p.y) * width + p.x; };
    for (const ChannelFootprint& cf : footprints.channels) {
        for (const PixelCoord& p : cf.pixels)
            contrib[idx(p)].push_back({cf.channel_index, 1.0f});
        if (optics.crosstalk_frac > 0.0)
            for (const PixelCoord& p : cf.ring)
                contrib[idx(p)].push_back(
                    {cf.channel_index, static_cast<float>(optics.crosstalk_frac)});
    }

    std::vector<RawEvent> raw;
    GenStats gen{};

    // Fast path: a channel's footprint pixels share one trace, so the event
    // template per channel is expanded per pixel.
    struct TemplateEvent {
        int64_t t;
        Polarity pol;
        uint32_t count;
    };
    for (const ChannelFootprint& cf : footprints.channels) {
        if (cf.pixels.empty()) continue;
        PixelTrace probe;
        probe.x = cf.pixels[0].x;
        probe.y = cf.pixels[0].y;
        probe.t_end = schedule.duration_us;
        probe.steps.push_back({0, optics.ambient_lux});
        const double on_add = optics.channel_on_lux * optics.attenuation;
        for (const Transition& tr : by_channel[cf.channel_index]) {
            double lux = optics.ambient_lux + (tr.on ? on_add : 0.0);
            if (tr.t == probe.steps.back().t)
                probe.steps.back().lux = lux;
            else
                probe.steps.push_back({tr.t, lux});
        }
        GenStats tmpl_stats{};
        std::vector<RawEvent> tmpl = signal_events(probe, cfg, &tmpl_stats);
        for (const PixelCoord& p : cf.pixels) {
            if (contrib[idx(p)].size() != 1) continue;  // handled by the slow path
            for (const RawEvent& e : tmpl)
                raw.push_back({e.gen_t, p.x, p.y, e.polarity});
            gen.generated += tmpl_stats.generated;
            gen.duplicates += tmpl_stats.duplicates;
        }
    }

    // Slow path: pixels with several contributors (crosstalk rings and any
    // footprint pixel they overlap).
    if (optics.crosstalk_frac > 0.0) {
        const double atten = optics.channel_on_lux * optics.attenuation;
        for (size_t i = 0; i < total; ++i) {
            const auto& cs = contrib[i];
            if (cs.size() < 2 && !(cs.size() == 1 && cs[0].gain != 1.0f)) continue;
            PixelTrace tr;
            tr.x = static_cast<uint16_t>(i % width);
            tr.y = static_cast<uint16_t>(i / width);
            tr.t_end = schedule.duration_us;
            std::vector<std::pair<int64_t, double>> deltas;
            for (const Contribution& c : cs) {
                bool state = false;
                for (const Transition& t : by_channel[c.channel]) {
                    if (t.on != state) {
                        deltas.emplace_back(t.t, (t.on ? 1.0 : -1.0) * atten * c.gain);
                        state = t.on;
                    }
                }
            }
            std::sort(deltas.begin(), deltas.end());
            double lux = optics.ambient_lux;
            tr.steps.push_back({0, lux});
            for (auto& [t, dl] : deltas) {
                lux += dl;
                if (t == tr.steps.back().t)
                    tr.steps.back().lux = lux;
                else
                    tr.steps.push_back({t, lux});
            }
            std::vector<RawEvent> evs = signal_events(tr, cfg, &gen);
            raw.insert(raw.end(), evs.begin(), evs.end());
        }
    }

    // Spurious ON noise across the whole pixel array.
    if (cfg.noise_rate > 0.0) {
        for (uint16_t y = 0; y < height; ++y)
            for (uint16_t x = 0; x < width; ++x)
                append_noise(raw, x, y, schedule.duration_us, cfg, gen.noise_events);
        gen.generated += gen.noise_events;
    }

    res.stats.generated = gen.generated;
    res.stats.duplicates = gen.duplicates;
    res.stats.noise_events = gen.noise_events;
    res.stream = readout(std::move(raw), cfg, width, height, &res.stats);
    return res;
}

}  // namespace selene
