#include "selene/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace selene {

namespace {

// Nearest integer, ties to even.
int64_t round_even(double v) {
    return static_cast<int64_t>(std::nearbyint(v));
}

}  // namespace

Heatmap build_heatmap(const EventStream& stream) {
    Heatmap hm;
    hm.width = stream.width;
    hm.height = stream.height;
    hm.counts.assign(static_cast<size_t>(stream.width) * stream.height, 0);
    for (const Event& e : stream.events)
        ++hm.counts[static_cast<size_t>(e.y) * stream.width + e.x];
    return hm;
}

std::vector<BoxCenter> extract_channel_boxes(const Heatmap& hm, double binarize_frac,
                                             int morph_radius, bool eight_connected) {
    if (binarize_frac <= 0.0 || binarize_frac >= 1.0)
        throw std::invalid_argument("extract_channel_boxes: binarize_frac outside (0,1)");
    const uint32_t max_count = hm.counts.empty()
                                   ? 0
                                   : *std::max_element(hm.counts.begin(), hm.counts.end());
    if (max_count == 0)
        throw DetectionError("extract_channel_boxes: no channels detected (empty heatmap)");
    const double threshold = binarize_frac * static_cast<double>(max_count);
    const int w = hm.width, h = hm.height;
    std::vector<uint8_t> bin(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < bin.size(); ++i)
        bin[i] = static_cast<double>(hm.counts[i]) >= threshold ? 1 : 0;

    auto opened = bin;
    if (morph_radius > 0) {
        const int r = morph_radius;
        std::vector<uint8_t> eroded(bin.size(), 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                bool all = true;
                for (int dy = -r; dy <= r && all; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h ||
                            !bin[static_cast<size_t>(ny) * w + nx]) {
                            all = false;
                            break;
                        }
                    }
                }
                eroded[static_cast<size_t>(y) * w + x] = all ? 1 : 0;
            }
        }
        std::fill(opened.begin(), opened.end(), 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                bool any = false;
                for (int dy = -r; dy <= r && !any; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && ny >= 0 && nx < w && ny < h &&
                            eroded[static_cast<size_t>(ny) * w + nx]) {
                            any = true;
                            break;
                        }
                    }
                }
                opened[static_cast<size_t>(y) * w + x] = any ? 1 : 0;
            }
        }
    }

    // Connected component labeling with an explicit stack.
    std::vector<int32_t> label(opened.size(), -1);
    std::vector<BoxCenter> out;
    std::vector<std::pair<int, int>> stack;
    const int dx4[] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dy4[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int neighbors = eight_connected ? 8 : 4;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            if (!opened[i] || label[i] >= 0) continue;
            int32_t id = static_cast<int32_t>(out.size());
            int min_x = x, max_x = x, min_y = y, max_y = y;
            label[i] = id;
            stack.push_back({x, y});
            while (!stack.empty()) {
                auto [px, py] = stack.back();
                stack.pop_back();
                min_x = std::min(min_x, px);
                max_x = std::max(max_x, px);
                min_y = std::min(min_y, py);
                max_y = std::max(max_y, py);
                for (int k = 0; k < neighbors; ++k) {
                    int nx = px + dx4[k], ny = py + dy4[k];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    size_t ni = static_cast<size_t>(ny) * w + nx;
                    if (!opened[ni] || label[ni] >= 0) continue;
                    label[ni] = id;
                    stack.push_back({nx, ny});
                }
            }
            BoxCenter bc;
            bc.box = {static_cast<uint16_t>(min_x), static_cast<uint16_t>(min_y),
                      static_cast<uint16_t>(max_x), static_cast<uint16_t>(max_y)};
            bc.center_x = static_cast<uint16_t>(min_x + (max_x - min_x) / 2);
            bc.center_y = static_cast<uint16_t>(min_y + (max_y - min_y) / 2);
            out.push_back(bc);
        }
    }
    if (out.empty()) throw DetectionError("extract_channel_boxes: no channels detected");
    return out;
}

std::vector<Event> dedup(std::span<const Event> pixel_events) {
    std::vector<Event> out;
    for (const Event& e : pixel_events) {
        if (out.empty() || e.polarity != out.back().polarity) out.push_back(e);
    }
    return out;
}

BitSeq decode_absolute(std::span<const Event> deduped, const DecoderConfig& cfg,
                       double t0_us, size_t total_bits) {
    BitSeq bits(total_bits, 0);
    // -1 = no event in the window; otherwise the last event's polarity.
    std::vector<int8_t> window(total_bits, -1);
    const double y_per_us = cfg.symbol_rate * 1e-6;
    for (const Event& e : deduped) {
        double w = std::floor((static_cast<double>(e.t) - t0_us) * y_per_us);
        if (w < 0.0 || w >= static_cast<double>(total_bits)) continue;
        window[static_cast<size_t>(w)] = e.polarity == Polarity::On ? 1 : 0;
    }
    uint8_t prev = 0;
    for (size_t i = 0; i < total_bits; ++i) {
        bits[i] = window[i] < 0 ? prev : static_cast<uint8_t>(window[i]);
        prev = bits[i];
    }
    return bits;
}

BitSeq decode_relative(std::span<const Event> deduped, const DecoderConfig& cfg,
                       size_t total_bits) {
    for (size_t i = 1; i < deduped.size(); ++i)
        if (deduped[i].polarity == deduped[i - 1].polarity)
            throw std::invalid_argument("decode_relative: dedup required");

    BitSeq bits;
    bits.reserve(total_bits);
    auto fill = [&](uint8_t value, size_t count) {
        for (size_t i = 0; i < count && bits.size() < total_bits; ++i) bits.push_back(value);
    };
    if (deduped.empty()) {
        fill(0, total_bits);
        return bits;
    }
    const double y_per_us = cfg.symbol_rate * 1e-6;
    size_t first_off = deduped[0].polarity == Polarity::Off ? 0 : 1;
    if (first_off == 1) {
        // A leading ON event implies the stream held OFF before it; one zero
        // is the shortest prefix that explains the edge.
        fill(0, 1);
        if (first_off < deduped.size()) {
            int64_t run = round_even(
                static_cast<double>(deduped[1].t - deduped[0].t) * y_per_us);
            fill(1, static_cast<size_t>(std::max<int64_t>(0, run)));
        } else {
            fill(1, total_bits);  // only an ON edge: ones to the end
            return bits;
        }
    }
    size_t i = first_off;
    for (; i + 2 < deduped.size(); i += 2) {
        const int64_t t1 = deduped[i].t;
        const int64_t t_on = deduped[i + 1].t;
        const int64_t t2 = deduped[i + 2].t;
        const double T = static_cast<double>(t2 - t1);
        if (T <= 0.0) continue;
        int64_t H = round_even(T * y_per_us);
        if (H <= 0) continue;
        int64_t N0 = round_even(static_cast<double>(t_on - t1) / T * static_cast<double>(H));
        N0 = std::clamp<int64_t>(N0, 0, H);
        fill(0, static_cast<size_t>(N0));
        fill(1, static_cast<size_t>(H - N0));
    }
    // Tail after the last OFF event: zeros, then ones from a trailing ON.
    if (i + 1 < deduped.size()) {
        int64_t zeros = round_even(
            static_cast<double>(deduped[i + 1].t - deduped[i].t) * y_per_us);
        fill(0, static_cast<size_t>(std::max<int64_t>(0, zeros)));
        fill(1, total_bits);
    } else {
        fill(0, total_bits);
    }
    return bits;
}

double sync_absolute_t0(std::span<const Event> deduped, const DecoderConfig& cfg) {
    if (deduped.empty()) return 0.0;
    const size_t packet_bits = 8 * (cfg.payload_len + 2);
    const double ts_us = 1e6 / cfg.symbol_rate;
    const double anchor =
        static_cast<double>(deduped.front().t) - static_cast<double>(packet_bits) * ts_us;

    // Only the prefix participates in scoring.
    const double prefix_end =
        static_cast<double>(deduped.front().t) + 3.0 * packet_bits * ts_us;
    size_t prefix_n = 0;
    while (prefix_n < deduped.size() &&
           static_cast<double>(deduped[prefix_n].t) <= prefix_end)
        ++prefix_n;
    std::span<const Event> prefix = deduped.subspan(0, prefix_n);

    const uint8_t stx_bits[8] = {0, 1, 0, 1, 0, 1, 0, 1};
    double best_t0 = anchor;
    int best_score = -1;
    for (size_t k = 0; k < 8 * packet_bits; ++k) {
        double t0 = anchor + static_cast<double>(k) * ts_us / 8.0;
        BitSeq bits = decode_absolute(prefix, cfg, t0, 2 * packet_bits);
        int score = 0;
        for (size_t i = 0; i + 8 <= bits.size(); ++i) {
            bool match = true;
            for (int b = 0; b < 8; ++b)
                if (bits[i + b] != stx_bits[b]) {
                    match = false;
                    break;
                }
            if (match) ++score;
        }
        if (score > best_score) {
            best_score = score;
            best_t0 = t0;
        }
    }
    return best_t0;
}

std::vector<DecodedChannel> decode_all(const EventStream& stream, const ChannelMap& map,
                                       const ChannelLayout& layout, DecodeMode mode,
                                       size_t payload_len) {
    // Gather events per mapped center pixel in one pass.
    std::unordered_map<uint32_t, size_t> center_to_slot;
    center_to_slot.reserve(map.channels.size());
    std::vector<std::vector<Event>> per_channel(map.channels.size());
    for (size_t s = 0; s < map.channels.size(); ++s) {
        const MappedChannel& mc = map.channels[s];
        uint32_t key = (static_cast<uint32_t>(mc.center_y) << 16) | mc.center_x;
        center_to_slot[key] = s;
    }
    for (const Event& e : stream.events) {
        uint32_t key = (static_cast<uint32_t>(e.y) << 16) | e.x;
        auto it = center_to_slot.find(key);
        if (it != center_to_slot.end()) per_channel[it->second].push_back(e);
    }

    const size_t packet_bits = 8 * (payload_len + 2);
    std::vector<DecodedChannel> out(map.channels.size());
    for (size_t s = 0; s < map.channels.size(); ++s) {
        const MappedChannel& mc = map.channels[s];
        DecodedChannel& dc = out[s];
        dc.index = mc.id.index;
        DecoderConfig cfg;
        cfg.mode = mode;
        cfg.symbol_rate = layout.rate_of(mc.id.index);
        cfg.payload_len = payload_len;
        std::vector<Event> evs = dedup(per_channel[s]);
        if (evs.empty()) continue;
        const double y_per_us = cfg.symbol_rate * 1e-6;
        if (mode == DecodeMode::Relative) {
            size_t total = static_cast<size_t>(std::llround(
                               static_cast<double>(evs.back().t - evs.front().t) * y_per_us)) +
                           2 * packet_bits;
            dc.bits = decode_relative(evs, cfg, total);
        } else {
            double t0 = sync_absolute_t0(evs, cfg);
            size_t total = static_cast<size_t>(std::max(
                               0.0, std::floor((static_cast<double>(evs.back().t) - t0) *
                                               y_per_us))) +
                           1 + packet_bits;
            dc.bits = decode_absolute(evs, cfg, t0, total);
        }
        dc.packets = deframe_bits(dc.bits, payload_len).packets;
    }
    return out;
}

ChannelMap map_channels(const EventStream& stream, const std::vector<BoxCenter>& boxes,
                        double base_rate, size_t payload_len,
                        const ChannelLayout* layout) {
    std::unordered_map<uint32_t, size_t> center_to_slot;
    std::vector<std::vector<Event>> per_box(boxes.size());
    for (size_t s = 0; s < boxes.size(); ++s) {
        uint32_t key = (static_cast<uint32_t>(boxes[s].center_y) << 16) | boxes[s].center_x;
        center_to_slot[key] = s;
    }
    for (const Event& e : stream.events) {
        uint32_t key = (static_cast<uint32_t>(e.y) << 16) | e.x;
        auto it = center_to_slot.find(key);
        if (it != center_to_slot.end()) per_box[it->second].push_back(e);
    }

    DecoderConfig cfg;
    cfg.mode = DecodeMode::Relative;
    cfg.symbol_rate = base_rate;
    cfg.payload_len = payload_len;
    const size_t packet_bits = 8 * (payload_len + 2);

    ChannelMap map;
    std::unordered_map<uint32_t, size_t> seen;  // index -> box slot
    for (size_t s = 0; s < boxes.size(); ++s) {
        std::vector<Event> evs = dedup(per_box[s]);
        bool resolved = false;
        if (!evs.empty()) {
            size_t total =
                static_cast<size_t>(std::llround(
                    static_cast<double>(evs.back().t - evs.front().t) * base_rate * 1e-6)) +
                2 * packet_bits;
            BitSeq bits = decode_relative(evs, cfg, total);
            DeframeResult packets = deframe_bits(bits, payload_len);
            if (!packets.packets.empty()) {
                const Packet& p = packets.packets.front();
                uint32_t index = p.payload[0];
                if (payload_len > 1) index |= static_cast<uint32_t>(p.payload[1]) << 8;
                if (!layout || index < layout->channel_count()) {
                    auto [it, inserted] = seen.emplace(index, s);
                    if (!inserted)
                        throw MappingAmbiguityError(
                            "map_channels: ambiguous mapping, index " +
                            std::to_string(index) + " decoded from two boxes");
                    MappedChannel mc;
                    mc.id = layout ? layout->channel_id(index)
                                   : ChannelId{index, 0, 0};
                    mc.box = boxes[s].box;
                    mc.center_x = boxes[s].center_x;
                    mc.center_y = boxes[s].center_y;
                    map.channels.push_back(mc);
                    resolved = true;
                }
            }
        }
        if (!resolved) map.unresolved.push_back(boxes[s].box);
    }
    std::sort(map.channels.begin(), map.channels.end(),
              [](const MappedChannel& a, const MappedChannel& b) {
                  return a.id.index < b.id.index;
              });
    return map;
}

}  // namespace selene
