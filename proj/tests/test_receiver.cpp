#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "selene/modulate.hpp"
#include "selene/optics.hpp"
#include "selene/receiver.hpp"
#include "selene/sensor.hpp"

using namespace selene;

namespace {

Event ev(int64_t t, Polarity p, uint16_t x = 0, uint16_t y = 0) { return {t, x, y, p}; }

std::vector<Event> events_of(std::initializer_list<std::pair<int64_t, Polarity>> list) {
    std::vector<Event> v;
    for (auto& [t, p] : list) v.push_back(ev(t, p));
    return v;
}

BitSeq bits_of(const std::string& s) {
    BitSeq b;
    for (char c : s)
        if (c == '0' || c == '1') b.push_back(c == '1');
    return b;
}

// Independent edge oracle: ideal events for a bit stream at integer-period Y.
std::vector<Event> ideal_events(const BitSeq& bits, int64_t period_us, int64_t t0 = 0) {
    std::vector<Event> v;
    uint8_t prev = 0;
    for (size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] != prev)
            v.push_back(ev(t0 + static_cast<int64_t>(k) * period_us,
                           bits[k] ? Polarity::On : Polarity::Off));
        prev = bits[k];
    }
    return v;
}

}  // namespace

TEST_CASE("dedup keeps the first event and polarity changes only") {
    auto in = events_of({{10, Polarity::On},
                         {20, Polarity::On},
                         {30, Polarity::On},
                         {40, Polarity::Off},
                         {50, Polarity::Off},
                         {60, Polarity::On}});
    auto out = dedup(in);
    REQUIRE(out.size() == 3);
    CHECK(out[0].t == 10);
    CHECK(out[0].polarity == Polarity::On);
    CHECK(out[1].t == 40);
    CHECK(out[1].polarity == Polarity::Off);
    CHECK(out[2].t == 60);
    CHECK(out[2].polarity == Polarity::On);
}

TEST_CASE("dedup of a singleton keeps it") {
    auto out = dedup(events_of({{5, Polarity::Off}}));
    REQUIRE(out.size() == 1);
    CHECK(out[0].polarity == Polarity::Off);
}

TEST_CASE("dedup alternates, is idempotent, and keeps the first event") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Event> in;
        int64_t t = 0;
        for (int i = 0; i < 50; ++i) {
            t += rng() % 100;
            in.push_back(ev(t, rng() & 1 ? Polarity::On : Polarity::Off));
        }
        auto once = dedup(in);
        REQUIRE(!once.empty());
        CHECK(once[0] == in[0]);
        for (size_t i = 1; i < once.size(); ++i)
            CHECK(once[i].polarity != once[i - 1].polarity);
        CHECK(dedup(once) == once);
    }
}

TEST_CASE("absolute decoding of the reference byte") {
    DecoderConfig cfg{DecodeMode::Absolute, 1000.0, 1};
    auto events = ideal_events(bits_of("01011001"), 1000);
    CHECK(decode_absolute(events, cfg, 0.0, 8) == bits_of("01011001"));
}

TEST_CASE("absolute decoding with no events repeats the implicit zero") {
    DecoderConfig cfg{DecodeMode::Absolute, 1000.0, 1};
    CHECK(decode_absolute({}, cfg, 0.0, 8) == bits_of("00000000"));
}

TEST_CASE("absolute decoding tolerates in-window jitter") {
    DecoderConfig cfg{DecodeMode::Absolute, 1000.0, 1};
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        BitSeq bits(24);
        for (auto& b : bits) b = rng() & 1;
        auto events = ideal_events(bits, 1000);
        for (Event& e : events) e.t += 400;  // +0.4 Ts keeps every event in place
        CHECK(decode_absolute(events, cfg, 0.0, bits.size()) == bits);
    }
}

TEST_CASE("a window with both polarities takes the later event") {
    DecoderConfig cfg{DecodeMode::Absolute, 1000.0, 1};
    auto events = events_of({{100, Polarity::On}, {900, Polarity::Off}});
    CHECK(decode_absolute(events, cfg, 0.0, 2) == bits_of("00"));
    auto flipped = events_of({{100, Polarity::Off}, {900, Polarity::On}});
    CHECK(decode_absolute(flipped, cfg, 0.0, 2) == bits_of("11"));
}

TEST_CASE("relative decoding applies the T/H/N0/N1 rule") {
    DecoderConfig cfg{DecodeMode::Relative, 1000.0, 1};
    auto events = events_of({{0, Polarity::Off}, {3000, Polarity::On}, {8000, Polarity::Off}});
    CHECK(decode_relative(events, cfg, 8) == bits_of("00011111"));
}

TEST_CASE("relative decoding is shift invariant") {
    DecoderConfig cfg{DecodeMode::Relative, 1000.0, 1};
    auto base = events_of({{0, Polarity::Off}, {3000, Polarity::On}, {8000, Polarity::Off}});
    auto shifted = base;
    for (Event& e : shifted) e.t += 12345;
    CHECK(decode_relative(base, cfg, 8) == decode_relative(shifted, cfg, 8));
}

TEST_CASE("relative decoding of the reference byte") {
    DecoderConfig cfg{DecodeMode::Relative, 1000.0, 1};
    auto events = ideal_events(bits_of("01011001"), 1000);
    CHECK(decode_relative(events, cfg, 8) == bits_of("01011001"));
}

TEST_CASE("relative decoding requires deduped input") {
    DecoderConfig cfg{DecodeMode::Relative, 1000.0, 1};
    auto events = events_of({{0, Polarity::Off}, {100, Polarity::Off}});
    CHECK_THROWS_WITH_AS(decode_relative(events, cfg, 4), doctest::Contains("dedup"),
                         std::invalid_argument);
}

TEST_CASE("relative output length is exactly total_bits") {
    DecoderConfig cfg{DecodeMode::Relative, 1000.0, 1};
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        BitSeq bits(32);
        for (auto& b : bits) b = rng() & 1;
        auto events = ideal_events(bits, 1000);
        for (size_t n : {1ul, 8ul, 32ul, 64ul})
            CHECK(decode_relative(events, cfg, n).size() == n);
    }
}

TEST_CASE("relative decoding survives 100 random uniform shifts") {
    DecoderConfig cfg{DecodeMode::Relative, 588.0, 4};
    BitSeq payload_bits = frame_packet({'s', 'h', 'i', 'f'});
    std::vector<Event> base;
    uint8_t prev = 0;
    for (size_t k = 0; k < payload_bits.size(); ++k) {
        if (payload_bits[k] != prev)
            base.push_back(ev(symbol_time_us(k, 588.0),
                              payload_bits[k] ? Polarity::On : Polarity::Off));
        prev = payload_bits[k];
    }
    BitSeq reference = decode_relative(base, cfg, payload_bits.size());
    std::mt19937_64 rng(43);
    for (int i = 0; i < 100; ++i) {
        int64_t shift = static_cast<int64_t>(rng() % 100000000);
        std::vector<Event> moved = base;
        for (Event& e : moved) e.t += shift;
        CHECK(decode_relative(moved, cfg, payload_bits.size()) == reference);
    }
}

TEST_CASE("absolute and relative agree on ideal streams for 1000 random payloads") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t len = 1 + rng() % 8;
        std::vector<uint8_t> payload(len);
        for (auto& b : payload) b = static_cast<uint8_t>(rng());
        BitSeq bits = frame_packet(payload);
        DecoderConfig cfg{DecodeMode::Relative, 1000.0, len};
        auto events = ideal_events(bits, 1000);
        BitSeq abs = decode_absolute(events, cfg, 0.0, bits.size());
        BitSeq rel = decode_relative(events, cfg, bits.size());
        CHECK(abs == bits);
        CHECK(rel == bits);
    }
}

TEST_CASE("sync recovers the symbol grid from a shifted recording") {
    DecoderConfig cfg{DecodeMode::Absolute, 1000.0, 4};
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<uint8_t> payload = {'g', 'o', 'o', 'd'};
        BitSeq bits = frame_packet(payload);
        BitSeq three;
        for (int r = 0; r < 3; ++r) three.insert(three.end(), bits.begin(), bits.end());
        int64_t shift = static_cast<int64_t>(rng() % 10000000);
        auto events = ideal_events(three, 1000, shift);
        double t0 = sync_absolute_t0(events, cfg);
        BitSeq decoded = decode_absolute(events, cfg, t0, three.size() + 48);
        auto packets = deframe_bits(decoded, 4).packets;
        REQUIRE(packets.size() >= 3);
        for (size_t p = 0; p < 3; ++p) CHECK(packets[p].payload == payload);
    }
}

TEST_CASE("heatmap tallies events per pixel") {
    EventStream stream;
    stream.width = 4;
    stream.height = 3;
    CHECK(build_heatmap(stream).counts == std::vector<uint32_t>(12, 0));
    for (int i = 0; i < 5; ++i) stream.events.push_back(ev(i, Polarity::On, 2, 1));
    Heatmap hm = build_heatmap(stream);
    CHECK(hm.at(2, 1) == 5);
    CHECK(hm.at(0, 0) == 0);
}

namespace {

Heatmap blob_heatmap(uint16_t w, uint16_t h,
                     std::initializer_list<std::tuple<int, int, int, int, uint32_t>> blobs) {
    Heatmap hm;
    hm.width = w;
    hm.height = h;
    hm.counts.assign(static_cast<size_t>(w) * h, 0);
    for (auto& [x0, y0, x1, y1, c] : blobs)
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) hm.counts[static_cast<size_t>(y) * w + x] = c;
    return hm;
}

}  // namespace

TEST_CASE("a single 5x5 blob yields a tight box centered in the middle") {
    Heatmap hm = blob_heatmap(16, 16, {{4, 6, 8, 10, 100}});
    auto boxes = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].box == BoundingBox{4, 6, 8, 10});
    CHECK(boxes[0].center_x == 6);
    CHECK(boxes[0].center_y == 8);
}

TEST_CASE("well-separated blobs stay distinct components") {
    Heatmap hm = blob_heatmap(32, 16, {{2, 2, 6, 6, 80}, {12, 3, 16, 7, 120}});
    auto boxes = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(boxes.size() == 2);
    CHECK(boxes[0].box == BoundingBox{2, 2, 6, 6});
    CHECK(boxes[1].box == BoundingBox{12, 3, 16, 7});
}

TEST_CASE("morphology removes speckle noise") {
    Heatmap hm = blob_heatmap(32, 16, {{2, 2, 6, 6, 80}, {20, 8, 20, 8, 80}});
    auto boxes = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(boxes.size() == 1);  // the isolated pixel erodes away
    CHECK(boxes[0].box == BoundingBox{2, 2, 6, 6});
}

TEST_CASE("box extraction is invariant under uniform count scaling") {
    Heatmap hm = blob_heatmap(32, 16, {{2, 2, 6, 6, 7}, {12, 3, 16, 7, 11}});
    auto base = extract_channel_boxes(hm, 0.2, 1);
    for (auto& c : hm.counts) c *= 97;
    auto scaled = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(base.size() == scaled.size());
    for (size_t i = 0; i < base.size(); ++i) CHECK(base[i].box == scaled[i].box);
}

TEST_CASE("an all-zero heatmap raises a detection error") {
    Heatmap hm = blob_heatmap(8, 8, {});
    CHECK_THROWS_AS(extract_channel_boxes(hm, 0.2, 1), DetectionError);
}

TEST_CASE("even-sized boxes round the center toward the origin") {
    Heatmap hm = blob_heatmap(16, 16, {{4, 4, 7, 7, 50}});
    auto boxes = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].center_x == 5);
    CHECK(boxes[0].center_y == 5);
}

namespace {

// A tiny end-to-end mapping rig: channels broadcast their indices and the
// receiver rebuilds the map from the simulated recording.
struct MapRig {
    ChannelLayout layout;
    Footprints footprints;
    EventStream stream;
};

MapRig mapping_rig(uint32_t cols, uint32_t rows) {
    MapRig rig;
    rig.layout = build_layout(400, 400, 8, 1, cols, rows, 588.0);
    ProjectionModel model;
    model.camera_width = 96;
    model.camera_height = 96;
    model.transform = {8.0, 0.0, 0.0, 8.0, 4.0, 4.0};
    OpticalConfig optics;
    rig.footprints = project_channels(rig.layout, model, optics);
    FrameSchedule sched = mapping_schedule(rig.layout, 588.0, 0.5);
    SensorConfig sensor;
    sensor.theta_on = 1.5;
    sensor.theta_off = 1.65;
    rig.stream = simulate(sched, rig.footprints, optics, sensor).stream;
    return rig;
}

}  // namespace

TEST_CASE("map_channels recovers every index of a small grid") {
    MapRig rig = mapping_rig(5, 4);
    Heatmap hm = build_heatmap(rig.stream);
    auto boxes = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(boxes.size() == 20);
    ChannelMap map = map_channels(rig.stream, boxes, 588.0, 2, &rig.layout);
    CHECK(map.unresolved.empty());
    REQUIRE(map.channels.size() == 20);
    for (uint32_t i = 0; i < 20; ++i) {
        const MappedChannel* mc = map.find(i);
        REQUIRE(mc != nullptr);
        // The decoded index must sit on the true footprint of that channel.
        bool inside = false;
        for (const PixelCoord& p : rig.footprints.channels[i].pixels)
            inside |= (p.x == mc->center_x && p.y == mc->center_y);
        CHECK(inside);
    }
}

TEST_CASE("a dark box is reported unresolved while others map") {
    MapRig rig = mapping_rig(3, 1);
    Heatmap hm = build_heatmap(rig.stream);
    auto boxes = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(boxes.size() == 3);
    // Remove every event of the middle channel's center pixel.
    const BoxCenter* middle = nullptr;
    for (const auto& b : boxes)
        if (b.box.contains(rig.footprints.channels[1].pixels[0].x,
                           rig.footprints.channels[1].pixels[0].y))
            middle = &b;
    REQUIRE(middle != nullptr);
    EventStream pruned = rig.stream;
    std::erase_if(pruned.events, [&](const Event& e) {
        return e.x == middle->center_x && e.y == middle->center_y;
    });
    ChannelMap map = map_channels(pruned, boxes, 588.0, 2, &rig.layout);
    CHECK(map.channels.size() == 2);
    REQUIRE(map.unresolved.size() == 1);
    CHECK(map.unresolved[0] == middle->box);
}

TEST_CASE("duplicate decoded indices raise the ambiguity error") {
    MapRig rig = mapping_rig(2, 1);
    Heatmap hm = build_heatmap(rig.stream);
    auto boxes = extract_channel_boxes(hm, 0.2, 1);
    REQUIRE(boxes.size() == 2);
    // Copy channel 0's center events onto channel 1's center pixel.
    EventStream doubled = rig.stream;
    uint16_t from_x = boxes[0].center_x, from_y = boxes[0].center_y;
    uint16_t to_x = boxes[1].center_x, to_y = boxes[1].center_y;
    std::erase_if(doubled.events, [&](const Event& e) { return e.x == to_x && e.y == to_y; });
    std::vector<Event> copies;
    for (const Event& e : doubled.events)
        if (e.x == from_x && e.y == from_y) copies.push_back(ev(e.t, e.polarity, to_x, to_y));
    doubled.events.insert(doubled.events.end(), copies.begin(), copies.end());
    std::sort(doubled.events.begin(), doubled.events.end(),
              [](const Event& a, const Event& b) { return a.t < b.t; });
    auto run = [&] { return map_channels(doubled, boxes, 588.0, 2, &rig.layout); };
    CHECK_THROWS_AS(run(), MappingAmbiguityError);
}

TEST_CASE("decode_all is independent across channels") {
    // Build a two-channel ideal recording, decode, then corrupt channel 1's
    // pixels and check channel 0's bits are untouched.
    ChannelLayout layout = build_layout(400, 400, 8, 1, 2, 1, 1000.0);
    ProjectionModel model;
    model.camera_width = 48;
    model.camera_height = 24;
    model.transform = {8.0, 0.0, 0.0, 8.0, 4.0, 4.0};
    OpticalConfig optics;
    Footprints fp = project_channels(layout, model, optics);
    FrameSchedule sched = modulate(layout, fill_payloads(layout, {'h', 'i'}, 3));
    SensorConfig sensor;
    sensor.theta_on = 1.5;
    sensor.theta_off = 1.65;
    EventStream stream = simulate(sched, fp, optics, sensor).stream;

    ChannelMap map;
    for (uint32_t i = 0; i < 2; ++i) {
        MappedChannel mc;
        mc.id = layout.channel_id(i);
        const auto& px = fp.channels[i].pixels;
        mc.box = {px.front().x, px.front().y, px.back().x, px.back().y};
        mc.center_x = px[px.size() / 2].x;
        mc.center_y = px[px.size() / 2].y;
        map.channels.push_back(mc);
    }
    auto baseline = decode_all(stream, map, layout, DecodeMode::Relative, 2);
    REQUIRE(baseline.size() == 2);
    CHECK(baseline[0].packets.size() == 3);
    for (const Packet& p : baseline[0].packets)
        CHECK(p.payload == std::vector<uint8_t>{'h', 'i'});

    EventStream pruned = stream;
    std::erase_if(pruned.events,
                  [&](const Event& e) { return e.x == map.channels[1].center_x; });
    auto after = decode_all(pruned, map, layout, DecodeMode::Relative, 2);
    CHECK(after[0].bits == baseline[0].bits);
    CHECK(after[1].packets.empty());

    auto only_one = decode_all(stream, ChannelMap{{map.channels[0]}, {}}, layout,
                               DecodeMode::Relative, 2);
    CHECK(only_one.size() == 1);
}
