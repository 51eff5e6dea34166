#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "selene/core.hpp"

using namespace selene;

namespace {

BitSeq bits_of(const std::string& s) {
    BitSeq b;
    for (char c : s) {
        if (c == '0') b.push_back(0);
        else if (c == '1') b.push_back(1);
    }
    return b;
}

std::vector<uint8_t> bytes(const std::string& s) {
    return std::vector<uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_CASE("frame_packet encodes STX, MSB-first payload, ETX") {
    BitSeq good = frame_packet(bytes("good"));
    CHECK(good.size() == 48);
    CHECK(good == bits_of("01010101"
                          "01100111 01101111 01101111 01100100"
                          "00001111"));

    CHECK(frame_packet({0x00}) == bits_of("01010101 00000000 00001111"));
    CHECK(frame_packet({0xFF, 0x00}) ==
          bits_of("01010101 11111111 00000000 00001111"));
    CHECK_THROWS_AS(frame_packet({}), std::invalid_argument);
}

TEST_CASE("deframe_bits recovers a framed packet exactly") {
    BitSeq bits = frame_packet(bytes("good"));
    DeframeResult r = deframe_bits(bits, 4);
    REQUIRE(r.packets.size() == 1);
    CHECK(r.packets[0].payload == bytes("good"));
    CHECK(r.residual_bits == 0);
}

TEST_CASE("deframe_bits survives any 8-bit noise prefix") {
    // Exhaustive over all 256 prefixes: none can form a spurious full match
    // ahead of the true packet, so the payload always comes back.
    BitSeq packet = frame_packet(bytes("good"));
    for (int prefix = 0; prefix < 256; ++prefix) {
        BitSeq bits;
        append_byte_msb(bits, static_cast<uint8_t>(prefix));
        bits.insert(bits.end(), packet.begin(), packet.end());
        DeframeResult r = deframe_bits(bits, 4);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0].payload == bytes("good"));
    }
}

TEST_CASE("deframe_bits rejects a corrupted ETX") {
    BitSeq bits = frame_packet(bytes("good"));
    bits[47] = 0;  // last ETX bit
    CHECK(deframe_bits(bits, 4).packets.empty());
}

TEST_CASE("frame/deframe roundtrip for payload lengths 1..64") {
    std::mt19937_64 rng(7);
    for (size_t len = 1; len <= 64; ++len) {
        std::vector<uint8_t> payload(len);
        for (auto& b : payload) b = static_cast<uint8_t>(rng());
        DeframeResult r = deframe_bits(frame_packet(payload), len);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0].payload == payload);
        CHECK(r.residual_bits == 0);
    }
}

TEST_CASE("build_layout accepts the full-array configuration") {
    ChannelLayout layout = build_layout(912, 1140, 8, 1, 57, 35);
    CHECK(layout.channel_count() == 1995);
    CHECK(layout.pitch() == 16);
    CHECK(layout.central_count() == 0);

    ChannelLayout one = build_layout(16, 16, 8, 1, 1, 1);
    CHECK(one.channel_count() == 1);

    CHECK_THROWS_WITH_AS(build_layout(912, 1140, 8, 1, 58, 35),
                         doctest::Contains("grid width"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(build_layout(912, 556, 8, 1, 57, 35),
                         doctest::Contains("grid height"), std::invalid_argument);
}

TEST_CASE("build_layout never places a block outside the mirror array") {
    for (uint32_t g : {0u, 1u, 2u}) {
        for (uint32_t m : {4u, 8u}) {
            for (uint32_t cols = 1; cols <= 12; ++cols) {
                for (uint32_t rows = 1; rows <= 12; ++rows) {
                    uint32_t pitch = m * (1 + g);
                    ChannelLayout layout;
                    try {
                        layout = build_layout(100, 120, m, g, cols, rows);
                    } catch (const std::invalid_argument&) {
                        // Rejected layouts must genuinely overflow.
                        CHECK((cols * pitch > 100 || rows * pitch > 120));
                        continue;
                    }
                    for (uint32_t i = 0; i < layout.channel_count(); ++i) {
                        uint32_t gx = i % cols, gy = i / cols;
                        CHECK(gx * pitch + m <= 100);
                        CHECK(gy * pitch + m <= 120);
                    }
                }
            }
        }
    }
}

TEST_CASE("channel coordinates center on the grid") {
    ChannelLayout layout = build_layout(912, 1140, 8, 1, 57, 35);
    ChannelId center = layout.channel_id(17 * 57 + 28);
    CHECK(center.cx_half == 0);
    CHECK(center.cy_half == 0);
    ChannelId corner = layout.channel_id(0);
    CHECK(corner.cx_half == -56);
    CHECK(corner.cy_half == -34);

    // Even grid: coordinates are odd half-units around the midpoint.
    ChannelLayout even = build_layout(64, 64, 8, 1, 4, 4);
    CHECK(even.channel_id(0).cx_half == -3);
    CHECK(even.channel_id(3).cx_half == 3);
}

namespace {

// Brute-force lattice count fixing the boundary convention of the central
// disc: inclusive distance on the 57x35 grid with d = 15 must give 709.
int lattice_count(int half_cols, int half_rows, double d, bool inclusive) {
    int count = 0;
    for (int x = -half_cols; x <= half_cols; ++x) {
        for (int y = -half_rows; y <= half_rows; ++y) {
            double r = std::sqrt(static_cast<double>(x) * x + static_cast<double>(y) * y);
            if (inclusive ? r <= d : r < d) ++count;
        }
    }
    return count;
}

}  // namespace

TEST_CASE("central disc convention: inclusive reproduces 709 on 57x35, strict does not") {
    CHECK(lattice_count(28, 17, 15.0, true) == 709);
    CHECK(lattice_count(28, 17, 15.0, false) == 697);
}

TEST_CASE("classify_rates d=15 on 57x35 yields 709 central / 1286 peripheral") {
    ChannelLayout layout = build_layout(912, 1140, 8, 1, 57, 35);
    ChannelLayout dual = classify_rates(layout, 15.0, 2000.0, 1000.0);
    CHECK(dual.central_count() == 709);
    CHECK(dual.peripheral_count() == 1286);
    CHECK(dual.f_c == 2000.0);
    CHECK(dual.f_p == 1000.0);

    ChannelLayout none = classify_rates(layout, 0.0, 2000.0, 1000.0);
    CHECK(none.central_count() == 0);

    ChannelLayout all = classify_rates(layout, 100.0, 2000.0, 1000.0);
    CHECK(all.central_count() == 1995);
}

TEST_CASE("classify_rates partitions and grows monotonically with d") {
    ChannelLayout layout = build_layout(912, 1140, 8, 1, 57, 35);
    uint32_t prev = 0;
    for (int d = 0; d <= 40; ++d) {
        ChannelLayout c = classify_rates(layout, d, 1000.0, 500.0);
        CHECK(c.central_count() + c.peripheral_count() == 1995);
        CHECK(c.central_count() >= prev);
        prev = c.central_count();
    }
}

TEST_CASE("classify_rates matches the lattice oracle for every radius") {
    ChannelLayout layout = build_layout(912, 1140, 8, 1, 57, 35);
    for (double d : {1.0, 2.5, 7.0, 15.0, 17.0, 28.0}) {
        ChannelLayout c = classify_rates(layout, d, 1000.0, 500.0);
        int expected = 0;
        for (int x = -28; x <= 28; ++x)
            for (int y = -17; y <= 17; ++y)
                if (std::sqrt(static_cast<double>(x) * x + y * y) <= d) ++expected;
        CHECK(c.central_count() == static_cast<uint32_t>(expected));
    }
}

TEST_CASE("data_rate arithmetic") {
    ChannelLayout one = build_layout(16, 16, 8, 1, 1, 1, 1000.0);
    CHECK(data_rate(one, 2) == 1000.0);

    ChannelLayout full = build_layout(912, 1140, 8, 1, 57, 35, 1000.0);
    CHECK(data_rate(full, 2) == 1995000.0);

    // Dual form with f_p = f_c / 2 collapses to 1352 * f_c.
    for (double f_c : {1000.0, 1191.0, 2000.0}) {
        ChannelLayout dual = classify_rates(full, 15.0, f_c, f_c / 2.0);
        CHECK(data_rate(dual, 2) == 1352.0 * f_c);
    }
    // Smallest integer f_c reaching 1.61 Mbps.
    CHECK(1352.0 * 1191.0 >= 1.61e6);
    CHECK(1352.0 * 1190.0 < 1.61e6);

    CHECK_THROWS_AS(data_rate(one, 1), std::invalid_argument);
}

TEST_CASE("data_rate is linear in N and dual reduces to single when rates match") {
    for (uint32_t n : {1u, 2u, 5u, 12u}) {
        ChannelLayout layout = build_layout(400, 400, 8, 1, n, 1, 777.0);
        CHECK(data_rate(layout, 2) == doctest::Approx(777.0 * n));
        CHECK(data_rate(layout, 4) == doctest::Approx(2.0 * 777.0 * n));
    }
    ChannelLayout grid = build_layout(912, 1140, 8, 1, 57, 35);
    ChannelLayout same = classify_rates(grid, 15.0, 640.0, 640.0);
    ChannelLayout single = classify_rates(grid, 0.0, 640.0, 640.0);
    CHECK(data_rate(same, 2) == data_rate(single, 2));
}
