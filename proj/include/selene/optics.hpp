#pragma once

#include <cstdint>
#include <vector>

#include "selene/core.hpp"
#include "selene/modulate.hpp"

namespace selene {

// 2D affine map from channel-grid coordinates (one unit per channel pitch)
// to camera pixel coordinates: (x, y) -> (a*x + b*y + tx, c*x + d*y + ty).
struct AffineTransform {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    double tx = 0.0, ty = 0.0;

    double determinant() const { return a * d - b * c; }
    void apply(double x, double y, double& px, double& py) const {
        px = a * x + b * y + tx;
        py = c * x + d * y + ty;
    }
    static AffineTransform scale_rotate_translate(double scale_x, double scale_y,
                                                  double angle_rad,
                                                  double tx, double ty);
};

struct ProjectionModel {
    AffineTransform transform;
    uint16_t camera_width = 0;
    uint16_t camera_height = 0;
};

struct OpticalConfig {
    double ambient_lux = 0.0;
    double channel_on_lux = 100.0;
    double attenuation = 1.0;        // (0, 1]
    double footprint_margin = 0.0;   // [0, 1), shrinks the lit block
    double crosstalk_frac = 0.0;     // leakage onto the 1-pixel ring, uncalibrated
};

struct PixelCoord {
    uint16_t x = 0;
    uint16_t y = 0;

    bool operator==(const PixelCoord&) const = default;
};

struct ChannelFootprint {
    uint32_t channel_index = 0;
    std::vector<PixelCoord> pixels;  // lit pixels, disjoint across channels
    std::vector<PixelCoord> ring;    // 1-pixel border, crosstalk target
};

struct Footprints {
    std::vector<ChannelFootprint> channels;
    uint16_t camera_width = 0;
    uint16_t camera_height = 0;
};

// Piecewise-constant illuminance at one pixel; the value of each step holds
// until the next step, the last one until t_end.
struct TraceStep {
    int64_t t = 0;
    double lux = 0.0;

    bool operator==(const TraceStep&) const = default;
};

struct PixelTrace {
    uint16_t x = 0;
    uint16_t y = 0;
    std::vector<TraceStep> steps;  // first step at t = 0, times strictly increasing
    int64_t t_end = 0;
};

// Maps every channel block (shrunk by footprint_margin) through the transform
// and rasterizes to pixel-center sets, clipped to camera bounds. Throws if two
// channels rasterize onto a shared pixel.
Footprints project_channels(const ChannelLayout& layout, const ProjectionModel& model,
                            const OpticalConfig& optics);

// One trace per camera pixel: footprint pixels follow their channel's state,
// ring pixels receive the crosstalk fraction, everything else sits at ambient.
std::vector<PixelTrace> render_traces(const FrameSchedule& schedule,
                                      const Footprints& footprints,
                                      const OpticalConfig& optics);

// Trace shared by every pixel of one channel footprint (uniform illuminance
// within the block). Used by render_traces and by the event simulator.
std::vector<TraceStep> channel_lux_steps(const FrameSchedule& schedule,
                                         uint32_t channel_index,
                                         const OpticalConfig& optics, double gain);

}  // namespace selene
