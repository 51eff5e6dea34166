#include "selene/optics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selene {

AffineTransform AffineTransform::scale_rotate_translate(double scale_x, double scale_y,
                                                        double angle_rad,
                                                        double tx, double ty) {
    AffineTransform t;
    double cs = std::cos(angle_rad), sn = std::sin(angle_rad);
    t.a = cs * scale_x;
    t.b = -sn * scale_y;
    t.c = sn * scale_x;
    t.d = cs * scale_y;
    t.tx = tx;
    t.ty = ty;
    return t;
}

namespace {

struct Quad {
    double px[4];
    double py[4];
};

using Poly = std::vector<std::pair<double, double>>;

// Sutherland-Hodgman clip against one half-plane keep(x, y) >= 0.
template <typename F>
Poly clip_half_plane(const Poly& poly, F&& keep) {
    Poly out;
    for (size_t i = 0; i < poly.size(); ++i) {
        auto [x1, y1] = poly[i];
        auto [x2, y2] = poly[(i + 1) % poly.size()];
        double d1 = keep(x1, y1), d2 = keep(x2, y2);
        if (d1 >= 0.0) out.push_back({x1, y1});
        if ((d1 > 0.0) != (d2 > 0.0) && d1 != d2) {
            double t = d1 / (d1 - d2);
            out.push_back({x1 + t * (x2 - x1), y1 + t * (y2 - y1)});
        }
    }
    return out;
}

double polygon_area(const Poly& poly) {
    double a = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        auto [x1, y1] = poly[i];
        auto [x2, y2] = poly[(i + 1) % poly.size()];
        a += x1 * y2 - x2 * y1;
    }
    return std::abs(a) / 2.0;
}

// Overlap area of the quad with the unit pixel square at (px, py).
double quad_pixel_area(const Quad& q, int px, int py) {
    Poly poly = {{q.px[0], q.py[0]}, {q.px[1], q.py[1]}, {q.px[2], q.py[2]},
                 {q.px[3], q.py[3]}};
    poly = clip_half_plane(poly, [&](double x, double) { return x - px; });
    if (poly.empty()) return 0.0;
    poly = clip_half_plane(poly, [&](double x, double) { return px + 1.0 - x; });
    if (poly.empty()) return 0.0;
    poly = clip_half_plane(poly, [&](double, double y) { return y - py; });
    if (poly.empty()) return 0.0;
    poly = clip_half_plane(poly, [&](double, double y) { return py + 1.0 - y; });
    if (poly.size() < 3) return 0.0;
    return polygon_area(poly);
}

std::vector<TraceStep> lux_steps_from_transitions(const std::vector<Transition>& ts,
                                                  const OpticalConfig& optics,
                                                  double gain) {
    const double on_add = optics.channel_on_lux * optics.attenuation * gain;
    std::vector<TraceStep> steps;
    steps.push_back({0, optics.ambient_lux});
    for (const Transition& tr : ts) {
        double lux = optics.ambient_lux + (tr.on ? on_add : 0.0);
        if (tr.t == steps.back().t)
            steps.back().lux = lux;
        else
            steps.push_back({tr.t, lux});
    }
    return steps;
}

}  // namespace

Footprints project_channels(const ChannelLayout& layout, const ProjectionModel& model,
                            const OpticalConfig& optics) {
    if (model.transform.determinant() == 0.0)
        throw std::invalid_argument("project_channels: singular transform");
    if (optics.footprint_margin < 0.0 || optics.footprint_margin >= 1.0)
        throw std::invalid_argument("project_channels: footprint_margin outside [0,1)");
    const uint32_t n = layout.channel_count();
    const double block_frac = 1.0 / (1.0 + layout.guard);
    const double side = block_frac * (1.0 - optics.footprint_margin);
    const double inset = (block_frac - side) / 2.0;

    Footprints fp;
    fp.camera_width = model.camera_width;
    fp.camera_height = model.camera_height;
    fp.channels.resize(n);

    // Pixel ownership for the disjointness check; -1 = free.
    std::vector<int32_t> owner(static_cast<size_t>(model.camera_width) * model.camera_height,
                               -1);
    auto at = [&](uint16_t x, uint16_t y) -> int32_t& {
        return owner[static_cast<size_t>(y) * model.camera_width + x];
    };

    for (uint32_t i = 0; i < n; ++i) {
        double gx = i % layout.grid_cols;
        double gy = i / layout.grid_cols;
        double x0 = gx + inset, y0 = gy + inset;
        double x1 = x0 + side, y1 = y0 + side;
        Quad q;
        model.transform.apply(x0, y0, q.px[0], q.py[0]);
        model.transform.apply(x1, y0, q.px[1], q.py[1]);
        model.transform.apply(x1, y1, q.px[2], q.py[2]);
        model.transform.apply(x0, y1, q.px[3], q.py[3]);

        double min_x = *std::min_element(q.px, q.px + 4);
        double max_x = *std::max_element(q.px, q.px + 4);
        double min_y = *std::min_element(q.py, q.py + 4);
        double max_y = *std::max_element(q.py, q.py + 4);
        int lo_x = std::max(0, static_cast<int>(std::floor(min_x)));
        int hi_x = std::min<int>(model.camera_width - 1, static_cast<int>(std::ceil(max_x)));
        int lo_y = std::max(0, static_cast<int>(std::floor(min_y)));
        int hi_y = std::min<int>(model.camera_height - 1, static_cast<int>(std::ceil(max_y)));

        // A pixel belongs to the footprint when the block covers a positive
        // share of its area; guard gaps narrower than one pixel make
        // neighboring blocks claim the same pixel, which is the merge error.
        constexpr double kMinArea = 1e-9;
        ChannelFootprint& cf = fp.channels[i];
        cf.channel_index = i;
        for (int py = lo_y; py <= hi_y; ++py) {
            for (int px = lo_x; px <= hi_x; ++px) {
                if (quad_pixel_area(q, px, py) <= kMinArea) continue;
                int32_t& cell = at(static_cast<uint16_t>(px), static_cast<uint16_t>(py));
                if (cell >= 0)
                    throw std::runtime_error(
                        "project_channels: projection scale too small / channels merge "
                        "(channels " + std::to_string(cell) + " and " + std::to_string(i) +
                        " share pixel " + std::to_string(px) + "," + std::to_string(py) + ")");
                cell = static_cast<int32_t>(i);
                cf.pixels.push_back({static_cast<uint16_t>(px), static_cast<uint16_t>(py)});
            }
        }
    }

    // 1-pixel ring around each footprint, excluding any channel's lit pixels.
    for (ChannelFootprint& cf : fp.channels) {
        std::vector<PixelCoord> ring;
        for (const PixelCoord& p : cf.pixels) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = p.x + dx, ny = p.y + dy;
                    if (nx < 0 || ny < 0 || nx >= model.camera_width ||
                        ny >= model.camera_height)
                        continue;
                    if (at(static_cast<uint16_t>(nx), static_cast<uint16_t>(ny)) >= 0)
                        continue;
                    ring.push_back({static_cast<uint16_t>(nx), static_cast<uint16_t>(ny)});
                }
            }
        }
        std::sort(ring.begin(), ring.end(), [](const PixelCoord& a, const PixelCoord& b) {
            return a.y != b.y ? a.y < b.y : a.x < b.x;
        });
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
        cf.ring = std::move(ring);
    }
    return fp;
}

std::vector<TraceStep> channel_lux_steps(const FrameSchedule& schedule,
                                         uint32_t channel_index,
                                         const OpticalConfig& optics, double gain) {
    std::vector<Transition> ts;
    for (const Transition& tr : schedule.transitions)
        if (tr.channel_index == channel_index) ts.push_back(tr);
    return lux_steps_from_transitions(ts, optics, gain);
}

std::vector<PixelTrace> render_traces(const FrameSchedule& schedule,
                                      const Footprints& footprints,
                                      const OpticalConfig& optics) {
    const size_t total =
        static_cast<size_t>(footprints.camera_width) * footprints.camera_height;
    std::vector<std::vector<Transition>> by_channel(footprints.channels.size());
    for (const Transition& tr : schedule.transitions)
        by_channel[tr.channel_index].push_back(tr);

    struct Contribution {
        uint32_t channel;
        double gain;
    };
    std::vector<std::vector<Contribution>> contrib(total);
    auto idx = [&](const PixelCoord& p) {
        return static_cast<size_t>(p.y) * footprints.camera_width + p.x;
    };
    for (const ChannelFootprint& cf : footprints.channels) {
        for (const PixelCoord& p : cf.pixels) contrib[idx(p)].push_back({cf.channel_index, 1.0});
        if (optics.crosstalk_frac > 0.0)
            for (const PixelCoord& p : cf.ring)
                contrib[idx(p)].push_back({cf.channel_index, optics.crosstalk_frac});
    }

    // Single-contributor step vectors are shared per channel.
    std::vector<std::vector<TraceStep>> channel_steps(footprints.channels.size());
    for (size_t c = 0; c < footprints.channels.size(); ++c)
        channel_steps[c] = lux_steps_from_transitions(by_channel[c], optics, 1.0);

    std::vector<PixelTrace> traces(total);
    for (uint16_t y = 0; y < footprints.camera_height; ++y) {
        for (uint16_t x = 0; x < footprints.camera_width; ++x) {
            size_t i = static_cast<size_t>(y) * footprints.camera_width + x;
            PixelTrace& tr = traces[i];
            tr.x = x;
            tr.y = y;
            tr.t_end = schedule.duration_us;
            const auto& cs = contrib[i];
            if (cs.empty()) {
                tr.steps.push_back({0, optics.ambient_lux});
            } else if (cs.size() == 1 && cs[0].gain == 1.0) {
                tr.steps = channel_steps[cs[0].channel];
            } else {
                const double atten = optics.channel_on_lux * optics.attenuation;
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
            }
        }
    }
    return traces;
}

}  // namespace selene
