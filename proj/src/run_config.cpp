#include "selene/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "selene/io.hpp"

namespace selene {

namespace {

struct KeyValue {
    std::string value;
    bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, KeyValue>>;

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Sections parse_sections(const std::string& text, const std::string& origin) {
    Sections sections;
    std::istringstream in(text);
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside a section");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!sections[section].emplace(key, KeyValue{value, false}).second)
            throw ConfigError(origin + ": duplicate key " + section + "." + key);
    }
    return sections;
}

class Reader {
  public:
    Reader(Sections& sections, std::string origin)
        : sections_(sections), origin_(std::move(origin)) {}

    bool has(const std::string& section, const std::string& key) {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto k = s->second.find(key);
        if (k == s->second.end()) return fallback;
        k->second.used = true;
        return k->second.value;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) {
        std::string v = get_string(section, key, "");
        if (v.empty()) return fallback;
        try {
            size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": " + section + "." + key + ": not a number: " + v);
        }
    }

    int64_t get_int(const std::string& section, const std::string& key, int64_t fallback) {
        std::string v = get_string(section, key, "");
        if (v.empty()) return fallback;
        try {
            size_t pos = 0;
            long long i = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return i;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": " + section + "." + key + ": not an integer: " + v);
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) {
        std::string v = get_string(section, key, "");
        if (v.empty()) return fallback;
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError(origin_ + ": " + section + "." + key + ": not a boolean: " + v);
    }

    void reject_unknown() {
        for (const auto& [section, keys] : sections_)
            for (const auto& [key, kv] : keys)
                if (!kv.used)
                    throw ConfigError(origin_ + ": unknown key " + section + "." + key);
    }

  private:
    Sections& sections_;
    std::string origin_;
};

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
    Sections sections = parse_sections(text, origin);
    Reader r(sections, origin);
    RunConfig cfg;
    TrialConfig& t = cfg.trial;

    uint32_t mirror_cols = static_cast<uint32_t>(r.get_int("layout", "mirror_cols", 912));
    uint32_t mirror_rows = static_cast<uint32_t>(r.get_int("layout", "mirror_rows", 1140));
    uint32_t block = static_cast<uint32_t>(r.get_int("layout", "block", 8));
    uint32_t guard = static_cast<uint32_t>(r.get_int("layout", "guard", 1));
    uint32_t grid_cols = static_cast<uint32_t>(r.get_int("layout", "grid_cols", 57));
    uint32_t grid_rows = static_cast<uint32_t>(r.get_int("layout", "grid_rows", 35));

    double f_c = r.get_double("rates", "fc_hz", 588.0);
    double f_p = r.get_double("rates", "fp_hz", 588.0);
    double d = r.get_double("rates", "central_radius", 0.0);

    try {
        ChannelLayout layout =
            build_layout(mirror_cols, mirror_rows, block, guard, grid_cols, grid_rows, f_p);
        t.layout = classify_rates(layout, d, f_c, f_p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    t.optics.ambient_lux = r.get_double("optics", "ambient_lux", 0.0);
    t.optics.channel_on_lux = r.get_double("optics", "on_lux", 100.0);
    t.optics.attenuation = r.get_double("optics", "attenuation", 1.0);
    t.optics.footprint_margin = r.get_double("optics", "footprint_margin", 0.0);
    t.optics.crosstalk_frac = r.get_double("optics", "crosstalk", 0.0);
    if (t.optics.ambient_lux < 0.0)
        throw ConfigError(origin + ": optics.ambient_lux must be >= 0");
    if (!(t.optics.attenuation > 0.0) || t.optics.attenuation > 1.0)
        throw ConfigError(origin + ": optics.attenuation must be in (0,1]");
    if (t.optics.footprint_margin < 0.0 || t.optics.footprint_margin >= 1.0)
        throw ConfigError(origin + ": optics.footprint_margin must be in [0,1)");
    if (!(t.optics.channel_on_lux * t.optics.attenuation > 0.0))
        throw ConfigError(origin + ": optics.on_lux * attenuation must be positive");

    t.projection.camera_width = static_cast<uint16_t>(r.get_int("optics", "camera_width", 640));
    t.projection.camera_height =
        static_cast<uint16_t>(r.get_int("optics", "camera_height", 480));
    {
        std::string tf = r.get_string("optics", "transform", "");
        if (!tf.empty()) {
            std::istringstream ts(tf);
            AffineTransform& a = t.projection.transform;
            if (!(ts >> a.a >> a.b >> a.c >> a.d >> a.tx >> a.ty))
                throw ConfigError(origin + ": optics.transform needs 6 numbers: a b c d tx ty");
            std::string rest;
            if (ts >> rest)
                throw ConfigError(origin + ": optics.transform has trailing data: " + rest);
        } else {
            // Default: uniform scale centering the grid on the camera.
            double sx = static_cast<double>(t.projection.camera_width) / (grid_cols + 2);
            double sy = static_cast<double>(t.projection.camera_height) / (grid_rows + 2);
            double s = std::min(sx, sy);
            AffineTransform& a = t.projection.transform;
            a = {};
            a.a = a.d = s;
            a.tx = (t.projection.camera_width - s * grid_cols) / 2.0;
            a.ty = (t.projection.camera_height - s * grid_rows) / 2.0;
        }
        if (t.projection.transform.determinant() == 0.0)
            throw ConfigError(origin + ": optics.transform is singular");
    }

    t.sensor.theta_on = r.get_double("sensor", "theta_on", 0.2);
    t.sensor.theta_off = r.get_double("sensor", "theta_off", 0.22);
    if (!(t.sensor.theta_on > 0.0) || !(t.sensor.theta_off > 0.0))
        throw ConfigError(origin + ": sensor thresholds must be positive");
    t.sensor.i_dark = r.get_double("sensor", "i_dark", 10.0);
    if (t.sensor.i_dark < 0.0) throw ConfigError(origin + ": sensor.i_dark must be >= 0");
    t.sensor.dup_spacing_us = r.get_int("sensor", "dup_spacing_us", 100);
    t.sensor.base_delay_us = r.get_double("sensor", "base_delay_us", 0.0);
    t.sensor.radial_delay_us_per_px = r.get_double("sensor", "radial_delay_us_per_px", 0.0);
    t.sensor.readout_bandwidth = r.get_double("sensor", "bandwidth_eps", 1e12);
    if (!(t.sensor.readout_bandwidth > 0.0))
        throw ConfigError(origin + ": sensor.bandwidth_eps must be positive");
    t.sensor.queue_capacity =
        static_cast<uint64_t>(r.get_int("sensor", "queue_capacity", 1ll << 40));
    if (t.sensor.queue_capacity < 1)
        throw ConfigError(origin + ": sensor.queue_capacity must be >= 1");
    t.sensor.noise_rate = r.get_double("sensor", "noise_rate", 0.0);
    if (t.sensor.noise_rate < 0.0)
        throw ConfigError(origin + ": sensor.noise_rate must be >= 0");
    t.sensor.optical_center_x = r.get_double("sensor", "optical_center_x", -1.0);
    t.sensor.optical_center_y = r.get_double("sensor", "optical_center_y", -1.0);
    t.sensor.carry_residual = r.get_bool("sensor", "carry_residual", false);

    std::string payload = r.get_string("traffic", "payload", "good");
    if (payload.empty()) throw ConfigError(origin + ": traffic.payload must not be empty");
    t.payload.assign(payload.begin(), payload.end());
    int64_t ppc = r.get_int("traffic", "packets_per_channel", 30);
    if (ppc < 1) throw ConfigError(origin + ": traffic.packets_per_channel must be >= 1");
    t.packets_per_channel = static_cast<uint32_t>(ppc);
    t.mapping_rate_hz = r.get_double("traffic", "mapping_rate_hz", 588.0);
    if (!(t.mapping_rate_hz > 0.0))
        throw ConfigError(origin + ": traffic.mapping_rate_hz must be positive");
    t.mapping_seconds = r.get_double("traffic", "mapping_seconds", 1.0);
    if (t.mapping_seconds < 0.0)
        throw ConfigError(origin + ": traffic.mapping_seconds must be >= 0");

    std::string mode = r.get_string("decode", "mode", "relative");
    if (mode == "relative") {
        t.mode = DecodeMode::Relative;
    } else if (mode == "absolute") {
        t.mode = DecodeMode::Absolute;
    } else {
        throw ConfigError(origin + ": decode.mode must be absolute or relative");
    }
    t.binarize_frac = r.get_double("decode", "binarize_frac", 0.2);
    if (t.binarize_frac <= 0.0 || t.binarize_frac >= 1.0)
        throw ConfigError(origin + ": decode.binarize_frac must be in (0,1)");
    int64_t mr = r.get_int("decode", "morph_radius", 1);
    if (mr < 0 || mr > 64) throw ConfigError(origin + ": decode.morph_radius out of range");
    t.morph_radius = static_cast<int>(mr);

    int64_t seed = r.get_int("run", "seed", 1);
    if (const char* env = std::getenv("SELENE_SEED")) {
        try {
            seed = std::stoll(env);
        } catch (const std::exception&) {
            throw ConfigError("SELENE_SEED: not an integer: " + std::string(env));
        }
    }
    t.sensor.rng_seed = static_cast<uint64_t>(seed);
    t.map_seed = t.sensor.rng_seed;

    std::string fmt = r.get_string("run", "event_format", "text");
    if (fmt == "text") {
        cfg.event_format = EventFileFormat::Text;
    } else if (fmt == "binary") {
        cfg.event_format = EventFileFormat::Binary;
    } else {
        throw ConfigError(origin + ": run.event_format must be text or binary");
    }

    r.reject_unknown();
    return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

}  // namespace selene
