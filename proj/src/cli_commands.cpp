#include "selene/cli_commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace selene::cli {

namespace {

int classify_exception(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
    if (dynamic_cast<const IoError*>(&e)) return kIoError;
    if (dynamic_cast<const DetectionError*>(&e)) return kDetectionFailure;
    if (dynamic_cast<const MappingAmbiguityError*>(&e)) return kMappingAmbiguity;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return kConfigError;
    return 1;
}

std::string format_number(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

int cmd_layout(const std::string& config_path, std::ostream& out, std::ostream& err) {
    try {
        RunConfig cfg = RunConfig::load_file(config_path);
        const ChannelLayout& layout = cfg.trial.layout;
        out << "N=" << layout.channel_count() << " central=" << layout.central_count()
            << " peripheral=" << layout.peripheral_count() << "\n";
        out << "fc_hz=" << layout.f_c << " fp_hz=" << layout.f_p
            << " data_rate_bps=" << format_number(data_rate(layout, 2)) << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& phase, std::ostream& err) {
    try {
        RunConfig cfg = RunConfig::load_file(config_path);
        const TrialConfig& t = cfg.trial;
        if (phase != "data" && phase != "mapping")
            throw ConfigError("simulate: phase must be data or mapping, got " + phase);
        Footprints fp = project_channels(t.layout, t.projection, t.optics);
        FrameSchedule sched;
        if (phase == "mapping") {
            sched = mapping_schedule(t.layout, t.mapping_rate_hz, t.mapping_seconds);
        } else {
            sched = modulate(t.layout,
                             fill_payloads(t.layout, t.payload, t.packets_per_channel));
        }
        SensorConfig sensor = t.sensor;
        if (phase == "mapping") sensor.rng_seed = t.map_seed;
        SimResult sim = simulate(sched, fp, t.optics, sensor);
        write_event_file(out_path, sim.stream, cfg.event_format);
        err << "events=" << sim.stats.emitted << " generated=" << sim.stats.generated
            << " duplicates=" << sim.stats.duplicates << " noise=" << sim.stats.noise_events
            << " dropped=" << sim.stats.dropped << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

int cmd_map(const std::string& events_path, const std::string& config_path,
            const std::string& out_path, std::ostream& err) {
    try {
        RunConfig cfg = RunConfig::load_file(config_path);
        EventStream stream = read_event_file(events_path);
        Heatmap hm = build_heatmap(stream);
        std::vector<BoxCenter> boxes =
            extract_channel_boxes(hm, cfg.trial.binarize_frac, cfg.trial.morph_radius);
        ChannelMap map = map_channels(stream, boxes, cfg.trial.mapping_rate_hz, 2,
                                      &cfg.trial.layout);
        write_map_file(out_path, map);
        err << "mapped=" << map.channels.size() << " unresolved=" << map.unresolved.size()
            << "\n";
        for (const BoundingBox& b : map.unresolved)
            err << "warning: unresolved box " << b.x0 << "," << b.y0 << ".." << b.x1 << ","
                << b.y1 << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

int cmd_decode(const std::string& events_path, const std::string& map_path,
               const std::string& config_path, const std::string& out_path,
               std::ostream& err) {
    try {
        RunConfig cfg = RunConfig::load_file(config_path);
        EventStream stream = read_event_file(events_path);
        ChannelMap map = read_map_file(map_path, &cfg.trial.layout);
        std::vector<DecodedChannel> decoded = decode_all(
            stream, map, cfg.trial.layout, cfg.trial.mode, cfg.trial.payload.size());
        std::ostringstream buf;
        static const char* hex = "0123456789abcdef";
        for (const DecodedChannel& dc : decoded) {
            buf << dc.index << '\t' << dc.packets.size() << '\t';
            for (size_t p = 0; p < dc.packets.size(); ++p) {
                if (p) buf << ' ';
                for (uint8_t byte : dc.packets[p].payload)
                    buf << hex[byte >> 4] << hex[byte & 0xF];
            }
            buf << "\n";
        }
        atomic_write(out_path, buf.str());
        return kOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

int cmd_eval(const std::string& config_path, const std::string& out_csv, std::ostream& err) {
    try {
        RunConfig cfg = RunConfig::load_file(config_path);
        TrialResult res = run_trial(cfg.trial);
        std::ostringstream buf;
        write_csv_header(buf);
        write_csv_row(buf, "single", format_number(cfg.trial.layout.f_c), res);
        atomic_write(out_csv, buf.str());
        err << "ber=" << res.mean_ber << " valid_frac=" << res.valid_fraction
            << " undef=" << res.undefined_channels << " bps=" << res.bps << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

int cmd_sweep(const std::string& config_path, const std::string& variable,
              const std::vector<double>& values, bool both_modes,
              const std::string& out_csv, std::ostream& err) {
    try {
        RunConfig cfg = RunConfig::load_file(config_path);
        SweepVariable var;
        if (variable == "refresh_rate") var = SweepVariable::RefreshRate;
        else if (variable == "channel_count") var = SweepVariable::ChannelCount;
        else if (variable == "decoder_mode") var = SweepVariable::DecoderMode;
        else if (variable == "bandwidth") var = SweepVariable::Bandwidth;
        else if (variable == "ambient") var = SweepVariable::Ambient;
        else throw ConfigError("sweep: unknown variable " + variable);
        if (values.empty()) throw ConfigError("sweep: empty value grid");

        std::ostringstream buf;
        write_csv_header(buf);
        std::vector<DecodeMode> modes = {cfg.trial.mode};
        if (both_modes) modes = {DecodeMode::Absolute, DecodeMode::Relative};
        for (DecodeMode mode : modes) {
            TrialConfig base = cfg.trial;
            base.mode = mode;
            std::vector<SweepPoint> points = sweep(var, values, base);
            for (const SweepPoint& pt : points) {
                if (pt.result) {
                    write_csv_row(buf, variable, format_number(pt.value), *pt.result);
                } else {
                    write_csv_error_row(buf, variable, format_number(pt.value), pt.error);
                    err << "point " << pt.value << " failed: " << pt.error << "\n";
                }
            }
        }
        atomic_write(out_csv, buf.str());
        return kOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

}  // namespace selene::cli
