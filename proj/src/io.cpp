#include "selene/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace selene {

namespace {

constexpr char kBinaryMagic[4] = {'S', 'E', 'L', 'B'};

void put_u16(std::ostream& out, uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
    out.write(b, 2);
}

void put_i64(std::ostream& out, int64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

uint16_t get_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

int64_t get_i64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return static_cast<int64_t>(v);
}

void validate_event(const EventStream& s, const Event& e, int64_t prev_t, size_t line) {
    if (e.x >= s.width || e.y >= s.height)
        throw IoError("event file: pixel " + std::to_string(e.x) + "," + std::to_string(e.y) +
                      " outside " + std::to_string(s.width) + "x" + std::to_string(s.height) +
                      " at record " + std::to_string(line));
    if (e.t < prev_t)
        throw IoError("event file: timestamps not sorted at record " + std::to_string(line));
}

}  // namespace

void write_event_stream(std::ostream& out, const EventStream& stream,
                        EventFileFormat format) {
    if (format == EventFileFormat::Binary) {
        out.write(kBinaryMagic, 4);
        put_u16(out, stream.width);
        put_u16(out, stream.height);
        for (const Event& e : stream.events) {
            put_i64(out, e.t);
            put_u16(out, e.x);
            put_u16(out, e.y);
            out.put(e.polarity == Polarity::On ? 1 : 0);
        }
        return;
    }
    out << "# selene-events v1 width=" << stream.width << " height=" << stream.height << "\n";
    for (const Event& e : stream.events)
        out << e.t << ' ' << e.x << ' ' << e.y << ' '
            << (e.polarity == Polarity::On ? 1 : 0) << "\n";
}

EventStream read_event_stream(std::istream& in) {
    EventStream stream;
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, kBinaryMagic, 4) == 0) {
        stream.width = get_u16(in);
        stream.height = get_u16(in);
        if (!in) throw IoError("event file: truncated binary header");
        int64_t prev_t = 0;
        size_t n = 0;
        for (;;) {
            Event e;
            e.t = get_i64(in);
            if (in.eof()) break;
            e.x = get_u16(in);
            e.y = get_u16(in);
            int p = in.get();
            if (!in) throw IoError("event file: truncated binary record");
            if (p != 0 && p != 1) throw IoError("event file: bad polarity byte");
            e.polarity = p ? Polarity::On : Polarity::Off;
            validate_event(stream, e, prev_t, ++n);
            prev_t = e.t;
            stream.events.push_back(e);
        }
        return stream;
    }

    // Text format: rewind what the magic probe consumed.
    in.clear();
    in.seekg(0);
    std::string header;
    if (!std::getline(in, header)) throw IoError("event file: empty file");
    unsigned w = 0, h = 0;
    if (std::sscanf(header.c_str(), "# selene-events v1 width=%u height=%u", &w, &h) != 2)
        throw IoError("event file: bad header line: " + header);
    stream.width = static_cast<uint16_t>(w);
    stream.height = static_cast<uint16_t>(h);
    std::string line;
    int64_t prev_t = 0;
    size_t n = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        long long t;
        unsigned x, y;
        int p;
        if (std::sscanf(line.c_str(), "%lld %u %u %d", &t, &x, &y, &p) != 4 ||
            (p != 0 && p != 1))
            throw IoError("event file: bad record: " + line);
        Event e{t, static_cast<uint16_t>(x), static_cast<uint16_t>(y),
                p ? Polarity::On : Polarity::Off};
        validate_event(stream, e, prev_t, ++n);
        prev_t = e.t;
        stream.events.push_back(e);
    }
    return stream;
}

void atomic_write(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename " + tmp + " to " + path);
}

void write_event_file(const std::string& path, const EventStream& stream,
                      EventFileFormat format) {
    std::ostringstream buf(std::ios::binary);
    write_event_stream(buf, stream, format);
    atomic_write(path, buf.str());
}

EventStream read_event_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_event_stream(in);
}

void write_channel_map(std::ostream& out, const ChannelMap& map) {
    for (const MappedChannel& mc : map.channels)
        out << mc.id.index << ' ' << mc.box.x0 << ' ' << mc.box.y0 << ' ' << mc.box.x1
            << ' ' << mc.box.y1 << ' ' << mc.center_x << ' ' << mc.center_y << "\n";
}

void write_map_file(const std::string& path, const ChannelMap& map) {
    std::ostringstream buf;
    write_channel_map(buf, map);
    atomic_write(path, buf.str());
}

ChannelMap read_channel_map(std::istream& in, const ChannelLayout* layout) {
    ChannelMap map;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        unsigned idx, x0, y0, x1, y1, cx, cy;
        if (std::sscanf(line.c_str(), "%u %u %u %u %u %u %u", &idx, &x0, &y0, &x1, &y1,
                        &cx, &cy) != 7)
            throw IoError("map file: bad line: " + line);
        MappedChannel mc;
        mc.id = layout ? layout->channel_id(idx) : ChannelId{idx, 0, 0};
        mc.box = {static_cast<uint16_t>(x0), static_cast<uint16_t>(y0),
                  static_cast<uint16_t>(x1), static_cast<uint16_t>(y1)};
        mc.center_x = static_cast<uint16_t>(cx);
        mc.center_y = static_cast<uint16_t>(cy);
        map.channels.push_back(mc);
    }
    return map;
}

ChannelMap read_map_file(const std::string& path, const ChannelLayout* layout) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_channel_map(in, layout);
}

void write_csv_header(std::ostream& out) { out << kCsvHeader << "\n"; }

void write_csv_row(std::ostream& out, const std::string& variable, const std::string& value,
                   const TrialResult& result) {
    out << variable << ',' << value << ','
        << (result.mode == DecodeMode::Absolute ? "absolute" : "relative") << ','
        << result.channel_count << ',' << result.f_c << ',' << result.f_p << ','
        << result.mean_ber << ',' << result.valid_fraction << ','
        << result.undefined_channels << ',' << result.bps << ','
        << result.sensor.generated << ',' << result.sensor.dropped << "\n";
}

// Failed sweep points keep their grid slot; diagnostics go to stderr.
void write_csv_error_row(std::ostream& out, const std::string& variable,
                         const std::string& value, const std::string&) {
    out << variable << ',' << value << ",error,0,0,0,nan,0,0,0,0,0\n";
}

}  // namespace selene
