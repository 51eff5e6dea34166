#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "selene/core.hpp"
#include "selene/eval.hpp"
#include "selene/receiver.hpp"

namespace selene {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EventFileFormat { Text, Binary };

// Text: header "# selene-events v1 width=<W> height=<H>", then one
// "t x y p" line per event (p = 1 for ON). Binary: magic "SELB", little-endian
// u16 width, u16 height, then packed records of i64 t, u16 x, u16 y, u8 p.
void write_event_stream(std::ostream& out, const EventStream& stream,
                        EventFileFormat format);
EventStream read_event_stream(std::istream& in);  // format auto-detected

// Atomic variants (write to <path>.tmp, then rename).
void write_event_file(const std::string& path, const EventStream& stream,
                      EventFileFormat format);
EventStream read_event_file(const std::string& path);

// One "index x0 y0 x1 y1 cx cy" line per mapped channel.
void write_channel_map(std::ostream& out, const ChannelMap& map);
void write_map_file(const std::string& path, const ChannelMap& map);
ChannelMap read_channel_map(std::istream& in, const ChannelLayout* layout = nullptr);
ChannelMap read_map_file(const std::string& path, const ChannelLayout* layout = nullptr);

constexpr const char* kCsvHeader =
    "variable,value,mode,N,fc_hz,fp_hz,ber,valid_frac,undef_channels,bps,events,dropped";

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const std::string& variable, const std::string& value,
                   const TrialResult& result);
void write_csv_error_row(std::ostream& out, const std::string& variable,
                         const std::string& value, const std::string& error);

// Write-to-temp-then-rename helper used by every file-producing command.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace selene
