#pragma once

#include <stdexcept>
#include <string>

#include "selene/eval.hpp"
#include "selene/io.hpp"

namespace selene {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything a run needs, loaded from a sectioned key=value file. Unknown
// keys and invariant violations are rejected at load time. The SELENE_SEED
// environment variable overrides [run] seed.
struct RunConfig {
    TrialConfig trial;
    EventFileFormat event_format = EventFileFormat::Text;

    static RunConfig load_file(const std::string& path);
    static RunConfig parse(const std::string& text, const std::string& origin = "<memory>");
};

}  // namespace selene
