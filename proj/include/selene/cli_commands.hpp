#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "selene/io.hpp"
#include "selene/run_config.hpp"

namespace selene::cli {

// Exit codes shared by every subcommand.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;
constexpr int kDetectionFailure = 4;
constexpr int kMappingAmbiguity = 5;

int cmd_layout(const std::string& config_path, std::ostream& out, std::ostream& err);

// phase: "data" transmits the configured traffic, "mapping" the calibration
// broadcast.
int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& phase, std::ostream& err);

int cmd_map(const std::string& events_path, const std::string& config_path,
            const std::string& out_path, std::ostream& err);

int cmd_decode(const std::string& events_path, const std::string& map_path,
               const std::string& config_path, const std::string& out_path,
               std::ostream& err);

int cmd_eval(const std::string& config_path, const std::string& out_csv, std::ostream& err);

int cmd_sweep(const std::string& config_path, const std::string& variable,
              const std::vector<double>& values, bool both_modes,
              const std::string& out_csv, std::ostream& err);

}  // namespace selene::cli
