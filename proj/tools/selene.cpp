// Command-line front end: layout inspection, event-stream simulation, channel
// mapping, decoding, and BER evaluation sweeps.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selene/cli_commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"multi-channel passive VLC simulator and codec"};
    app.require_subcommand(1);

    std::string config_path;
    std::string events_path, map_path, out_path, phase = "data";
    std::string variable;
    std::vector<double> values;
    bool both_modes = false;

    auto* layout = app.add_subcommand("layout", "print channel layout and data rate");
    layout->add_option("--config", config_path, "run configuration file")->required();

    auto* simulate = app.add_subcommand("simulate", "simulate a recording to an event file");
    simulate->add_option("--config", config_path)->required();
    simulate->add_option("--out", out_path, "event file to write")->required();
    simulate->add_option("--phase", phase, "data or mapping");

    auto* map = app.add_subcommand("map", "build a channel map from a calibration recording");
    map->add_option("--events", events_path)->required();
    map->add_option("--config", config_path)->required();
    map->add_option("--out", out_path, "map file to write")->required();

    auto* decode = app.add_subcommand("decode", "decode an event file through a channel map");
    decode->add_option("--events", events_path)->required();
    decode->add_option("--map", map_path)->required();
    decode->add_option("--config", config_path)->required();
    decode->add_option("--out", out_path, "payload dump to write")->required();

    auto* eval = app.add_subcommand("eval", "run one end-to-end trial and write a CSV row");
    eval->add_option("--config", config_path)->required();
    eval->add_option("--out", out_path, "CSV to write")->required();

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write a CSV");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--var", variable,
                      "refresh_rate|channel_count|decoder_mode|bandwidth|ambient")
        ->required();
    sweep->add_option("--values", values, "grid values")->required()->delimiter(',');
    sweep->add_flag("--both-modes", both_modes, "repeat the sweep for both decoders");
    sweep->add_option("--out", out_path, "CSV to write")->required();

    CLI11_PARSE(app, argc, argv);

    if (layout->parsed())
        return selene::cli::cmd_layout(config_path, std::cout, std::cerr);
    if (simulate->parsed())
        return selene::cli::cmd_simulate(config_path, out_path, phase, std::cerr);
    if (map->parsed())
        return selene::cli::cmd_map(events_path, config_path, out_path, std::cerr);
    if (decode->parsed())
        return selene::cli::cmd_decode(events_path, map_path, config_path, out_path,
                                       std::cerr);
    if (eval->parsed()) return selene::cli::cmd_eval(config_path, out_path, std::cerr);
    if (sweep->parsed())
        return selene::cli::cmd_sweep(config_path, variable, values, both_modes, out_path,
                                      std::cerr);
    return 1;
}
