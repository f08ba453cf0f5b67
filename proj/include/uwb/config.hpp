#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwb/analytic.hpp"
#include "uwb/channel.hpp"

namespace uwb {

// One experiment of record: every knob the CLI commands consume, loadable
// from a sectioned key=value file and serializable back to it.
struct RunConfig {
    ChannelParams channel;  // [channel]
    SystemConfig system;    // [system]

    // [pulse]
    int kernel_count = 19;
    double kernel_spacing = 0.04;
    double kernel_sigma = 0.04;
    double sample_interval = 0.005;
    std::string band = "lower";  // lower | upper
    std::string pulse_file;      // overrides band synthesis when set

    // [run]
    std::string mode = "analytic";  // analytic | montecarlo | both | table
    std::vector<double> snr_grid_db;
    uint64_t seed = 0;
    bool seed_set = false;
    long min_errors = 500;
    long max_bits = 10000000;
    int block_bits = 100;
    int threads = 1;
    int realizations = 1;
    std::vector<double> table_rates_mbps{27.24, 6.81, 0.11};
    std::vector<int> table_users{1, 8, 16};

    void validate() const;  // mode-aware; throws std::invalid_argument
};

RunConfig default_config();

// Named recipes for the shipped experiments.
void apply_preset(RunConfig& cfg, const std::string& name);  // table1..3, fig3

std::string to_ini(const RunConfig& cfg);
RunConfig parse_ini(const std::string& text);
RunConfig load_config_file(const std::string& path);

// "lo:step:hi" in dB, inclusive ends
std::vector<double> parse_snr_range(const std::string& spec);

uint64_t fnv64_file(const std::string& path);

}  // namespace uwb
