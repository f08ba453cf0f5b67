#include "uwb/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace uwb {

void RunConfig::validate() const {
    channel.validate();
    SystemConfig sys = system;
    sys.validate();
    if (band != "lower" && band != "upper")
        throw std::invalid_argument("pulse.band must be 'lower' or 'upper'");
    if (kernel_count < 1) throw std::invalid_argument("pulse.kernel_count must be >= 1");
    if (kernel_spacing <= 0 || kernel_sigma <= 0 || sample_interval <= 0)
        throw std::invalid_argument("pulse timing values must be > 0");
    if (mode != "analytic" && mode != "montecarlo" && mode != "both" && mode != "table")
        throw std::invalid_argument("run.mode must be analytic|montecarlo|both|table");
    if ((mode == "montecarlo" || mode == "both") && !seed_set)
        throw std::invalid_argument("run.seed is required for montecarlo runs");
    if (mode != "table" && snr_grid_db.empty())
        throw std::invalid_argument("run.snr grid is required for curve modes");
    if (realizations < 1) throw std::invalid_argument("run.realizations must be >= 1");
    if (threads < 1) throw std::invalid_argument("run.threads must be >= 1");
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.system = make_system_config(27.24, 1, cfg.channel);
    cfg.snr_grid_db = parse_snr_range("0:1:30");
    return cfg;
}

void apply_preset(RunConfig& cfg, const std::string& name) {
    auto table = [&](double rate) {
        cfg.mode = "table";
        cfg.system = make_system_config(rate, 1, cfg.channel);
        cfg.table_rates_mbps = {rate};
        cfg.table_users = {1, 8, 16};
    };
    if (name == "table1") table(27.24);
    else if (name == "table2") table(6.81);
    else if (name == "table3") table(0.11);
    else if (name == "fig3") {
        cfg.mode = "analytic";
        cfg.system = make_system_config(27.24, 1, cfg.channel);
        cfg.band = "lower";
        cfg.snr_grid_db = parse_snr_range("0:1:30");
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
}

namespace {

// shortest representation that round-trips exactly
std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    for (double v : split_doubles(s)) out.push_back(static_cast<int>(v));
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string to_ini(const RunConfig& cfg) {
    std::ostringstream os;
    const ChannelParams& c = cfg.channel;
    os << "[channel]\n";
    os << "cluster_rate = " << fmt(c.cluster_rate) << "\n";
    os << "ray_rate1 = " << fmt(c.ray_rate1) << "\n";
    os << "ray_rate2 = " << fmt(c.ray_rate2) << "\n";
    os << "mixture_prob = " << fmt(c.mixture_prob) << "\n";
    os << "inter_cluster_decay = " << fmt(c.inter_cluster_decay) << "\n";
    os << "intra_decay_base = " << fmt(c.intra_decay_base) << "\n";
    os << "decay_slope = " << fmt(c.decay_slope) << "\n";
    os << "decay_scale = " << fmt(c.decay_scale) << "\n";
    os << "cluster_shadowing_db = " << fmt(c.cluster_shadowing_db) << "\n";
    os << "nakagami_m_mean = " << fmt(c.nakagami_m_mean) << "\n";
    os << "nakagami_m_std = " << fmt(c.nakagami_m_std) << "\n";
    os << "freq_c0 = " << fmt(c.freq_c0) << "\n";
    os << "freq_kappa = " << fmt(c.freq_kappa) << "\n";
    os << "omega0_rad_s = " << fmt(c.omega0_rad_s) << "\n";
    os << "max_excess_delay = " << fmt(c.max_excess_delay) << "\n";
    os << "truncation_db = " << fmt(c.truncation_db) << "\n";
    const SystemConfig& s = cfg.system;
    // 0 means auto-derived (hop span tracks the frame, chip = span / N_h)
    const double span_out = (s.hop_span == s.frame_time()) ? 0.0 : s.hop_span;
    const double chip_out =
        (s.hop_span > 0 && s.chip_time == s.hop_span / s.hop_cardinality) ? 0.0 : s.chip_time;
    os << "\n[system]\n";
    os << "data_rate_mbps = " << fmt(s.data_rate_mbps) << "\n";
    os << "pulses_per_bit = " << s.pulses_per_bit << "\n";
    os << "users = " << s.users << "\n";
    os << "chip_time = " << fmt(chip_out) << "\n";
    os << "hop_span = " << fmt(span_out) << "\n";
    os << "hop_cardinality = " << s.hop_cardinality << "\n";
    os << "pulse_energy = " << fmt(s.pulse_energy) << "\n";
    os << "noise_psd = " << fmt(s.noise_psd) << "\n";
    os << "\n[pulse]\n";
    os << "kernel_count = " << cfg.kernel_count << "\n";
    os << "kernel_spacing = " << fmt(cfg.kernel_spacing) << "\n";
    os << "kernel_sigma = " << fmt(cfg.kernel_sigma) << "\n";
    os << "sample_interval = " << fmt(cfg.sample_interval) << "\n";
    os << "band = " << cfg.band << "\n";
    if (!cfg.pulse_file.empty()) os << "pulse_file = " << cfg.pulse_file << "\n";
    os << "\n[run]\n";
    os << "mode = " << cfg.mode << "\n";
    os << "snr = " << join(cfg.snr_grid_db) << "\n";
    if (cfg.seed_set) os << "seed = " << cfg.seed << "\n";
    os << "min_errors = " << cfg.min_errors << "\n";
    os << "max_bits = " << cfg.max_bits << "\n";
    os << "block_bits = " << cfg.block_bits << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "realizations = " << cfg.realizations << "\n";
    os << "table_rates = " << join(cfg.table_rates_mbps) << "\n";
    os << "table_users = " << join(cfg.table_users) << "\n";
    return os.str();
}

RunConfig parse_ini(const std::string& text) {
    RunConfig cfg;  // raw defaults: hop_span/chip_time stay in auto mode
    cfg.snr_grid_db = parse_snr_range("0:1:30");
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto d = [&] { return std::stod(val); };
        auto i = [&] { return std::stoi(val); };
        ChannelParams& c = cfg.channel;
        SystemConfig& s = cfg.system;
        bool known = true;
        if (section == "channel") {
            if (key == "cluster_rate") c.cluster_rate = d();
            else if (key == "ray_rate1") c.ray_rate1 = d();
            else if (key == "ray_rate2") c.ray_rate2 = d();
            else if (key == "mixture_prob") c.mixture_prob = d();
            else if (key == "inter_cluster_decay") c.inter_cluster_decay = d();
            else if (key == "intra_decay_base") c.intra_decay_base = d();
            else if (key == "decay_slope") c.decay_slope = d();
            else if (key == "decay_scale") c.decay_scale = d();
            else if (key == "cluster_shadowing_db") c.cluster_shadowing_db = d();
            else if (key == "nakagami_m_mean") c.nakagami_m_mean = d();
            else if (key == "nakagami_m_std") c.nakagami_m_std = d();
            else if (key == "freq_c0") c.freq_c0 = d();
            else if (key == "freq_kappa") c.freq_kappa = d();
            else if (key == "omega0_rad_s") c.omega0_rad_s = d();
            else if (key == "max_excess_delay") c.max_excess_delay = d();
            else if (key == "truncation_db") c.truncation_db = d();
            else known = false;
        } else if (section == "system") {
            if (key == "data_rate_mbps") s.data_rate_mbps = d();
            else if (key == "pulses_per_bit") s.pulses_per_bit = i();
            else if (key == "users") s.users = i();
            else if (key == "chip_time") s.chip_time = d();
            else if (key == "hop_span") s.hop_span = d();
            else if (key == "hop_cardinality") s.hop_cardinality = i();
            else if (key == "pulse_energy") s.pulse_energy = d();
            else if (key == "noise_psd") s.noise_psd = d();
            else known = false;
        } else if (section == "pulse") {
            if (key == "kernel_count") cfg.kernel_count = i();
            else if (key == "kernel_spacing") cfg.kernel_spacing = d();
            else if (key == "kernel_sigma") cfg.kernel_sigma = d();
            else if (key == "sample_interval") cfg.sample_interval = d();
            else if (key == "band") cfg.band = val;
            else if (key == "pulse_file") cfg.pulse_file = val;
            else known = false;
        } else if (section == "run") {
            if (key == "mode") cfg.mode = val;
            else if (key == "snr") cfg.snr_grid_db = (val.find(':') != std::string::npos)
                                                         ? parse_snr_range(val)
                                                         : split_doubles(val);
            else if (key == "seed") { cfg.seed = std::stoull(val); cfg.seed_set = true; }
            else if (key == "min_errors") cfg.min_errors = std::stol(val);
            else if (key == "max_bits") cfg.max_bits = std::stol(val);
            else if (key == "block_bits") cfg.block_bits = i();
            else if (key == "threads") cfg.threads = i();
            else if (key == "realizations") cfg.realizations = i();
            else if (key == "table_rates") cfg.table_rates_mbps = split_doubles(val);
            else if (key == "table_users") cfg.table_users = split_ints(val);
            else known = false;
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown section [" + section + "]");
        }
        if (!known)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key +
                                        "' in section [" + section + "]");
    }
    // derive the dependent system fields against the parsed channel
    cfg.system.tau_max = cfg.channel.max_excess_delay;
    cfg.system.interfering_periods = 0;
    cfg.system.finalize();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_ini(ss.str());
}

std::vector<double> parse_snr_range(const std::string& spec) {
    double lo, step, hi;
    char c1, c2;
    std::istringstream is(spec);
    if (!(is >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || step <= 0)
        throw std::invalid_argument("snr range must be lo:step:hi with step > 0, got '" + spec + "'");
    std::vector<double> grid;
    for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
    if (grid.empty()) throw std::invalid_argument("snr range is empty: " + spec);
    return grid;
}

uint64_t fnv64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for digest: " + path);
    uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (is.read(buf, sizeof buf) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!is) break;
    }
    return h;
}

}  // namespace uwb
