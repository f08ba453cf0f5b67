#include "uwb/channel.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uwb {

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("ChannelParams: ") + field + " " + what);
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

void ChannelParams::validate() const {
    require(cluster_rate > 0, "cluster_rate", "must be > 0");
    require(ray_rate1 > 0, "ray_rate1", "must be > 0");
    require(ray_rate2 > 0, "ray_rate2", "must be > 0");
    require(mixture_prob >= 0 && mixture_prob <= 1, "mixture_prob", "must be in [0,1]");
    require(inter_cluster_decay > 0, "inter_cluster_decay", "must be > 0");
    require(intra_decay_base > 0, "intra_decay_base", "must be > 0");
    require(decay_slope >= 0, "decay_slope", "must be >= 0");
    require(decay_scale > 0, "decay_scale", "must be > 0");
    require(cluster_shadowing_db >= 0, "cluster_shadowing_db", "must be >= 0");
    require(nakagami_m_mean >= 0.5, "nakagami_m_mean", "must be >= 0.5");
    require(nakagami_m_std >= 0, "nakagami_m_std", "must be >= 0");
    require(freq_c0 > 0, "freq_c0", "must be > 0");
    require(omega0_rad_s > 0, "omega0_rad_s", "must be > 0");
    require(max_excess_delay > 0, "max_excess_delay", "must be > 0");
    require(truncation_db < 0, "truncation_db", "must be < 0 dB");
}

std::string ChannelParams::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "cluster_rate=" << cluster_rate << "\nray_rate1=" << ray_rate1
       << "\nray_rate2=" << ray_rate2 << "\nmixture_prob=" << mixture_prob
       << "\ninter_cluster_decay=" << inter_cluster_decay
       << "\nintra_decay_base=" << intra_decay_base << "\ndecay_slope=" << decay_slope
       << "\ndecay_scale=" << decay_scale
       << "\ncluster_shadowing_db=" << cluster_shadowing_db
       << "\nnakagami_m_mean=" << nakagami_m_mean << "\nnakagami_m_std=" << nakagami_m_std
       << "\nfreq_c0=" << freq_c0 << "\nfreq_kappa=" << freq_kappa
       << "\nomega0_rad_s=" << omega0_rad_s << "\nmax_excess_delay=" << max_excess_delay
       << "\ntruncation_db=" << truncation_db << "\n";
    return os.str();
}

uint64_t ChannelParams::hash() const { return fnv1a(to_text()); }

double ChannelParams::freq_dependence(double omega) const {
    if (freq_kappa != 0.0 && omega <= 0.0)
        throw std::domain_error("freq_dependence: omega must be > 0 when kappa != 0");
    return freq_c0 * std::pow(omega / omega0_rad_s, -freq_kappa);
}

double ChannelParams::freq_dependence_taylor(double omega) const {
    // expansion around the reference frequency; F'(w0) = -kappa*C0/w0
    return freq_c0 - freq_kappa * freq_c0 / omega0_rad_s * (omega - omega0_rad_s);
}

std::vector<double> sample_cluster_arrivals(const ChannelParams& params, Rng& rng) {
    params.validate();
    std::vector<double> arrivals{0.0};
    double t = 0.0;
    for (;;) {
        t += rng.exponential(params.cluster_rate);
        if (t > params.max_excess_delay) break;
        arrivals.push_back(t);
    }
    return arrivals;
}

std::vector<double> sample_ray_arrivals(const ChannelParams& params, double cluster_span, Rng& rng) {
    if (cluster_span < 0) throw std::invalid_argument("sample_ray_arrivals: cluster_span must be >= 0");
    std::vector<double> delays{0.0};
    double t = 0.0;
    for (;;) {
        const double rate = (rng.uniform() < params.mixture_prob) ? params.ray_rate1 : params.ray_rate2;
        t += rng.exponential(rate);
        if (t > cluster_span) break;
        delays.push_back(t);
    }
    return delays;
}

double mean_tap_power(const ChannelParams& params, double omega_l, double gamma_l, double tau_kl) {
    if (gamma_l <= 0) throw std::invalid_argument("mean_tap_power: gamma_l must be > 0");
    const double norm =
        gamma_l * ((1.0 - params.mixture_prob) * params.ray_rate1 + params.mixture_prob * params.ray_rate2 + 1.0);
    return omega_l * std::exp(-tau_kl / gamma_l) / norm;
}

double cluster_energy(const ChannelParams& params, double arrival, double shadowing_db) {
    if (arrival < 0) throw std::invalid_argument("cluster_energy: arrival must be >= 0");
    const double mean_db = 10.0 * std::log10(std::exp(-arrival / params.inter_cluster_decay));
    return std::pow(10.0, (mean_db + shadowing_db) / 10.0);
}

double intra_cluster_decay(const ChannelParams& params, double arrival) {
    if (arrival < 0) throw std::invalid_argument("intra_cluster_decay: arrival must be >= 0");
    return params.decay_scale * (params.decay_slope * arrival + params.intra_decay_base);
}

double sample_nakagami_amplitude(double m, double omega, Rng& rng) {
    if (m < 0.5) throw std::invalid_argument("sample_nakagami_amplitude: m must be >= 0.5");
    if (omega <= 0) throw std::invalid_argument("sample_nakagami_amplitude: omega must be > 0");
    // alpha^2 ~ Gamma(m, omega/m) gives exactly Nakagami-(m, omega) magnitude
    const double a2 = rng.gamma(m, omega / m);
    const double a = std::sqrt(a2);
    return rng.coin() ? a : -a;
}

double sample_nakagami_m(const ChannelParams& params, Rng& rng) {
    if (params.nakagami_m_std == 0.0) return params.nakagami_m_mean;
    // lognormal with the requested mean: ln m ~ N(ln(mean) - s^2/2, s^2)
    const double s = params.nakagami_m_std;
    const double mu = std::log(params.nakagami_m_mean) - 0.5 * s * s;
    return std::max(0.5, std::exp(rng.normal(mu, s)));
}

ChannelRealization generate_realization(const ChannelParams& params, uint64_t seed) {
    params.validate();
    Rng rng(mix_seed(seed));
    ChannelRealization real;
    real.seed = seed;
    real.params_hash = params.hash();

    const std::vector<double> arrivals = sample_cluster_arrivals(params, rng);
    const double amp_scale = std::sqrt(params.freq_dependence_flat());

    for (size_t l = 0; l < arrivals.size(); ++l) {
        Cluster c;
        c.arrival = arrivals[l];
        c.decay = intra_cluster_decay(params, c.arrival);
        const double shadow = (params.cluster_shadowing_db > 0)
                                  ? rng.normal(0.0, params.cluster_shadowing_db)
                                  : 0.0;
        c.energy = cluster_energy(params, c.arrival, shadow);
        real.clusters.push_back(c);

        const double span = params.max_excess_delay - c.arrival;
        const std::vector<double> rays = sample_ray_arrivals(params, span, rng);
        for (double tau : rays) {
            const double p = mean_tap_power(params, c.energy, c.decay, tau);
            const double m = sample_nakagami_m(params, rng);
            Tap tap;
            tap.cluster = static_cast<int>(l);
            tap.delay = tau;
            tap.amplitude = amp_scale * sample_nakagami_amplitude(m, p, rng);
            real.taps.push_back(tap);
        }
    }

    // drop taps below the truncation threshold relative to the strongest
    double peak = 0.0;
    for (const Tap& t : real.taps) peak = std::max(peak, t.amplitude * t.amplitude);
    const double floor = peak * std::pow(10.0, params.truncation_db / 10.0);
    std::vector<Tap> kept;
    kept.reserve(real.taps.size());
    for (const Tap& t : real.taps)
        if (t.amplitude * t.amplitude >= floor) kept.push_back(t);
    real.taps = std::move(kept);

    real.check_invariants(params.max_excess_delay);
    return real;
}

double ChannelRealization::total_energy() const {
    double e = 0.0;
    for (const Tap& t : taps) e += t.amplitude * t.amplitude;
    return e;
}

double ChannelRealization::rms_delay_spread() const {
    double e = 0.0, m1 = 0.0, m2 = 0.0;
    for (size_t i = 0; i < taps.size(); ++i) {
        const double p = taps[i].amplitude * taps[i].amplitude;
        const double d = tap_absolute_delay(i);
        e += p;
        m1 += p * d;
        m2 += p * d * d;
    }
    if (e == 0.0) return 0.0;
    m1 /= e;
    m2 /= e;
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

void ChannelRealization::check_invariants(double tau_max) const {
    if (clusters.empty() || clusters[0].arrival != 0.0)
        throw std::logic_error("realization: first cluster must arrive at 0");
    for (size_t l = 1; l < clusters.size(); ++l)
        if (clusters[l].arrival <= clusters[l - 1].arrival)
            throw std::logic_error("realization: cluster arrivals must be strictly increasing");
    int prev_cluster = -1;
    double prev_delay = 0.0;
    for (size_t i = 0; i < taps.size(); ++i) {
        const Tap& t = taps[i];
        if (t.cluster < 0 || static_cast<size_t>(t.cluster) >= clusters.size())
            throw std::logic_error("realization: tap cluster index out of range");
        if (t.cluster != prev_cluster) {
            if (t.cluster < prev_cluster) throw std::logic_error("realization: taps out of cluster order");
            prev_cluster = t.cluster;
        } else if (t.delay <= prev_delay) {
            throw std::logic_error("realization: ray delays must be strictly increasing");
        }
        prev_delay = t.delay;
        if (tap_absolute_delay(i) > tau_max + 1e-12)
            throw std::logic_error("realization: tap beyond max excess delay");
    }
}

FrequencyResponse frequency_response(const ChannelRealization& real,
                                     const std::vector<double>& grid_rad_s,
                                     const ChannelParams& params, FreqDependenceMode mode) {
    if (grid_rad_s.empty()) throw std::invalid_argument("frequency_response: empty grid");
    for (size_t i = 1; i < grid_rad_s.size(); ++i)
        if (grid_rad_s[i] <= grid_rad_s[i - 1])
            throw std::invalid_argument("frequency_response: grid must be strictly increasing");
    if (mode == FreqDependenceMode::full && params.freq_kappa != 0.0 && grid_rad_s.front() <= 0.0)
        throw std::domain_error("frequency_response: non-positive frequency with kappa != 0");

    const double unscale = 1.0 / std::sqrt(params.freq_dependence_flat());
    FrequencyResponse fr;
    fr.frequencies = grid_rad_s;
    fr.values.reserve(grid_rad_s.size());
    for (double w : grid_rad_s) {
        std::complex<double> sum(0.0, 0.0);
        for (size_t i = 0; i < real.taps.size(); ++i) {
            const double d_ns = real.tap_absolute_delay(i);
            const double phase = -w * d_ns * 1e-9;
            sum += real.taps[i].amplitude * unscale * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        double f;
        switch (mode) {
            case FreqDependenceMode::full: f = params.freq_dependence(w); break;
            case FreqDependenceMode::taylor: f = params.freq_dependence_taylor(w); break;
            default: f = params.freq_dependence_flat(); break;
        }
        fr.values.push_back(f * sum);
    }
    return fr;
}

void save_realization(const ChannelRealization& real, std::ostream& os) {
    os << "# uwb channel realization v1\n";
    os << "# params_hash " << real.params_hash << "\n";
    os << "# seed " << real.seed << "\n";
    os << "# clusters " << real.clusters.size() << "\n";
    char buf[160];
    for (size_t l = 0; l < real.clusters.size(); ++l) {
        std::snprintf(buf, sizeof buf, "# cluster %zu %.9g %.9g %.9g\n", l, real.clusters[l].arrival,
                      real.clusters[l].energy, real.clusters[l].decay);
        os << buf;
    }
    os << "# columns cluster_index T_l tau alpha\n";
    for (const Tap& t : real.taps) {
        std::snprintf(buf, sizeof buf, "%d %.9g %.9g %.9g\n", t.cluster,
                      real.clusters[static_cast<size_t>(t.cluster)].arrival, t.delay, t.amplitude);
        os << buf;
    }
}

void save_realization_file(const ChannelRealization& real, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    save_realization(real, os);
}

ChannelRealization load_realization(std::istream& is) {
    ChannelRealization real;
    std::string line;
    size_t n_clusters = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "params_hash") ls >> real.params_hash;
            else if (key == "seed") ls >> real.seed;
            else if (key == "clusters") ls >> n_clusters;
            else if (key == "cluster") {
                size_t idx;
                Cluster c;
                ls >> idx >> c.arrival >> c.energy >> c.decay;
                if (!ls) throw std::runtime_error("malformed cluster header row");
                real.clusters.push_back(c);
            }
            continue;
        }
        std::istringstream ls(line);
        Tap t;
        double arrival;
        ls >> t.cluster >> arrival >> t.delay >> t.amplitude;
        if (!ls) throw std::runtime_error("malformed tap row: " + line);
        real.taps.push_back(t);
    }
    if (real.clusters.size() != n_clusters) throw std::runtime_error("cluster count mismatch in file");
    return real;
}

ChannelRealization load_realization_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return load_realization(is);
}

}  // namespace uwb
