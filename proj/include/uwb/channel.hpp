#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "uwb/rng.hpp"

namespace uwb {

// Stochastic model constants for the clustered multipath channel.
// Times are in ns, rates in 1/ns, energies linear; dB only where noted.
struct ChannelParams {
    double cluster_rate = 0.016;        // Lambda, cluster arrival rate
    double ray_rate1 = 0.19;            // lambda_1, first mixture component
    double ray_rate2 = 2.97;            // lambda_2, second (dominant) component
    double mixture_prob = 0.0184;       // beta, weight of the lambda_1 component
    double inter_cluster_decay = 14.6;  // Gamma, cluster energy decay constant
    double intra_decay_base = 6.4;      // gamma_0, ray decay at cluster time 0
    double decay_slope = 0.0;           // k_r in gamma_l = k_r*T_l + gamma_0
    double decay_scale = 1.0;           // multiplier on the linear decay law
    double cluster_shadowing_db = 3.0;  // std of the per-cluster lognormal term
    double nakagami_m_mean = 3.0;       // mean of the lognormal m factor
    double nakagami_m_std = 0.3;        // std of ln(m)
    double freq_c0 = 1.0;               // C_0 in F(w) = C_0 (w/w0)^-kappa
    double freq_kappa = 0.03;           // kappa, frequency dependence exponent
    double omega0_rad_s = 2.0 * M_PI * 3.993e9;  // reference angular frequency
    double max_excess_delay = 200.0;    // tau_max, hard delay cutoff
    double truncation_db = -30.0;       // drop taps this far below the strongest

    void validate() const;  // throws std::invalid_argument naming the bad field
    uint64_t hash() const;
    std::string to_text() const;  // canonical key=value listing

    // F(w) and its flavours; w in rad/s.
    double freq_dependence(double omega) const;
    double freq_dependence_taylor(double omega) const;  // first order around omega0
    double freq_dependence_flat() const { return freq_c0; }
};

struct Cluster {
    double arrival;  // T_l (ns), first cluster at 0
    double energy;   // Omega_l (linear)
    double decay;    // gamma_l (ns)
};

struct Tap {
    int cluster;       // index into clusters
    double delay;      // tau_{k,l} relative to the cluster arrival (ns)
    double amplitude;  // signed alpha_{k,l} (linear), includes the sqrt(F(w0)) scale
};

// One seeded draw of the tapped-delay-line. Immutable after generation and
// safe to share across threads; (params, seed) -> realization is pure.
struct ChannelRealization {
    std::vector<Cluster> clusters;
    std::vector<Tap> taps;  // ordered by cluster, then by delay
    uint64_t seed = 0;
    uint64_t params_hash = 0;

    double tap_absolute_delay(size_t i) const {
        return clusters[static_cast<size_t>(taps[i].cluster)].arrival + taps[i].delay;
    }
    double total_energy() const;
    double rms_delay_spread() const;
    void check_invariants(double tau_max) const;  // throws std::logic_error
};

struct FrequencyResponse {
    std::vector<double> frequencies;  // rad/s, strictly increasing
    std::vector<std::complex<double>> values;
};

enum class FreqDependenceMode { full, taylor, flat };

// --- sampling primitives ---

// Cluster arrival times: T_1 = 0, then i.i.d. exponential(cluster_rate) gaps,
// stopping at the first arrival beyond max_excess_delay.
std::vector<double> sample_cluster_arrivals(const ChannelParams& params, Rng& rng);

// Intra-cluster ray delays: first at 0, gaps from the two-component
// exponential mixture, stopping beyond cluster_span.
std::vector<double> sample_ray_arrivals(const ChannelParams& params, double cluster_span, Rng& rng);

// E[alpha^2] for a tap at intra-cluster delay tau_kl of a cluster with
// integrated energy omega_l and decay gamma_l.
double mean_tap_power(const ChannelParams& params, double omega_l, double gamma_l, double tau_kl);

// Omega_l from the exponential inter-cluster decay plus a shadowing term in dB.
double cluster_energy(const ChannelParams& params, double arrival, double shadowing_db);

// gamma_l = decay_scale * (k_r * T_l + gamma_0)
double intra_cluster_decay(const ChannelParams& params, double arrival);

// Signed amplitude with Nakagami-(m, omega) magnitude and equiprobable sign.
double sample_nakagami_amplitude(double m, double omega, Rng& rng);

// Lognormal m-factor draw, clamped to the Nakagami domain m >= 0.5.
double sample_nakagami_m(const ChannelParams& params, Rng& rng);

ChannelRealization generate_realization(const ChannelParams& params, uint64_t seed);

// H(w) over the grid. Amplitudes are un-scaled back to raw alpha before the
// selected F(w) branch is applied, so the three modes are directly comparable.
FrequencyResponse frequency_response(const ChannelRealization& real,
                                     const std::vector<double>& grid_rad_s,
                                     const ChannelParams& params,
                                     FreqDependenceMode mode = FreqDependenceMode::flat);

// --- persistence (columnar text, one tap per row) ---
void save_realization(const ChannelRealization& real, std::ostream& os);
void save_realization_file(const ChannelRealization& real, const std::string& path);
ChannelRealization load_realization(std::istream& is);
ChannelRealization load_realization_file(const std::string& path);

}  // namespace uwb
