#pragma once

#include <vector>

#include "uwb/channel.hpp"
#include "uwb/pulse.hpp"

namespace uwb {

// Link parameters. Times ns, rates Mbps at the boundary, energies linear.
struct SystemConfig {
    double data_rate_mbps = 27.24;  // R_b
    int pulses_per_bit = 1;         // N_s
    int users = 1;                  // N_u
    double chip_time = 0.0;         // T_c; 0 means hop_span / hop_cardinality
    double hop_span = 0.0;          // T_s; 0 means the frame time
    int hop_cardinality = 8;        // N_h
    double pulse_energy = 1.0;      // E_p
    double noise_psd = 0.0;         // N_0
    double tau_max = 200.0;         // channel max excess delay, for N_I
    int interfering_periods = 0;    // N_I; filled by finalize()

    double frame_time() const { return 1000.0 / (data_rate_mbps * pulses_per_bit); }
    double symbol_time() const { return frame_time() * pulses_per_bit; }
    double rate_per_ns() const { return data_rate_mbps * 1e-3; }

    void finalize();        // derive hop_span, chip_time, interfering_periods
    void validate() const;  // throws std::invalid_argument
};

SystemConfig make_system_config(double rate_mbps, int users, const ChannelParams& params);

// Truncation and quadrature controls for the budget integrals.
struct AnalyticModelParams {
    int ray_count_cap = 400;      // K_max
    int cluster_count_cap = 60;   // L_max
    double t_m = 0.0;             // integration upper limit; 0 -> tau_max
    double rel_tol = 1e-8;        // quadrature relative tolerance
    double ksum_rel_tol = 1e-6;   // series tail threshold

    double upper_limit(const ChannelParams& p) const { return t_m > 0.0 ? t_m : p.max_excess_delay; }
};

struct VarResult {
    double value = 0.0;
    double error = 0.0;  // accumulated quadrature error estimate
};

// --- delay densities ---
double pdf_cluster_delay(int l, double x, double cluster_rate);  // Erlang(l-1, Lambda)
double pdf_ray_delay(int k, double x, double ray_rate2);         // Erlang(k-1, lambda_2)
double pdf_code_offset(double x, double hop_span);               // uniform on [-T_s, T_s]

// --- energy normalizers ---
double omega0(const ChannelParams& params);

// Aggregate mean energy captured from all interfering pulses of previous
// frames: sum over s of the code-offset-averaged product of the two
// cluster-time integrals, scaled by omega0.
VarResult omega_sigma(const ChannelParams& params, const SystemConfig& config,
                      const AnalyticModelParams& model = {});

// --- budget terms (all per the configured E_p and N_0) ---
double signal_energy(const SystemConfig& config, const ChannelParams& params);
double noise_var(const SystemConfig& config, const ChannelParams& params);
VarResult iasi_var(const SystemConfig& config, const ChannelParams& params,
                   const Autocorrelation& r, const AnalyticModelParams& model = {});
VarResult isi_var(const SystemConfig& config, const ChannelParams& params,
                  const Autocorrelation& r, double omega_sigma_value,
                  const AnalyticModelParams& model = {});
VarResult mui_var(const SystemConfig& config, const ChannelParams& params,
                  const Autocorrelation& r, double omega_sigma_value,
                  const AnalyticModelParams& model = {});

struct InterferenceBudget {
    double signal = 0.0;  // E_b
    double noise = 0.0;   // sigma_n^2
    double iasi = 0.0;
    double isi = 0.0;
    double mui = 0.0;

    double sinr() const;  // throws std::domain_error on a zero denominator
    double ber() const;
};

double ber_from_sinr(double sinr);

// BER limit as noise vanishes while the interference terms stay fixed.
double ber_floor(const InterferenceBudget& b);

InterferenceBudget compute_budget(const SystemConfig& config, const ChannelParams& params,
                                  const Autocorrelation& r, const AnalyticModelParams& model = {});

struct BerPoint {
    double snr_db;  // E_p / N_0
    double ber;
};

// Sweeps E_p/N_0 with the interference terms computed once.
std::vector<BerPoint> ber_curve(const SystemConfig& config, const ChannelParams& params,
                                const Autocorrelation& r, const std::vector<double>& snr_grid_db,
                                const AnalyticModelParams& model = {});

struct TableCell {
    double rate_mbps;
    int users;
    double iasi;
    double isi;
    double mui;
};

std::vector<TableCell> interference_table(const ChannelParams& params, const Autocorrelation& r,
                                          const std::vector<double>& rates_mbps,
                                          const std::vector<int>& user_counts,
                                          const AnalyticModelParams& model = {});

}  // namespace uwb
