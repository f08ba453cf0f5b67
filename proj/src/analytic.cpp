#include "uwb/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "uwb/quadrature.hpp"

namespace uwb {

void SystemConfig::finalize() {
    if (hop_span == 0.0) hop_span = frame_time();
    if (chip_time == 0.0) chip_time = hop_span / hop_cardinality;
    interfering_periods = static_cast<int>(std::ceil(tau_max / frame_time() - 1e-12));
    if (interfering_periods < 1) interfering_periods = 1;
    validate();
}

void SystemConfig::validate() const {
    auto fail = [](const char* what) {
        throw std::invalid_argument(std::string("SystemConfig: ") + what);
    };
    if (data_rate_mbps <= 0) fail("data_rate_mbps must be > 0");
    if (pulses_per_bit < 1) fail("pulses_per_bit must be >= 1");
    if (users < 1) fail("users must be >= 1");
    if (hop_cardinality < 1) fail("hop_cardinality must be >= 1");
    if (pulse_energy <= 0) fail("pulse_energy must be > 0");
    if (noise_psd < 0) fail("noise_psd must be >= 0");
    if (tau_max <= 0) fail("tau_max must be > 0");
    if (hop_span < 0 || hop_span > frame_time() * (1.0 + 1e-12)) fail("hop_span must satisfy 0 <= T_s <= T_f");
    if (chip_time < 0) fail("chip_time must be >= 0");
    if (hop_cardinality * chip_time > hop_span * (1.0 + 1e-12) + 1e-12)
        fail("hop offsets must fit: N_h * T_c <= T_s");
    const int ni = static_cast<int>(std::ceil(tau_max / frame_time() - 1e-12));
    if (interfering_periods != std::max(1, ni)) fail("interfering_periods inconsistent with tau_max / T_f");
}

SystemConfig make_system_config(double rate_mbps, int users, const ChannelParams& params) {
    SystemConfig c;
    c.data_rate_mbps = rate_mbps;
    c.users = users;
    c.tau_max = params.max_excess_delay;
    c.finalize();
    return c;
}

double pdf_cluster_delay(int l, double x, double cluster_rate) {
    if (l < 2) throw std::invalid_argument("pdf_cluster_delay: l must be >= 2");
    if (x < 0) throw std::invalid_argument("pdf_cluster_delay: x must be >= 0");
    if (cluster_rate <= 0) throw std::invalid_argument("pdf_cluster_delay: rate must be > 0");
    const double lx = cluster_rate * x;
    if (l == 2) return cluster_rate * std::exp(-lx);
    if (lx == 0.0) return 0.0;
    return cluster_rate *
           std::exp(-lx + static_cast<double>(l - 2) * std::log(lx) - std::lgamma(static_cast<double>(l - 1)));
}

double pdf_ray_delay(int k, double x, double ray_rate2) {
    if (k < 2) throw std::invalid_argument("pdf_ray_delay: k must be >= 2");
    return pdf_cluster_delay(k, x, ray_rate2);
}

double pdf_code_offset(double x, double hop_span) {
    if (hop_span <= 0) throw std::invalid_argument("pdf_code_offset: hop_span must be > 0");
    return (x >= -hop_span && x <= hop_span) ? 0.5 / hop_span : 0.0;
}

double omega0(const ChannelParams& params) {
    params.validate();
    const double gamma1 = intra_cluster_decay(params, 0.0);
    return 1.0 /
           (gamma1 * ((1.0 - params.mixture_prob) * params.ray_rate1 + params.mixture_prob * params.ray_rate2 + 1.0));
}

namespace {

[[noreturn]] void quad_failure(const char* where, const QuadResult& q) {
    std::ostringstream os;
    os << where << ": quadrature did not converge, achieved error estimate " << q.error;
    throw std::runtime_error(os.str());
}

// Adaptive ray-index series: accumulates term(k) from k = 2 until the term
// falls below tol * |sum| twice in a row.
template <class Term>
double ray_series(const AnalyticModelParams& model, const char* where, Term term) {
    double sum = 0.0;
    int below = 0;
    for (int k = 2; k <= model.ray_count_cap; ++k) {
        const double t = term(k);
        sum += t;
        if (std::fabs(t) <= model.ksum_rel_tol * std::fabs(sum)) {
            if (++below >= 2) return sum;
        } else {
            below = 0;
        }
    }
    std::ostringstream os;
    os << where << ": ray series tail above " << model.ksum_rel_tol << " after K_max = "
       << model.ray_count_cap << " terms";
    throw std::runtime_error(os.str());
}

}  // namespace

VarResult omega_sigma(const ChannelParams& params, const SystemConfig& config,
                      const AnalyticModelParams& model) {
    config.validate();
    const int pulses = config.interfering_periods * config.pulses_per_bit - 1;
    if (pulses < 0) throw std::invalid_argument("omega_sigma: N_I * N_s must be >= 1");
    VarResult out;
    if (pulses == 0) return out;  // no interfering pulses at all

    const double tau_max = params.max_excess_delay;
    const double gamma1 = intra_cluster_decay(params, 0.0);
    const double big_gamma = params.inter_cluster_decay;
    const double ts = config.hop_span;
    const double tf = config.frame_time();
    const double inner_tol = model.rel_tol * 0.1;

    // mean captured energy density at excess delay u: the pulse falls inside
    // cluster l (arrived before u) while cluster l+1 arrives after u; the
    // cap bounds the total cluster count, so term l needs l+1 <= cap
    auto profile = [&](double u) {
        if (u < 0.0 || u >= tau_max) return 0.0;
        double sum = 0.0;
        int below = 0;
        for (int l = 1; l + 1 <= model.cluster_count_cap; ++l) {
            double before;  // integral over T_l in [0, u]
            if (l == 1) {
                before = std::exp(-u / gamma1);  // T_1 = 0 by convention
            } else {
                auto f = [&](double t) {
                    return pdf_cluster_delay(l, t, params.cluster_rate) * std::exp(-t / big_gamma) *
                           std::exp(-(u - t) / gamma1);
                };
                const QuadResult q = integrate(f, 0.0, u, inner_tol, 1e-18);
                before = q.value;
            }
            auto fc_next = [&](double t) { return pdf_cluster_delay(l + 1, t, params.cluster_rate); };
            const QuadResult qa = integrate(fc_next, u, tau_max, inner_tol, 1e-18);
            const double term = before * qa.value;
            sum += term;
            if (std::fabs(term) <= model.ksum_rel_tol * std::fabs(sum) && l >= 2) {
                if (++below >= 2) break;
            } else {
                below = 0;
            }
        }
        return sum;
    };

    double total = 0.0, err = 0.0;
    for (int s = 1; s <= pulses; ++s) {
        auto g = [&](double code) { return profile(s * tf + code) / (2.0 * ts); };
        const QuadResult q = integrate(g, -ts, ts, model.rel_tol, 1e-16);
        if (!q.converged) quad_failure("omega_sigma", q);
        total += q.value;
        err += q.error;
        // later frames only see the profile tail; once a frame contributes
        // nothing the remaining ones cannot either
        if (s * tf - ts >= tau_max) break;
    }
    out.value = omega0(params) * total;
    out.error = omega0(params) * err;
    return out;
}

double signal_energy(const SystemConfig& config, const ChannelParams& params) {
    const double f0 = params.freq_dependence_flat();
    const double ns = static_cast<double>(config.pulses_per_bit);
    return config.pulse_energy * f0 * omega0(params) * ns * ns;
}

double noise_var(const SystemConfig& config, const ChannelParams& params) {
    const double f0 = params.freq_dependence_flat();
    return f0 * static_cast<double>(config.pulses_per_bit) * config.noise_psd / 2.0;
}

VarResult iasi_var(const SystemConfig& config, const ChannelParams& params, const Autocorrelation& r,
                   const AnalyticModelParams& model) {
    params.validate();
    const double gamma1 = intra_cluster_decay(params, 0.0);
    const double hi = std::min(model.upper_limit(params), r.max_lag());
    const double o0 = omega0(params);
    const double ns = static_cast<double>(config.pulses_per_bit);
    const double pref = config.pulse_energy * params.freq_dependence_flat() * ns * ns;

    VarResult out;
    const double sum = ray_series(model, "iasi_var", [&](int k) {
        auto f = [&](double y) {
            const double rv = r.at(y);
            return o0 * std::exp(-y / gamma1) * pdf_ray_delay(k, y, params.ray_rate2) * rv * rv;
        };
        const QuadResult q = integrate(f, 0.0, hi, model.rel_tol, 1e-18);
        if (!q.converged) quad_failure("iasi_var", q);
        out.error += pref * q.error;
        return q.value;
    });
    out.value = pref * sum;
    return out;
}

VarResult isi_var(const SystemConfig& config, const ChannelParams& params, const Autocorrelation& r,
                  double omega_sigma_value, const AnalyticModelParams& model) {
    params.validate();
    if (omega_sigma_value == 0.0) return {};
    const double gamma1 = intra_cluster_decay(params, 0.0);
    // f_p vanishes for negative delays, so the symmetric limits collapse to [0, T_m]
    const double hi = std::min(model.upper_limit(params), r.max_lag());
    const double ns = static_cast<double>(config.pulses_per_bit);
    const double pref = config.pulse_energy * params.freq_dependence_flat() * ns * ns;

    VarResult out;
    const double sum = ray_series(model, "isi_var", [&](int k) {
        auto f = [&](double y) {
            const double rv = r.at(y);
            return std::exp(-y / gamma1) * pdf_ray_delay(k, y, params.ray_rate2) * rv * rv;
        };
        const QuadResult q = integrate(f, 0.0, hi, model.rel_tol, 1e-18);
        if (!q.converged) quad_failure("isi_var", q);
        out.error += pref * omega_sigma_value * q.error;
        return q.value;
    });
    out.value = pref * omega_sigma_value * sum;
    return out;
}

VarResult mui_var(const SystemConfig& config, const ChannelParams& params, const Autocorrelation& r,
                  double omega_sigma_value, const AnalyticModelParams& model) {
    params.validate();
    VarResult out;
    if (config.users <= 1) return out;  // a single user has no one to interfere with

    const double gamma1 = intra_cluster_decay(params, 0.0);
    const double tm = model.upper_limit(params);
    const double tf = config.frame_time();
    const double ns = static_cast<double>(config.pulses_per_bit);
    // (N_u - 1) interferers; the bare N_u prefactor would leave a single-user
    // system interfering with itself
    const double pref = config.pulse_energy * params.freq_dependence_flat() * config.rate_per_ns() * ns * ns *
                        static_cast<double>(config.users - 1) * (omega0(params) + omega_sigma_value);

    // inner z-integral of R^2(y+z) over z in [-T_f/2, T_f/2] with y+z in
    // [0, T_m]: a window integral of R^2 evaluated from the lag table
    auto window = [&](double y) {
        const double lo = std::max(y - 0.5 * tf, 0.0);
        const double hi = std::min(y + 0.5 * tf, tm);
        return r.integral_r2(lo, hi);
    };
    const double y_hi = std::min(tm, 0.5 * tf + r.max_lag());

    const double sum = ray_series(model, "mui_var", [&](int k) {
        auto f = [&](double y) {
            return std::exp(-y / gamma1) * pdf_ray_delay(k, y, params.ray_rate2) * window(y);
        };
        const QuadResult q = integrate(f, 0.0, y_hi, model.rel_tol, 1e-18);
        if (!q.converged) quad_failure("mui_var", q);
        out.error += pref * q.error;
        return q.value;
    });
    out.value = pref * sum;
    return out;
}

double InterferenceBudget::sinr() const {
    const double denom = noise + iasi + isi + mui;
    if (denom <= 0.0) throw std::domain_error("sinr: zero interference-plus-noise denominator");
    return signal / denom;
}

double InterferenceBudget::ber() const { return ber_from_sinr(sinr()); }

double ber_from_sinr(double sinr) {
    if (sinr < 0.0) throw std::domain_error("ber_from_sinr: negative SINR");
    return 0.5 * std::erfc(std::sqrt(sinr / 2.0));
}

double ber_floor(const InterferenceBudget& b) {
    const double interf = b.iasi + b.isi + b.mui;
    if (interf <= 0.0) return 0.0;
    return 0.5 * std::erfc(std::sqrt(b.signal / (2.0 * interf)));
}

InterferenceBudget compute_budget(const SystemConfig& config, const ChannelParams& params,
                                  const Autocorrelation& r, const AnalyticModelParams& model) {
    InterferenceBudget b;
    b.signal = signal_energy(config, params);
    b.noise = noise_var(config, params);
    b.iasi = iasi_var(config, params, r, model).value;
    const double os = omega_sigma(params, config, model).value;
    b.isi = isi_var(config, params, r, os, model).value;
    b.mui = mui_var(config, params, r, os, model).value;
    return b;
}

std::vector<BerPoint> ber_curve(const SystemConfig& config, const ChannelParams& params,
                                const Autocorrelation& r, const std::vector<double>& snr_grid_db,
                                const AnalyticModelParams& model) {
    if (snr_grid_db.empty()) throw std::invalid_argument("ber_curve: empty grid");
    InterferenceBudget b = compute_budget(config, params, r, model);
    std::vector<BerPoint> out;
    out.reserve(snr_grid_db.size());
    const double f0 = params.freq_dependence_flat();
    for (double snr_db : snr_grid_db) {
        const double n0 = config.pulse_energy / std::pow(10.0, snr_db / 10.0);
        b.noise = f0 * static_cast<double>(config.pulses_per_bit) * n0 / 2.0;
        out.push_back({snr_db, b.ber()});
    }
    return out;
}

std::vector<TableCell> interference_table(const ChannelParams& params, const Autocorrelation& r,
                                          const std::vector<double>& rates_mbps,
                                          const std::vector<int>& user_counts,
                                          const AnalyticModelParams& model) {
    std::vector<TableCell> out;
    for (double rate : rates_mbps) {
        for (int users : user_counts) {
            SystemConfig cfg = make_system_config(rate, users, params);
            TableCell cell{rate, users, 0.0, 0.0, 0.0};
            cell.iasi = iasi_var(cfg, params, r, model).value;
            const double os = omega_sigma(params, cfg, model).value;
            cell.isi = isi_var(cfg, params, r, os, model).value;
            cell.mui = mui_var(cfg, params, r, os, model).value;
            out.push_back(cell);
        }
    }
    return out;
}

}  // namespace uwb
