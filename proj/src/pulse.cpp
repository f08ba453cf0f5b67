#include "uwb/pulse.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "uwb/fft.hpp"

namespace uwb {

double Pulse::energy() const {
    double s = 0.0;
    for (double v : samples) s += v * v;
    return s * dt;
}

void Pulse::normalize_energy() {
    const double e = energy();
    if (e <= 0.0) throw std::domain_error("normalize_energy: zero-energy pulse");
    const double g = 1.0 / std::sqrt(e);
    for (double& v : samples) v *= g;
}

void SpectralMask::validate() const {
    if (segments.empty()) throw std::invalid_argument("mask: no segments");
    for (size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].f_hi_mhz <= segments[i].f_lo_mhz)
            throw std::invalid_argument("mask: empty or inverted segment");
        if (i > 0 && segments[i].f_lo_mhz < segments[i - 1].f_hi_mhz)
            throw std::invalid_argument("mask: overlapping or unsorted segments");
    }
    if (passbands().empty()) throw std::invalid_argument("mask: no passband (0 dB) segment");
}

double SpectralMask::ceiling_db_at(double f_mhz, bool* covered) const {
    // shared segment boundaries take the stricter ceiling
    bool hit = false;
    double ceiling = 0.0;
    for (const MaskSegment& s : segments) {
        if (f_mhz >= s.f_lo_mhz && f_mhz <= s.f_hi_mhz) {
            ceiling = hit ? std::min(ceiling, s.ceiling_db) : s.ceiling_db;
            hit = true;
        }
    }
    if (covered) *covered = hit;
    return ceiling;
}

std::vector<MaskSegment> SpectralMask::passbands() const {
    std::vector<MaskSegment> out;
    for (const MaskSegment& s : segments)
        if (s.ceiling_db == 0.0) out.push_back(s);
    return out;
}

// Guard bands step from a -4 dB shoulder down to the -30 dB skirt and a
// -50 dB far floor. The 900 MHz step width is set by the spectral resolution
// of the 19-kernel bank (~0.76 ns aperture), which cannot realize a 30 dB
// cliff at the band edge.
SpectralMask band_mask(double f_lo_mhz, double f_hi_mhz) {
    if (!(f_hi_mhz > f_lo_mhz && f_lo_mhz > 0))
        throw std::invalid_argument("band_mask: need 0 < f_lo < f_hi");
    const double w = 900.0;  // MHz per ladder step
    const std::vector<double> levels{-4.0, -14.0, -24.0, -30.0};
    std::vector<MaskSegment> segs;
    // low side, clipped at DC; anything below the ladder keeps the skirt level
    for (size_t i = 0; i < levels.size(); ++i) {
        const double hi = f_lo_mhz - w * static_cast<double>(i);
        double lo = f_lo_mhz - w * static_cast<double>(i + 1);
        if (i + 1 == levels.size()) lo = std::min(lo, 0.0);
        if (hi <= 0.0) break;
        segs.push_back({std::max(lo, 0.0), hi, levels[i]});
    }
    if (!segs.empty() && segs.back().f_lo_mhz > 0.0)
        segs.push_back({0.0, segs.back().f_lo_mhz, -50.0});
    segs.push_back({f_lo_mhz, f_hi_mhz, 0.0});
    for (size_t i = 0; i < levels.size(); ++i)
        segs.push_back({f_hi_mhz + w * static_cast<double>(i), f_hi_mhz + w * static_cast<double>(i + 1),
                        levels[i]});
    segs.push_back({f_hi_mhz + w * static_cast<double>(levels.size()), 40000.0, -50.0});
    std::sort(segs.begin(), segs.end(),
              [](const MaskSegment& x, const MaskSegment& y) { return x.f_lo_mhz < y.f_lo_mhz; });
    SpectralMask m;
    m.segments = segs;
    return m;
}

SpectralMask lower_band_mask() { return band_mask(3244.0, 4742.0); }
SpectralMask upper_band_mask() { return band_mask(5944.0, 10234.0); }

KernelBank build_kernel_bank(int count, double spacing, double sigma, double dt) {
    if (count < 1) throw std::invalid_argument("kernel bank: count must be >= 1");
    if (spacing <= 0 || sigma <= 0 || dt <= 0)
        throw std::invalid_argument("kernel bank: spacing, sigma and dt must be > 0");
    const double ratio = spacing / dt;
    if (std::fabs(ratio - std::round(ratio)) * dt > 1e-12)
        throw std::invalid_argument("kernel bank: dt must divide spacing");
    KernelBank b;
    b.count = count;
    b.spacing = spacing;
    b.sigma = sigma;
    b.dt = dt;
    b.coefficients.assign(static_cast<size_t>(count), 1.0 / std::sqrt(static_cast<double>(count)));
    return b;
}

namespace {

constexpr double kTailSigmas = 5.0;

double kernel_center(const KernelBank& b, int j) { return b.spacing * static_cast<double>(j); }

// |G(f)|^2 envelope of the Gaussian kernel at frequency f (GHz); the constant
// amplitude factor is absorbed by the coefficients.
double kernel_esd(const KernelBank& b, double f_ghz) {
    const double x = 2.0 * M_PI * f_ghz * b.sigma;
    return std::exp(-x * x);
}

// Exact ESD of the bank at f (GHz): |G|^2 * ((v.c)^2 + (w.c)^2).
double bank_esd(const KernelBank& b, const std::vector<double>& c, double f_ghz) {
    double re = 0.0, im = 0.0;
    for (int j = 0; j < b.count; ++j) {
        const double ph = 2.0 * M_PI * f_ghz * kernel_center(b, j);
        re += c[static_cast<size_t>(j)] * std::cos(ph);
        im += c[static_cast<size_t>(j)] * std::sin(ph);
    }
    return kernel_esd(b, f_ghz) * (re * re + im * im);
}

}  // namespace

Pulse render_pulse(const KernelBank& bank) {
    if (bank.coefficients.size() != static_cast<size_t>(bank.count))
        throw std::invalid_argument("render_pulse: coefficient count mismatch");
    const double tail = kTailSigmas * bank.sigma;
    const double t_lo = -tail;
    const double t_hi = bank.spacing * static_cast<double>(bank.count - 1) + tail;
    const size_t n = static_cast<size_t>(std::ceil((t_hi - t_lo) / bank.dt)) + 1;
    Pulse p;
    p.dt = bank.dt;
    p.t0 = t_lo;
    p.samples.assign(n, 0.0);
    const double inv2s2 = 1.0 / (2.0 * bank.sigma * bank.sigma);
    for (size_t i = 0; i < n; ++i) {
        const double t = t_lo + bank.dt * static_cast<double>(i);
        double v = 0.0;
        for (int j = 0; j < bank.count; ++j) {
            const double d = t - kernel_center(bank, j);
            v += bank.coefficients[static_cast<size_t>(j)] * std::exp(-d * d * inv2s2);
        }
        p.samples[i] = v;
    }
    return p;
}

namespace {

using Matrix = std::vector<double>;  // n x n row-major

void sym_rank2_add(Matrix& m, int n, const std::vector<double>& v, const std::vector<double>& w,
                   double scale) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m[static_cast<size_t>(i * n + j)] +=
                scale * (v[static_cast<size_t>(i)] * v[static_cast<size_t>(j)] +
                         w[static_cast<size_t>(i)] * w[static_cast<size_t>(j)]);
}

std::vector<double> mat_vec(const Matrix& m, int n, const std::vector<double>& x) {
    std::vector<double> y(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += m[static_cast<size_t>(i * n + j)] * x[static_cast<size_t>(j)];
        y[static_cast<size_t>(i)] = acc;
    }
    return y;
}

// Gaussian elimination with partial pivoting; m is consumed.
std::vector<double> solve_dense(Matrix m, int n, std::vector<double> b) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m[static_cast<size_t>(r * n + col)]) > std::fabs(m[static_cast<size_t>(piv * n + col)]))
                piv = r;
        if (piv != col) {
            for (int j = 0; j < n; ++j)
                std::swap(m[static_cast<size_t>(col * n + j)], m[static_cast<size_t>(piv * n + j)]);
            std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
        }
        const double d = m[static_cast<size_t>(col * n + col)];
        if (d == 0.0) throw std::runtime_error("singular system in pulse synthesis");
        for (int r = col + 1; r < n; ++r) {
            const double f = m[static_cast<size_t>(r * n + col)] / d;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j)
                m[static_cast<size_t>(r * n + j)] -= f * m[static_cast<size_t>(col * n + j)];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[static_cast<size_t>(r)];
        for (int j = r + 1; j < n; ++j) acc -= m[static_cast<size_t>(r * n + j)] * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(r)] = acc / m[static_cast<size_t>(r * n + r)];
    }
    return x;
}

// Closed-form total spectral energy matrix of the Gaussian bank:
// E_ij = integral over all f of |G(f)|^2 cos(2 pi f (t_i - t_j)) df.
Matrix total_energy_matrix(const KernelBank& bank) {
    const int n = bank.count;
    Matrix e(static_cast<size_t>(n * n), 0.0);
    const double front = std::sqrt(M_PI) / (2.0 * M_PI * bank.sigma);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double dt = bank.spacing * static_cast<double>(i - j);
            e[static_cast<size_t>(i * n + j)] = front * std::exp(-dt * dt / (4.0 * bank.sigma * bank.sigma));
        }
    return e;
}

}  // namespace

Pulse synthesize_pulse(KernelBank& bank, const SpectralMask& mask, const SynthesisOptions& opt) {
    mask.validate();
    const int n = bank.count;

    // frequency grid with every segment edge included
    std::vector<double> grid;
    for (double f = opt.grid_lo_mhz; f <= opt.grid_hi_mhz + 1e-9; f += opt.grid_step_mhz)
        grid.push_back(f);
    for (const MaskSegment& s : mask.segments) {
        if (s.f_lo_mhz > 0 && s.f_lo_mhz < opt.grid_hi_mhz) grid.push_back(s.f_lo_mhz);
        if (s.f_hi_mhz < opt.grid_hi_mhz) grid.push_back(s.f_hi_mhz);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    struct GridPoint {
        std::vector<double> cosv, sinv;  // |G| cos / |G| sin rows
        double ceiling = -1.0;           // linear, margin applied; < 0 means uncovered
        double band_weight = 0.0;        // df weight inside a passband
        double lawson_weight = 0.0;
    };
    std::vector<GridPoint> pts(grid.size());
    const double margin = std::pow(10.0, -opt.margin_db / 10.0);
    for (size_t i = 0; i < grid.size(); ++i) {
        const double f_ghz = grid[i] / 1000.0;
        const double env = std::sqrt(kernel_esd(bank, f_ghz));
        pts[i].cosv.resize(static_cast<size_t>(n));
        pts[i].sinv.resize(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) {
            const double ph = 2.0 * M_PI * f_ghz * kernel_center(bank, j);
            pts[i].cosv[static_cast<size_t>(j)] = env * std::cos(ph);
            pts[i].sinv[static_cast<size_t>(j)] = env * std::sin(ph);
        }
        bool covered = false;
        const double ceil_db = mask.ceiling_db_at(grid[i], &covered);
        if (covered) pts[i].ceiling = std::pow(10.0, ceil_db / 10.0) * margin;
        if (covered && ceil_db == 0.0) {
            const double df_lo = (i > 0) ? 0.5 * (grid[i] - grid[i - 1]) : 0.0;
            const double df_hi = (i + 1 < grid.size()) ? 0.5 * (grid[i + 1] - grid[i]) : 0.0;
            pts[i].band_weight = (df_lo + df_hi) / 1000.0;  // GHz
        } else if (covered) {
            pts[i].lawson_weight = 1.0;
        }
    }

    auto esd_at = [&](const std::vector<double>& c, const GridPoint& g) {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < n; ++j) {
            re += c[static_cast<size_t>(j)] * g.cosv[static_cast<size_t>(j)];
            im += c[static_cast<size_t>(j)] * g.sinv[static_cast<size_t>(j)];
        }
        return re * re + im * im;
    };
    // worst PSD-over-ceiling ratio relative to the in-band peak
    auto relative_violation = [&](const std::vector<double>& c) {
        double peak = 0.0;
        for (const GridPoint& g : pts)
            if (g.band_weight > 0.0) peak = std::max(peak, esd_at(c, g));
        if (peak <= 0.0) return 1e300;
        double worst = 0.0;
        for (const GridPoint& g : pts) {
            if (g.ceiling <= 0.0 || g.band_weight > 0.0) continue;
            worst = std::max(worst, esd_at(c, g) / (g.ceiling * peak));
        }
        return worst;
    };

    Matrix a(static_cast<size_t>(n * n), 0.0);
    for (const GridPoint& g : pts)
        if (g.band_weight > 0.0) sym_rank2_add(a, n, g.cosv, g.sinv, g.band_weight);
    const Matrix e_total = total_energy_matrix(bank);

    auto fraction_of = [&](const std::vector<double>& c) {
        const std::vector<double> ac = mat_vec(a, n, c);
        const std::vector<double> ec = mat_vec(e_total, n, c);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < n; ++j) {
            num += c[static_cast<size_t>(j)] * ac[static_cast<size_t>(j)];
            den += c[static_cast<size_t>(j)] * ec[static_cast<size_t>(j)];
        }
        // E integrates both frequency half-axes; the passband sum is one-sided
        return (den > 0.0) ? num / (0.5 * den) : 0.0;
    };

    const std::vector<double> all_equal(static_cast<size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));

    // Stage 1: reweighted dominant-eigenvector passes drive the out-of-band
    // ceilings to feasibility; weights grow where the relative PSD exceeds
    // its ceiling (Lawson style), with the exponent annealed upward.
    std::vector<double> best;
    double best_fraction = -1.0;
    double closest_violation = 1e300;
    std::vector<double> c = all_equal;
    for (int round = 0; round < 300; ++round) {
        Matrix b(static_cast<size_t>(n * n), 0.0);
        double wsum = 0.0;
        for (const GridPoint& g : pts) wsum += g.lawson_weight;
        for (const GridPoint& g : pts)
            if (g.lawson_weight > 0.0) sym_rank2_add(b, n, g.cosv, g.sinv, g.lawson_weight / (wsum * g.ceiling));
        double tr = 0.0;
        for (int i = 0; i < n; ++i) tr += b[static_cast<size_t>(i * n + i)];
        for (int i = 0; i < n; ++i) b[static_cast<size_t>(i * n + i)] += 1e-10 * tr;

        for (int it = 0; it < 60; ++it) {
            std::vector<double> y = solve_dense(b, n, mat_vec(a, n, c));
            double norm = 0.0;
            for (double v : y) norm += v * v;
            norm = std::sqrt(norm);
            if (norm == 0.0) break;
            for (double& v : y) v /= norm;
            c = y;
        }

        const double viol = relative_violation(c);
        closest_violation = std::min(closest_violation, viol);
        if (viol <= 1.0) {
            const double f = fraction_of(c);
            if (f > best_fraction) {
                best_fraction = f;
                best = c;
            }
        }
        // multiplicative weight update on the margin-relative violation
        double peak = 0.0;
        for (const GridPoint& g : pts)
            if (g.band_weight > 0.0) peak = std::max(peak, esd_at(c, g));
        const double expo = (round < 60) ? 0.5 : (round < 180 ? 0.9 : 1.3);
        for (GridPoint& g : pts) {
            if (g.lawson_weight <= 0.0) continue;
            const double r = esd_at(c, g) / (g.ceiling * peak);
            g.lawson_weight = std::clamp(g.lawson_weight * std::pow(std::max(r, 0.05), expo), 1e-8, 1e12);
        }
    }
    if (best.empty()) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "synthesize_pulse: no mask-compliant pulse reachable on this grid "
                      "(closest shape exceeds a ceiling by %.2f dB)",
                      10.0 * std::log10(closest_violation));
        throw std::runtime_error(msg);
    }
    c = best;

    // Stage 2: projected gradient ascent on the in-band energy fraction (a
    // scale-invariant Rayleigh quotient, so the normalized pulse is what is
    // being optimized); steps that break relative compliance are rejected
    // along with non-improving ones (step halving).
    auto scale_to_ceilings = [&](std::vector<double>& v) {
        double worst = 0.0;
        for (const GridPoint& g : pts)
            if (g.ceiling > 0.0) worst = std::max(worst, esd_at(v, g) / g.ceiling);
        if (worst > 0.0) {
            const double s = 1.0 / std::sqrt(worst);
            for (double& x : v) x *= s;
        }
    };
    scale_to_ceilings(c);
    double obj = fraction_of(c);
    std::vector<double> trial(static_cast<size_t>(n));
    double step = 0.1;
    for (int it = 0; it < opt.max_iterations; ++it) {
        // gradient of (c'Ac)/(c'Ec): 2/(c'Ec) * (Ac - obj * Ec)
        const std::vector<double> ac = mat_vec(a, n, c);
        const std::vector<double> ec = mat_vec(e_total, n, c);
        double den = 0.0;
        for (int j = 0; j < n; ++j) den += c[static_cast<size_t>(j)] * ec[static_cast<size_t>(j)];
        // fraction uses E/2 (one-sided); the constant only rescales the step
        std::vector<double> grad(static_cast<size_t>(n));
        double gnorm = 0.0;
        for (int j = 0; j < n; ++j) {
            grad[static_cast<size_t>(j)] =
                (ac[static_cast<size_t>(j)] - obj * 0.5 * ec[static_cast<size_t>(j)]) / den;
            gnorm += grad[static_cast<size_t>(j)] * grad[static_cast<size_t>(j)];
        }
        if (gnorm == 0.0) break;

        bool improved = false;
        for (int halvings = 0; halvings < 50 && !improved; ++halvings) {
            for (int j = 0; j < n; ++j)
                trial[static_cast<size_t>(j)] =
                    c[static_cast<size_t>(j)] + step * grad[static_cast<size_t>(j)] / std::sqrt(gnorm);
            scale_to_ceilings(trial);
            const double t_obj = fraction_of(trial);
            if (t_obj > obj && relative_violation(trial) <= 1.0) {
                const double rel = (t_obj - obj) / t_obj;
                c = trial;
                obj = t_obj;
                improved = true;
                step *= 1.3;
                if (rel < opt.tol) it = opt.max_iterations;  // converged
            } else {
                step *= 0.5;
            }
        }
        if (!improved) break;
    }
    scale_to_ceilings(c);

    bank.coefficients = c;
    Pulse p = render_pulse(bank);
    p.normalize_energy();
    return p;
}

double in_band_energy_fraction(const KernelBank& bank, const SpectralMask& mask) {
    const std::vector<double>& c = bank.coefficients;
    if (c.size() != static_cast<size_t>(bank.count))
        throw std::invalid_argument("in_band_energy_fraction: coefficient count mismatch");
    double band = 0.0;
    for (const MaskSegment& s : mask.passbands()) {
        const double df = 2.0;  // MHz; spectral features are far wider
        double prev = bank_esd(bank, c, s.f_lo_mhz / 1000.0);
        for (double f = s.f_lo_mhz + df; f <= s.f_hi_mhz + 1e-9; f += df) {
            const double cur = bank_esd(bank, c, f / 1000.0);
            band += 0.5 * (prev + cur) * df / 1000.0;
            prev = cur;
        }
    }
    const Matrix e_total = total_energy_matrix(bank);
    double total = 0.0;
    for (int i = 0; i < bank.count; ++i)
        for (int j = 0; j < bank.count; ++j)
            total += c[static_cast<size_t>(i)] * c[static_cast<size_t>(j)] *
                     e_total[static_cast<size_t>(i * bank.count + j)];
    // the closed form counts both frequency half-axes
    return (total > 0.0) ? band / (0.5 * total) : 0.0;
}

Spectrum psd(const Pulse& pulse, size_t nfft) {
    if (pulse.samples.empty()) throw std::invalid_argument("psd: empty pulse");
    if (nfft < pulse.samples.size()) throw std::invalid_argument("psd: nfft < sample count");
    nfft = next_pow2(nfft);
    std::vector<std::complex<double>> buf(nfft, 0.0);
    for (size_t i = 0; i < pulse.samples.size(); ++i) buf[i] = pulse.samples[i];
    fft(buf, -1);

    Spectrum s;
    const double df_ghz = 1.0 / (pulse.dt * static_cast<double>(nfft));
    s.df_mhz = 1000.0 * df_ghz;
    const size_t half = nfft / 2;
    s.freq_mhz.resize(half + 1);
    s.esd.resize(half + 1);
    for (size_t k = 0; k <= half; ++k) {
        const double mag = std::abs(buf[k]) * pulse.dt;
        const double fold = (k == 0 || k == half) ? 1.0 : 2.0;
        s.freq_mhz[k] = s.df_mhz * static_cast<double>(k);
        s.esd[k] = fold * mag * mag;
    }
    return s;
}

double Spectrum::total() const {
    double acc = 0.0;
    for (double v : esd) acc += v;
    return acc * df_mhz / 1000.0;
}

std::vector<double> Spectrum::db_peak_normalized() const {
    double peak = 0.0;
    for (double v : esd) peak = std::max(peak, v);
    std::vector<double> db(esd.size());
    for (size_t i = 0; i < esd.size(); ++i)
        db[i] = (esd[i] > 0.0 && peak > 0.0) ? 10.0 * std::log10(esd[i] / peak) : -400.0;
    return db;
}

Autocorrelation autocorrelation(const Pulse& pulse) {
    const size_t n = pulse.samples.size();
    if (n == 0) throw std::invalid_argument("autocorrelation: empty pulse");
    const size_t nfft = next_pow2(2 * n);
    std::vector<std::complex<double>> buf(nfft, 0.0);
    for (size_t i = 0; i < n; ++i) buf[i] = pulse.samples[i];
    fft(buf, -1);
    for (auto& v : buf) v = std::norm(v);
    fft(buf, +1);

    Autocorrelation r;
    r.dt = pulse.dt;
    r.half.resize(n);
    const double e = pulse.energy();
    for (size_t k = 0; k < n; ++k) r.half[k] = buf[k].real() * pulse.dt / e;
    r.half[0] = 1.0;  // exact by definition after normalization

    // prefix integrals of R^2; R is linear within each lag step, so Simpson
    // on each segment is exact for the interpolant
    r.cum_r2_.assign(n, 0.0);
    for (size_t k = 1; k < n; ++k) {
        const double a = r.half[k - 1], b = r.half[k];
        const double mid = 0.5 * (a + b);
        r.cum_r2_[k] = r.cum_r2_[k - 1] + r.dt * (a * a + 4.0 * mid * mid + b * b) / 6.0;
    }
    return r;
}

double Autocorrelation::at(double lag_ns) const {
    const double x = std::fabs(lag_ns);
    const double pos = x / dt;
    const size_t k = static_cast<size_t>(pos);
    if (k + 1 >= half.size()) return (k < half.size() && pos == static_cast<double>(k)) ? half[k] : 0.0;
    const double frac = pos - static_cast<double>(k);
    return half[k] + frac * (half[k + 1] - half[k]);
}

double Autocorrelation::integral_r2(double a, double b) const {
    a = std::max(0.0, a);
    b = std::min(b, max_lag());
    if (b <= a) return 0.0;
    auto partial = [&](double x) {  // integral of R^2 over [k*dt, x] inside one segment
        const size_t k = static_cast<size_t>(x / dt);
        if (k + 1 >= half.size()) return cum_r2_.back();
        const double u = x - static_cast<double>(k) * dt;
        const double s = (half[k + 1] - half[k]) / dt;
        const double y0 = half[k];
        return cum_r2_[k] + y0 * y0 * u + y0 * s * u * u + s * s * u * u * u / 3.0;
    };
    return partial(b) - partial(a);
}

MaskReport check_mask(const Pulse& pulse, const SpectralMask& mask) {
    mask.validate();
    const size_t nfft = std::max<size_t>(next_pow2(8 * pulse.samples.size()), 1u << 16);
    const Spectrum s = psd(pulse, nfft);
    const std::vector<double> db = s.db_peak_normalized();
    MaskReport rep;
    rep.compliant = true;
    rep.worst_violation_db = -1e300;
    for (size_t i = 0; i < s.freq_mhz.size(); ++i) {
        bool covered = false;
        const double ceil_db = mask.ceiling_db_at(s.freq_mhz[i], &covered);
        if (!covered) continue;
        const double excess = db[i] - ceil_db;
        if (excess > rep.worst_violation_db) {
            rep.worst_violation_db = excess;
            rep.worst_freq_mhz = s.freq_mhz[i];
        }
    }
    rep.compliant = rep.worst_violation_db <= 1e-9;
    return rep;
}

void save_pulse(const Pulse& pulse, std::ostream& os) {
    os << "# t_ns amplitude (dt=" << pulse.dt << ")\n";
    char buf[80];
    for (size_t i = 0; i < pulse.samples.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g %.12g\n", pulse.t0 + pulse.dt * static_cast<double>(i),
                      pulse.samples[i]);
        os << buf;
    }
}

void save_pulse_file(const Pulse& pulse, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    save_pulse(pulse, os);
}

Pulse load_pulse(std::istream& is) {
    Pulse p;
    std::string line;
    std::vector<double> times;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double t, v;
        if (ls >> t >> v) {
            times.push_back(t);
            p.samples.push_back(v);
        }
    }
    if (times.size() < 2) throw std::runtime_error("pulse file must contain at least two samples");
    p.t0 = times.front();
    p.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    return p;
}

Pulse load_pulse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return load_pulse(is);
}

void save_psd_file(const Spectrum& spec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "# f_mhz psd_db\n";
    const std::vector<double> db = spec.db_peak_normalized();
    char buf[80];
    for (size_t i = 0; i < spec.freq_mhz.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6g %.6g\n", spec.freq_mhz[i], db[i]);
        os << buf;
    }
}

}  // namespace uwb
