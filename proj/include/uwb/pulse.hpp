#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace uwb {

// Uniformly sampled real waveform. dt in ns; t0 is the time of samples[0].
struct Pulse {
    std::vector<double> samples;
    double dt = 0.005;
    double t0 = 0.0;

    double energy() const;  // integral of p^2 dt (linear)
    void normalize_energy();
    double span() const { return dt * static_cast<double>(samples.size() ? samples.size() - 1 : 0); }
};

struct MaskSegment {
    double f_lo_mhz;
    double f_hi_mhz;
    double ceiling_db;  // relative to the 0 dB passband ceiling
};

// Piecewise-constant PSD ceiling. Segments sorted, non-overlapping.
struct SpectralMask {
    std::vector<MaskSegment> segments;
    void validate() const;
    double ceiling_db_at(double f_mhz, bool* covered = nullptr) const;
    // passband = segments at the 0 dB ceiling
    std::vector<MaskSegment> passbands() const;
};

// Default masks for the two allocated bands: 0 dB across the passband,
// -30 dB outside it, -50 dB beyond 1.5x the band edges.
SpectralMask band_mask(double f_lo_mhz, double f_hi_mhz);
SpectralMask lower_band_mask();  // [3244, 4742] MHz
SpectralMask upper_band_mask();  // [5944, 10234] MHz

struct KernelBank {
    int count = 19;
    double spacing = 0.04;  // ns between kernel centers
    double sigma = 0.04;    // ns, Gaussian kernel width
    double dt = 0.005;      // ns, sample interval of rendered pulses
    std::vector<double> coefficients;
};

KernelBank build_kernel_bank(int count, double spacing, double sigma, double dt);

// Time-domain assembly of the bank with its current coefficients.
Pulse render_pulse(const KernelBank& bank);

struct SynthesisOptions {
    double grid_lo_mhz = 0.0;
    double grid_hi_mhz = 16000.0;
    double grid_step_mhz = 10.0;
    double margin_db = 0.25;  // enforcement headroom below the mask ceilings
    double tol = 1e-8;        // relative objective-change convergence threshold
    int max_iterations = 20000;
};

// Mask-constrained synthesis: maximizes in-band energy over the kernel
// coefficients subject to per-grid-point PSD ceilings, by projected gradient
// ascent with deterministic initialization and step halving. The bank's
// coefficients are updated in place; the returned pulse is energy-normalized.
Pulse synthesize_pulse(KernelBank& bank, const SpectralMask& mask, const SynthesisOptions& opt = {});

// Fraction of pulse energy inside the mask's passband segments (exact
// closed-form spectrum of the bank, adaptive in frequency).
double in_band_energy_fraction(const KernelBank& bank, const SpectralMask& mask);

struct Spectrum {
    std::vector<double> freq_mhz;  // one-sided, 0..Nyquist
    std::vector<double> esd;       // energy spectral density per GHz (linear)
    double df_mhz = 0.0;

    double total() const;  // sum esd * df, equals pulse energy by Parseval
    std::vector<double> db_peak_normalized() const;
};

// Magnitude-squared spectrum of the sampled pulse; nfft >= sample count
// (rounded up internally to a power of two).
Spectrum psd(const Pulse& pulse, size_t nfft);

// Dense autocorrelation table over lags [-span, span], step = pulse dt.
// R(0) = 1 for an energy-normalized pulse; linear interpolation between lags,
// zero outside the table.
struct Autocorrelation {
    std::vector<double> half;  // R at lags k*dt, k = 0..n-1 (even extension)
    double dt = 0.005;

    double at(double lag_ns) const;
    double max_lag() const { return dt * static_cast<double>(half.size() ? half.size() - 1 : 0); }
    // integral of R^2 over [a, b] with 0 <= a <= b, exact for the
    // piecewise-linear interpolant
    double integral_r2(double a, double b) const;

private:
    friend Autocorrelation autocorrelation(const Pulse&);
    std::vector<double> cum_r2_;  // prefix integrals of R^2 at lag grid points
};

Autocorrelation autocorrelation(const Pulse& pulse);

struct MaskReport {
    bool compliant = false;
    double worst_violation_db = 0.0;  // > 0 means above the ceiling
    double worst_freq_mhz = 0.0;
};

// Exhaustive grid check of the peak-normalized PSD against the mask.
MaskReport check_mask(const Pulse& pulse, const SpectralMask& mask);

// two-column text I/O (t ns, amplitude)
void save_pulse(const Pulse& pulse, std::ostream& os);
void save_pulse_file(const Pulse& pulse, const std::string& path);
Pulse load_pulse(std::istream& is);
Pulse load_pulse_file(const std::string& path);
void save_psd_file(const Spectrum& spec, const std::string& path);

}  // namespace uwb
