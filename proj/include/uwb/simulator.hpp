#pragma once

#include <cstdint>
#include <vector>

#include "uwb/analytic.hpp"
#include "uwb/channel.hpp"
#include "uwb/pulse.hpp"
#include "uwb/rng.hpp"

namespace uwb {

// Per-frame hop indices, each in {1, ..., N_h}.
struct ThCode {
    std::vector<int> hops;
    int user = 0;
};

ThCode generate_th_code(const SystemConfig& config, Rng& rng);

struct UserLink {
    ThCode code;
    double delay = 0.0;  // reference delay tau^(n); user 1 pinned to 0
    ChannelRealization channel;
    std::vector<int> bits;  // +1/-1 stream, index = bit number
};

// Transmitted N_s-pulse train of one bit, on the shared sample grid.
Pulse transmit_waveform(const SystemConfig& config, const UserLink& link, int bit_index,
                        const Pulse& pulse);

// Template locked to user 1's first-cluster first-ray (both at delay 0);
// unscaled by sqrt(E_p).
Pulse receiver_template(const SystemConfig& config, const ThCode& code, const Pulse& pulse);

// Additive constituents of the received waveform around one decision bit,
// all on a common grid over [t_lo, t_hi].
struct ReceivedParts {
    Pulse desired;  // user 1, decision bit, locked ray only
    Pulse iasi;     // user 1, decision bit, all other rays
    Pulse isi;      // user 1, other bits through the channel
    Pulse mui;      // every other user
    Pulse noise;

    Pulse sum() const;
};

ReceivedParts received_signal_parts(const SystemConfig& config, const std::vector<UserLink>& links,
                                    const Pulse& pulse, double n0, Rng& rng, double t_lo, double t_hi,
                                    int decision_bit);

// Convenience: the summed waveform (per-user channel convolution,
// asynchronous delays, previous-period pulses, per-sample AWGN).
Pulse received_signal(const SystemConfig& config, const std::vector<UserLink>& links, const Pulse& pulse,
                      double n0, Rng& rng, double t_lo, double t_hi, int decision_bit = 0);

// dt-scaled inner product over the overlap of two grid-aligned waveforms.
double correlate(const Pulse& received, const Pulse& tmpl);

struct Decision {
    double z = 0.0;
    int decision = +1;  // ties resolve to +1
    bool correct = false;
    double zu = 0.0, zn = 0.0, ziasi = 0.0, zisi = 0.0, zmui = 0.0;
    bool instrumented = false;
};

Decision correlate_decide(const Pulse& received, const Pulse& tmpl, int truth_bit);
Decision correlate_decide(const ReceivedParts& parts, const Pulse& tmpl, int truth_bit);

struct StopRule {
    long min_errors = 100;
    long max_bits = 10000000;
};

struct SimOptions {
    int block_bits = 100;  // bits per channel-realization block
    int threads = 1;
    bool instrument = false;  // accumulate Z-component moments
};

// Running first/second moments of (Z_u, Z_n, Z_IASI, Z_ISI, Z_MUI).
struct ComponentMoments {
    long bits = 0;
    double sum[5] = {0, 0, 0, 0, 0};
    double sum2[5] = {0, 0, 0, 0, 0};

    void merge(const ComponentMoments& o);
    double mean(int i) const { return bits ? sum[i] / static_cast<double>(bits) : 0.0; }
    double variance(int i) const;
    double second_moment(int i) const { return bits ? sum2[i] / static_cast<double>(bits) : 0.0; }
};

struct BerPointResult {
    double snr_db = 0.0;
    double ber = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // 95% binomial interval
    long errors = 0;
    long bits = 0;
    double seconds = 0.0;
    ComponentMoments components;
};

// Seeded end-to-end BER estimate. A fresh channel realization (and fresh
// codes, delays and interferer channels) is drawn per block; blocks are
// deterministic substreams of the seed, so results are bit-identical for a
// given seed regardless of thread count. The correlator is coherently locked
// to the desired ray, tracking its polarity.
std::vector<BerPointResult> estimate_ber(const SystemConfig& config, const ChannelParams& params,
                                         const Pulse& pulse, const std::vector<double>& snr_grid_db,
                                         const StopRule& stop, uint64_t seed, const SimOptions& opt = {});

// True when the pulse support exceeds the hop slot, i.e. hopped pulses may
// overlap; callers surface this as a warning, not an error.
bool pulse_exceeds_chip(const SystemConfig& config, const Pulse& pulse);

}  // namespace uwb
