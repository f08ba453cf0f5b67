#include "uwb/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace uwb {

namespace {

long grid_index(double t, double dt) { return std::lround(t / dt); }

// Template pulse positions (bank origin times) for one bit at symbol time 0.
std::vector<double> template_positions(const SystemConfig& config, const ThCode& code) {
    if (static_cast<int>(code.hops.size()) != config.pulses_per_bit)
        throw std::invalid_argument("code length must equal pulses_per_bit");
    std::vector<double> pos(code.hops.size());
    for (size_t j = 0; j < code.hops.size(); ++j) {
        const int c = code.hops[j];
        if (c < 0 || c > config.hop_cardinality)
            throw std::invalid_argument("hop index out of range");
        pos[j] = config.frame_time() * static_cast<double>(j) +
                 config.chip_time * static_cast<double>(c);
    }
    return pos;
}

void add_copy(Pulse& w, const Pulse& pulse, double position, double amplitude) {
    const long base = grid_index(position + pulse.t0, w.dt) - grid_index(w.t0, w.dt);
    for (size_t i = 0; i < pulse.samples.size(); ++i) {
        const long k = base + static_cast<long>(i);
        if (k < 0 || k >= static_cast<long>(w.samples.size())) continue;
        w.samples[static_cast<size_t>(k)] += amplitude * pulse.samples[i];
    }
}

Pulse empty_waveform(double t_lo, double t_hi, double dt) {
    Pulse w;
    w.dt = dt;
    w.t0 = static_cast<double>(grid_index(t_lo, dt)) * dt;
    const size_t n = static_cast<size_t>(std::max<long>(1, grid_index(t_hi, dt) - grid_index(t_lo, dt) + 1));
    w.samples.assign(n, 0.0);
    return w;
}

}  // namespace

ThCode generate_th_code(const SystemConfig& config, Rng& rng) {
    config.validate();
    ThCode code;
    code.hops.resize(static_cast<size_t>(config.pulses_per_bit));
    for (int& c : code.hops) c = rng.uniform_int(1, config.hop_cardinality);
    return code;
}

Pulse transmit_waveform(const SystemConfig& config, const UserLink& link, int bit_index,
                        const Pulse& pulse) {
    if (bit_index < 0 || static_cast<size_t>(bit_index) >= link.bits.size())
        throw std::out_of_range("transmit_waveform: bit index outside the stream");
    const std::vector<double> pos = template_positions(config, link.code);
    const double sym = config.symbol_time() * static_cast<double>(bit_index);
    const double amp = std::sqrt(config.pulse_energy) * static_cast<double>(link.bits[static_cast<size_t>(bit_index)]);
    const double lo = sym + pos.front() + pulse.t0;
    const double hi = sym + pos.back() + pulse.t0 + pulse.span();
    Pulse w = empty_waveform(lo, hi, pulse.dt);
    for (double p : pos) add_copy(w, pulse, sym + p, amp);
    return w;
}

Pulse receiver_template(const SystemConfig& config, const ThCode& code, const Pulse& pulse) {
    const std::vector<double> pos = template_positions(config, code);
    const double lo = pos.front() + pulse.t0;
    const double hi = pos.back() + pulse.t0 + pulse.span();
    Pulse w = empty_waveform(lo, hi, pulse.dt);
    for (double p : pos) add_copy(w, pulse, p, 1.0);
    return w;
}

ReceivedParts received_signal_parts(const SystemConfig& config, const std::vector<UserLink>& links,
                                    const Pulse& pulse, double n0, Rng& rng, double t_lo, double t_hi,
                                    int decision_bit) {
    config.validate();
    if (links.empty()) throw std::invalid_argument("received_signal: no links");
    if (links[0].delay != 0.0) throw std::invalid_argument("received_signal: user 1 delay must be 0");
    if (t_hi - t_lo < config.tau_max)
        throw std::invalid_argument("received_signal: window must cover tau_max of history");

    ReceivedParts parts;
    parts.desired = empty_waveform(t_lo, t_hi, pulse.dt);
    parts.iasi = parts.desired;
    parts.isi = parts.desired;
    parts.mui = parts.desired;
    parts.noise = parts.desired;

    const double sqrt_ep = std::sqrt(config.pulse_energy);
    const double span = pulse.span();
    for (size_t n = 0; n < links.size(); ++n) {
        const UserLink& link = links[n];
        const std::vector<double> pos = template_positions(config, link.code);
        for (size_t bi = 0; bi < link.bits.size(); ++bi) {
            const double sym = config.symbol_time() * static_cast<double>(bi);
            const double amp0 = sqrt_ep * static_cast<double>(link.bits[bi]);
            for (double p : pos) {
                for (size_t ti = 0; ti < link.channel.taps.size(); ++ti) {
                    const double t_c = sym + p + link.delay + link.channel.tap_absolute_delay(ti);
                    if (t_c + pulse.t0 + span < t_lo || t_c + pulse.t0 > t_hi) continue;
                    const double amp = amp0 * link.channel.taps[ti].amplitude;
                    Pulse* dst;
                    if (n > 0) dst = &parts.mui;
                    else if (static_cast<int>(bi) != decision_bit) dst = &parts.isi;
                    else if (ti == 0 && link.channel.taps[0].cluster == 0 && link.channel.taps[0].delay == 0.0)
                        dst = &parts.desired;
                    else dst = &parts.iasi;
                    add_copy(*dst, pulse, t_c, amp);
                }
            }
        }
    }
    if (n0 > 0.0) {
        const double sigma = std::sqrt(n0 / (2.0 * pulse.dt));
        for (double& v : parts.noise.samples) v = rng.normal(0.0, sigma);
    }
    return parts;
}

Pulse ReceivedParts::sum() const {
    Pulse w = desired;
    for (size_t i = 0; i < w.samples.size(); ++i)
        w.samples[i] += iasi.samples[i] + isi.samples[i] + mui.samples[i] + noise.samples[i];
    return w;
}

Pulse received_signal(const SystemConfig& config, const std::vector<UserLink>& links, const Pulse& pulse,
                      double n0, Rng& rng, double t_lo, double t_hi, int decision_bit) {
    return received_signal_parts(config, links, pulse, n0, rng, t_lo, t_hi, decision_bit).sum();
}

double correlate(const Pulse& received, const Pulse& tmpl) {
    if (received.dt != tmpl.dt) throw std::invalid_argument("correlate: sample intervals differ");
    const long off = grid_index(tmpl.t0, tmpl.dt) - grid_index(received.t0, received.dt);
    double acc = 0.0;
    for (size_t i = 0; i < tmpl.samples.size(); ++i) {
        const long k = off + static_cast<long>(i);
        if (k < 0 || k >= static_cast<long>(received.samples.size())) continue;
        acc += received.samples[static_cast<size_t>(k)] * tmpl.samples[i];
    }
    return acc * received.dt;
}

Decision correlate_decide(const Pulse& received, const Pulse& tmpl, int truth_bit) {
    Decision d;
    d.z = correlate(received, tmpl);
    d.decision = (d.z >= 0.0) ? +1 : -1;
    d.correct = (d.decision == truth_bit);
    return d;
}

Decision correlate_decide(const ReceivedParts& parts, const Pulse& tmpl, int truth_bit) {
    Decision d;
    d.zu = correlate(parts.desired, tmpl);
    d.zn = correlate(parts.noise, tmpl);
    d.ziasi = correlate(parts.iasi, tmpl);
    d.zisi = correlate(parts.isi, tmpl);
    d.zmui = correlate(parts.mui, tmpl);
    d.z = d.zu + d.zn + d.ziasi + d.zisi + d.zmui;
    d.decision = (d.z >= 0.0) ? +1 : -1;
    d.correct = (d.decision == truth_bit);
    d.instrumented = true;
    return d;
}

void ComponentMoments::merge(const ComponentMoments& o) {
    bits += o.bits;
    for (int i = 0; i < 5; ++i) {
        sum[i] += o.sum[i];
        sum2[i] += o.sum2[i];
    }
}

double ComponentMoments::variance(int i) const {
    if (bits == 0) return 0.0;
    const double m = mean(i);
    return sum2[i] / static_cast<double>(bits) - m * m;
}

bool pulse_exceeds_chip(const SystemConfig& config, const Pulse& pulse) {
    return pulse.span() > config.chip_time;
}

namespace {

// Discrete autocorrelation of the sampled pulse at integer sample lags,
// dt-scaled: Rd[k] = dt * sum_i p_i p_{i+k}. The grid quantization of pulse
// positions (and with it the sampling-rate artifact) lives here.
struct DiscreteAutocorr {
    std::vector<double> half;  // lags 0..n-1
    double dt;

    explicit DiscreteAutocorr(const Pulse& p) : dt(p.dt) {
        const size_t n = p.samples.size();
        half.assign(n, 0.0);
        for (size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (size_t i = 0; i + k < n; ++i) acc += p.samples[i] * p.samples[i + k];
            half[k] = acc * dt;
        }
    }
    double at(long lag) const {
        const size_t a = static_cast<size_t>(lag < 0 ? -lag : lag);
        return a < half.size() ? half[a] : 0.0;
    }
};

struct BlockResult {
    long bits = 0;
    long errors = 0;
    ComponentMoments moments;
};

// One block: fresh realizations, codes, delays; Z streamed per bit from the
// per-class correlation coefficients (exact on the sample grid).
BlockResult run_block(const SystemConfig& config, const ChannelParams& params, const Pulse& pulse,
                      const DiscreteAutocorr& rd, double n0, uint64_t block_seed, int block_bits,
                      bool instrument) {
    Rng rng(block_seed);
    Rng noise_rng(mix_seed(block_seed ^ 0xa5c3e1d2b4f60789ull));

    const int users = config.users;
    const double sym = config.symbol_time();
    // deep enough that the oldest bit's echoes (hop offset plus channel spread
    // plus pulse tails) can no longer reach the template support
    const int hist =
        1 + static_cast<int>(std::ceil((config.tau_max + 2.0 * pulse.span()) / sym - 1e-12));
    const int k_lo = -1;  // one future bit can reach back into the template

    // draws in a fixed order so results do not depend on dt
    std::vector<ChannelRealization> channels;
    channels.reserve(static_cast<size_t>(users));
    for (int n = 0; n < users; ++n) channels.push_back(generate_realization(params, rng.raw()));
    std::vector<ThCode> codes;
    for (int n = 0; n < users; ++n) codes.push_back(generate_th_code(config, rng));
    std::vector<double> delays(static_cast<size_t>(users), 0.0);
    for (int n = 1; n < users; ++n) delays[static_cast<size_t>(n)] = rng.uniform(0.0, sym);

    // template sample indices and energy
    const std::vector<double> tpos = template_positions(config, codes[0]);
    std::vector<long> tidx(tpos.size());
    for (size_t j = 0; j < tpos.size(); ++j) tidx[j] = grid_index(tpos[j], pulse.dt);
    double template_energy = 0.0;
    for (long a : tidx)
        for (long b : tidx) template_energy += rd.at(a - b);
    const double noise_sigma = (n0 > 0.0) ? std::sqrt(0.5 * n0 * template_energy) : 0.0;

    // per (user, bit offset) correlation coefficients; index k - k_lo
    const int nk = hist - k_lo + 1;
    const double sqrt_ep = std::sqrt(config.pulse_energy);
    std::vector<std::vector<double>> coeff(static_cast<size_t>(users),
                                           std::vector<double>(static_cast<size_t>(nk), 0.0));
    double coeff_desired = 0.0;  // user 1, decision bit, locked ray
    const double reach = pulse.span() + 1.0;
    // coherent lock: the correlator tracks the polarity of the desired ray,
    // so a sign-flipped fading draw flips the effective template with it
    const bool lock_exists = !channels[0].taps.empty() && channels[0].taps[0].cluster == 0 &&
                             channels[0].taps[0].delay == 0.0;
    const double lock_sign = (lock_exists && channels[0].taps[0].amplitude < 0.0) ? -1.0 : 1.0;
    for (int n = 0; n < users; ++n) {
        const std::vector<double> pos = template_positions(config, codes[static_cast<size_t>(n)]);
        const ChannelRealization& ch = channels[static_cast<size_t>(n)];
        const bool has_locked = (n == 0) && lock_exists;
        for (int k = k_lo; k <= hist; ++k) {
            double acc = 0.0;
            for (size_t j = 0; j < pos.size(); ++j) {
                const double base = -static_cast<double>(k) * sym + pos[j] + delays[static_cast<size_t>(n)];
                for (size_t ti = 0; ti < ch.taps.size(); ++ti) {
                    const double t_c = base + ch.tap_absolute_delay(ti);
                    if (t_c < tpos.front() - reach || t_c > tpos.back() + reach) continue;
                    const long ci = grid_index(t_c, pulse.dt);
                    double sum_r = 0.0;
                    for (long ji : tidx) sum_r += rd.at(ci - ji);
                    const double v = lock_sign * sqrt_ep * ch.taps[ti].amplitude * sum_r;
                    if (has_locked && k == 0 && ti == 0) coeff_desired += v;
                    else acc += v;
                }
            }
            coeff[static_cast<size_t>(n)][static_cast<size_t>(k - k_lo)] = acc;
        }
    }

    // rolling bit windows: bit_window[n][k - k_lo] = d_n at decision-bit - k
    std::vector<std::vector<int>> window(static_cast<size_t>(users), std::vector<int>(static_cast<size_t>(nk)));
    for (int n = 0; n < users; ++n)
        for (int k = 0; k < nk; ++k) window[static_cast<size_t>(n)][static_cast<size_t>(k)] = rng.coin() ? 1 : -1;

    BlockResult out;
    for (int bit = 0; bit < block_bits; ++bit) {
        // slide: the future slot gets a fresh draw
        for (int n = 0; n < users; ++n) {
            auto& w = window[static_cast<size_t>(n)];
            for (int k = nk - 1; k > 0; --k) w[static_cast<size_t>(k)] = w[static_cast<size_t>(k - 1)];
            w[0] = rng.coin() ? 1 : -1;
        }
        const int d0 = window[0][static_cast<size_t>(-k_lo)];  // k = 0 slot of user 1

        double zu = coeff_desired * d0;
        double ziasi = coeff[0][static_cast<size_t>(-k_lo)] * d0;
        double zisi = 0.0, zmui = 0.0;
        for (int k = k_lo; k <= hist; ++k) {
            if (k == 0) continue;
            zisi += coeff[0][static_cast<size_t>(k - k_lo)] *
                    static_cast<double>(window[0][static_cast<size_t>(k - k_lo)]);
        }
        for (int n = 1; n < users; ++n)
            for (int k = k_lo; k <= hist; ++k)
                zmui += coeff[static_cast<size_t>(n)][static_cast<size_t>(k - k_lo)] *
                        static_cast<double>(window[static_cast<size_t>(n)][static_cast<size_t>(k - k_lo)]);
        const double zn = (noise_sigma > 0.0) ? noise_rng.normal(0.0, noise_sigma) : 0.0;
        const double z = zu + ziasi + zisi + zmui + zn;

        const int decision = (z >= 0.0) ? +1 : -1;
        out.bits += 1;
        if (decision != d0) out.errors += 1;
        if (instrument) {
            const double comp[5] = {zu, zn, ziasi, zisi, zmui};
            out.moments.bits += 1;
            for (int i = 0; i < 5; ++i) {
                out.moments.sum[i] += comp[i];
                out.moments.sum2[i] += comp[i] * comp[i];
            }
        }
    }
    return out;
}

}  // namespace

std::vector<BerPointResult> estimate_ber(const SystemConfig& config, const ChannelParams& params,
                                         const Pulse& pulse, const std::vector<double>& snr_grid_db,
                                         const StopRule& stop, uint64_t seed, const SimOptions& opt) {
    config.validate();
    params.validate();
    if (pulse.samples.empty()) throw std::invalid_argument("estimate_ber: empty pulse");
    const DiscreteAutocorr rd(pulse);
    const int threads = std::max(1, opt.threads);
    const int block_bits = std::max(1, opt.block_bits);

    std::vector<BerPointResult> results;
    for (size_t pi = 0; pi < snr_grid_db.size(); ++pi) {
        const auto t_start = std::chrono::steady_clock::now();
        const double snr_db = snr_grid_db[pi];
        const double n0 = config.pulse_energy / std::pow(10.0, snr_db / 10.0);

        BerPointResult point;
        point.snr_db = snr_db;
        long next_block = 0;
        while (point.errors < stop.min_errors && point.bits < stop.max_bits) {
            // one wave of blocks, merged in index order: bit-exact results
            // independent of the thread count
            const int wave = threads;
            std::vector<BlockResult> wave_results(static_cast<size_t>(wave));
            auto worker = [&](int w) {
                const uint64_t bs = substream_seed(seed, pi, static_cast<uint64_t>(next_block + w));
                wave_results[static_cast<size_t>(w)] =
                    run_block(config, params, pulse, rd, n0, bs, block_bits, opt.instrument);
            };
            if (threads == 1) {
                worker(0);
            } else {
                std::vector<std::thread> pool;
                for (int w = 0; w < wave; ++w) pool.emplace_back(worker, w);
                for (auto& t : pool) t.join();
            }
            for (const BlockResult& br : wave_results) {
                point.bits += br.bits;
                point.errors += br.errors;
                point.components.merge(br.moments);
                if (point.errors >= stop.min_errors || point.bits >= stop.max_bits) break;
            }
            next_block += wave;
        }
        point.ber = (point.bits > 0) ? static_cast<double>(point.errors) / static_cast<double>(point.bits) : 0.0;
        const double n = static_cast<double>(point.bits);
        if (n > 0) {
            const double half = 1.96 * std::sqrt(std::max(0.0, point.ber * (1.0 - point.ber) / n));
            point.ci_lo = std::max(0.0, point.ber - half);
            point.ci_hi = std::min(1.0, point.ber + half);
        }
        point.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        results.push_back(point);
    }
    return results;
}

}  // namespace uwb
