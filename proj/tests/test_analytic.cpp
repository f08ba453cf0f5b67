#include "uwb/analytic.hpp"

#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "uwb/pulse.hpp"

using namespace uwb;

namespace {

const Autocorrelation& lower_r() {
    static const Autocorrelation r = [] {
        KernelBank bank = build_kernel_bank(19, 0.04, 0.04, 0.005);
        return autocorrelation(synthesize_pulse(bank, lower_band_mask()));
    }();
    return r;
}

Autocorrelation thumbtack() {
    Pulse p;
    p.dt = 1e-6;  // R collapses onto lag 0 at the table resolution
    p.samples = {1.0, 0.0, 0.0, 0.0};
    p.normalize_energy();
    return autocorrelation(p);
}

}  // namespace

TEST_CASE("delay densities normalize and have the Erlang moments") {
    const double lam = 0.016;
    for (int l = 2; l <= 10; ++l) {
        const double mean = (l - 1) / lam;
        const double hi = mean + 25.0 * std::sqrt(static_cast<double>(l - 1)) / lam;
        const double mass = testutil::simpson([&](double x) { return pdf_cluster_delay(l, x, lam); }, 0.0, hi, 40000);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
        const double m1 = testutil::simpson([&](double x) { return x * pdf_cluster_delay(l, x, lam); }, 0.0, hi, 40000);
        CHECK(m1 == doctest::Approx(mean).epsilon(1e-6));
    }
    // l = 2 is the plain exponential
    for (double x : {0.0, 5.0, 42.0})
        CHECK(pdf_cluster_delay(2, x, lam) == doctest::Approx(lam * std::exp(-lam * x)));
    CHECK_THROWS_AS(pdf_cluster_delay(1, 1.0, lam), std::invalid_argument);
    CHECK_THROWS_AS(pdf_cluster_delay(2, -1.0, lam), std::invalid_argument);
}

TEST_CASE("ray delay density: normalization, mean gap, superposition") {
    const double lam2 = 2.97;
    for (int k : {2, 3, 7, 15, 28, 40}) {
        const double mean = (k - 1) / lam2;
        const double hi = mean + 25.0 * std::sqrt(static_cast<double>(k - 1)) / lam2;
        const double mass = testutil::simpson([&](double x) { return pdf_ray_delay(k, x, lam2); }, 0.0, hi, 40000);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    }
    const double m1 =
        testutil::simpson([&](double x) { return x * pdf_ray_delay(2, x, lam2); }, 0.0, 15.0, 40000);
    CHECK(m1 == doctest::Approx(1.0 / 2.97).epsilon(1e-6));
    CHECK(m1 == doctest::Approx(0.3367).epsilon(0.01));

    // the k-sum of arrival densities approaches the process intensity
    for (double x : {0.4, 1.7, 6.0}) {
        double sum = 0.0;
        for (int k = 2; k < 120; ++k) sum += pdf_ray_delay(k, x, lam2);
        CHECK(sum == doctest::Approx(lam2).epsilon(1e-9));
    }
}

TEST_CASE("code offset density is uniform on [-Ts, Ts]") {
    const double ts = 36.7;
    CHECK(pdf_code_offset(0.0, ts) == doctest::Approx(0.5 / ts));
    CHECK(pdf_code_offset(ts, ts) == doctest::Approx(0.5 / ts));
    CHECK(pdf_code_offset(ts + 1e-9, ts) == 0.0);
    CHECK(pdf_code_offset(-12.0, ts) == pdf_code_offset(12.0, ts));
    CHECK(2.0 * ts * pdf_code_offset(0.0, ts) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pdf_code_offset(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("omega0 formula and consistency with the tap power law") {
    ChannelParams p;
    p.mixture_prob = 0.0;
    CHECK(omega0(p) == doctest::Approx(1.0 / (p.intra_decay_base * (p.ray_rate1 + 1.0))));

    ChannelParams office;
    ChannelParams wider = office;
    wider.intra_decay_base *= 2.0;
    CHECK(omega0(wider) < omega0(office));

    // equals the mean tap power at zero excess delay of a unit-energy cluster
    CHECK(omega0(office) ==
          doctest::Approx(mean_tap_power(office, 1.0, office.intra_decay_base, 0.0)).epsilon(1e-12));
}

TEST_CASE("omega_sigma structure") {
    ChannelParams p;
    SUBCASE("no interfering pulses when the frame exceeds the channel spread") {
        const SystemConfig slow = make_system_config(0.11, 1, p);
        CHECK(slow.interfering_periods == 1);
        CHECK(omega_sigma(p, slow).value == 0.0);
    }
    SUBCASE("a single admissible cluster leaves nothing to integrate") {
        const SystemConfig fast = make_system_config(27.24, 1, p);
        AnalyticModelParams model;
        model.cluster_count_cap = 1;
        CHECK(omega_sigma(p, fast, model).value == 0.0);
    }
    SUBCASE("positive and converged for the office preset") {
        const SystemConfig fast = make_system_config(27.24, 1, p);
        const VarResult os = omega_sigma(p, fast);
        CHECK(os.value > 0.0);
        CHECK(os.error < 1e-6 * os.value);
        // halving the tolerance moves the value by less than the estimate
        AnalyticModelParams tight;
        tight.rel_tol = 0.5e-8;
        const VarResult os2 = omega_sigma(p, fast, tight);
        CHECK(std::fabs(os2.value - os.value) <= os.error + os2.error);
    }
}

TEST_CASE("signal energy and noise variance formulas") {
    ChannelParams p;
    SystemConfig one = make_system_config(27.24, 1, p);
    SystemConfig two = one;
    two.pulses_per_bit = 2;
    two.interfering_periods = 0;
    two.hop_span = 0.0;
    two.chip_time = 0.0;
    two.finalize();
    CHECK(signal_energy(two, p) == doctest::Approx(4.0 * signal_energy(one, p)));
    CHECK(signal_energy(one, p) == doctest::Approx(omega0(p) * p.freq_c0));

    one.noise_psd = 0.0;
    CHECK(noise_var(one, p) == 0.0);
    one.noise_psd = 0.3;
    CHECK(noise_var(one, p) == doctest::Approx(0.15 * p.freq_c0));
    two.noise_psd = 0.3;  // doubling N_s doubles the noise variance
    CHECK(noise_var(two, p) == doctest::Approx(2.0 * noise_var(one, p)));
}

TEST_CASE("intra-symbol interference variance") {
    ChannelParams p;
    const SystemConfig cfg = make_system_config(27.24, 1, p);

    SUBCASE("a thumbtack autocorrelation kills the integrand") {
        CHECK(iasi_var(cfg, p, thumbtack()).value < 1e-6);
    }
    SUBCASE("independent of data rate and user count") {
        const double base = iasi_var(cfg, p, lower_r()).value;
        for (double rate : {27.24, 6.81, 0.11})
            for (int users : {1, 8, 16}) {
                const SystemConfig c = make_system_config(rate, users, p);
                CHECK(iasi_var(c, p, lower_r()).value == base);
            }
        CHECK(base > 0.0);
    }
    SUBCASE("an undersized ray cap is an explicit error") {
        AnalyticModelParams model;
        model.ray_count_cap = 3;
        CHECK_THROWS_WITH_AS(iasi_var(cfg, p, lower_r(), model), doctest::Contains("ray series"),
                             std::runtime_error);
    }
}

TEST_CASE("inter-symbol interference variance") {
    ChannelParams p;
    const SystemConfig fast = make_system_config(27.24, 1, p);
    const SystemConfig mid = make_system_config(6.81, 1, p);
    const SystemConfig slow = make_system_config(0.11, 1, p);
    const double os_fast = omega_sigma(p, fast).value;
    const double os_mid = omega_sigma(p, mid).value;
    const double os_slow = omega_sigma(p, slow).value;

    const double isi_fast = isi_var(fast, p, lower_r(), os_fast).value;
    const double isi_mid = isi_var(mid, p, lower_r(), os_mid).value;
    const double isi_slow = isi_var(slow, p, lower_r(), os_slow).value;
    CHECK(isi_slow == 0.0);
    CHECK(isi_fast > isi_mid);
    CHECK(isi_mid > 0.0);

    // linear in the interfering energy
    CHECK(isi_var(fast, p, lower_r(), 2.0 * os_fast).value == doctest::Approx(2.0 * isi_fast).epsilon(1e-9));
}

TEST_CASE("multiuser interference variance") {
    ChannelParams p;
    const SystemConfig solo = make_system_config(27.24, 1, p);
    const double os = omega_sigma(p, solo).value;
    CHECK(mui_var(solo, p, lower_r(), os).value == 0.0);

    const SystemConfig five = make_system_config(27.24, 5, p);
    const SystemConfig nine = make_system_config(27.24, 9, p);
    const double m5 = mui_var(five, p, lower_r(), os).value;
    const double m9 = mui_var(nine, p, lower_r(), os).value;
    CHECK(m5 > 0.0);
    CHECK(m9 == doctest::Approx(2.0 * m5).epsilon(1e-9));  // (N_u - 1) scaling
}

TEST_CASE("sinr and ber mappings") {
    InterferenceBudget b;
    b.signal = 2.0;
    b.noise = 1.0;
    CHECK(b.sinr() == doctest::Approx(2.0));
    b.iasi = 0.5;
    CHECK(b.sinr() == doctest::Approx(2.0 / 1.5));
    InterferenceBudget scaled = b;
    scaled.signal *= 3.0;
    scaled.noise *= 3.0;
    scaled.iasi *= 3.0;
    CHECK(scaled.sinr() == doctest::Approx(b.sinr()));
    InterferenceBudget zero;
    zero.signal = 1.0;
    CHECK_THROWS_AS(zero.sinr(), std::domain_error);

    CHECK(ber_from_sinr(0.0) == doctest::Approx(0.5));
    CHECK(ber_from_sinr(1e9) < 1e-12);
    CHECK(ber_from_sinr(2.0) == doctest::Approx(0.5 * testutil::erfc_oracle(1.0)).epsilon(1e-12));
    CHECK(ber_from_sinr(2.0) == doctest::Approx(0.0786496).epsilon(1e-4));
    CHECK_THROWS_AS(ber_from_sinr(-0.1), std::domain_error);
}

TEST_CASE("ber curve shapes") {
    ChannelParams p;
    const SystemConfig cfg = make_system_config(27.24, 1, p);
    std::vector<double> grid;
    for (double s = 0.0; s <= 30.0; s += 1.0) grid.push_back(s);

    SUBCASE("interference-free waterfall is strictly decreasing") {
        ChannelParams clean = p;
        const InterferenceBudget b{signal_energy(cfg, p), 1.0, 0.0, 0.0, 0.0};
        double prev = 1.0;
        for (double snr : grid) {
            InterferenceBudget bb = b;
            bb.noise = p.freq_c0 * cfg.pulse_energy / (2.0 * std::pow(10.0, snr / 10.0));
            const double v = bb.ber();
            CHECK(v < prev);
            prev = v;
        }
    }
    SUBCASE("interference makes the curve flatten onto its closed-form floor") {
        const auto curve = ber_curve(cfg, p, lower_r(), {50.0, 60.0});
        InterferenceBudget b = compute_budget(cfg, p, lower_r());
        const double fl = ber_floor(b);
        CHECK(curve[1].ber == doctest::Approx(fl).epsilon(1e-3));
        CHECK(curve[1].ber > 0.0);
    }
    SUBCASE("low data rates give nearly identical curves") {
        const auto a = ber_curve(make_system_config(6.81, 1, p), p, lower_r(), grid);
        const auto b = ber_curve(make_system_config(0.11, 1, p), p, lower_r(), grid);
        for (size_t i = 0; i < grid.size(); ++i) {
            const double rel = std::fabs(a[i].ber - b[i].ber) / std::max(a[i].ber, b[i].ber);
            CHECK(rel < 0.10);
        }
    }
}

TEST_CASE("interference table reproduces the structural pattern") {
    ChannelParams p;
    const auto cells = interference_table(p, lower_r(), {27.24, 6.81, 0.11}, {1, 8, 16});
    REQUIRE(cells.size() == 9);
    for (const auto& c : cells) {
        CHECK(c.iasi == cells[0].iasi);  // constant across the whole grid
        if (c.users == 1) CHECK(c.mui == 0.0);
        else CHECK(c.mui > 0.0);
        if (c.rate_mbps == 0.11) CHECK(c.isi == 0.0);
    }
    const auto again = interference_table(p, lower_r(), {27.24, 6.81, 0.11}, {1, 8, 16});
    for (size_t i = 0; i < cells.size(); ++i) {
        CHECK(cells[i].iasi == again[i].iasi);
        CHECK(cells[i].isi == again[i].isi);
        CHECK(cells[i].mui == again[i].mui);
    }
}

TEST_CASE("system config derivation and validation") {
    ChannelParams p;
    SystemConfig c = make_system_config(27.24, 1, p);
    CHECK(c.frame_time() == doctest::Approx(36.7107).epsilon(1e-4));
    CHECK(c.hop_span == doctest::Approx(c.frame_time()));
    CHECK(c.chip_time == doctest::Approx(c.hop_span / c.hop_cardinality));
    CHECK(c.interfering_periods == 6);  // ceil(200 / 36.71)

    SystemConfig tampered = c;
    tampered.interfering_periods = 3;
    CHECK_THROWS_AS(tampered.validate(), std::invalid_argument);

    SystemConfig wide = c;
    wide.hop_span = c.frame_time() * 1.5;
    CHECK_THROWS_AS(wide.validate(), std::invalid_argument);

    SystemConfig crowded = c;
    crowded.chip_time = c.hop_span;  // N_h chips no longer fit
    CHECK_THROWS_AS(crowded.validate(), std::invalid_argument);
}

TEST_CASE("quadrature convergence contract for the budget integrals") {
    ChannelParams p;
    const SystemConfig cfg = make_system_config(27.24, 1, p);
    AnalyticModelParams loose;
    loose.rel_tol = 1e-6;
    AnalyticModelParams tight;
    tight.rel_tol = 0.5e-6;
    const VarResult a = iasi_var(cfg, p, lower_r(), loose);
    const VarResult b = iasi_var(cfg, p, lower_r(), tight);
    CHECK(std::fabs(a.value - b.value) <= a.error + b.error + 1e-15);
}
