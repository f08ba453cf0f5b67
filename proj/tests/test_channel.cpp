#include "uwb/channel.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "uwb/rng.hpp"

using namespace uwb;

namespace {

ChannelParams office() { return ChannelParams{}; }

}  // namespace

TEST_CASE("cluster arrivals start at zero and are deterministic under the seed") {
    ChannelParams p = office();
    Rng a(42), b(42);
    const auto first = sample_cluster_arrivals(p, a);
    const auto second = sample_cluster_arrivals(p, b);
    CHECK(first == second);
    CHECK(first.front() == 0.0);
    for (size_t i = 1; i < first.size(); ++i) CHECK(first[i] > first[i - 1]);
    CHECK(first.back() <= p.max_excess_delay);
}

TEST_CASE("degenerate max excess delay yields a single cluster at time zero") {
    ChannelParams p = office();
    p.max_excess_delay = 1e-9;
    Rng rng(7);
    const auto arrivals = sample_cluster_arrivals(p, rng);
    REQUIRE(arrivals.size() == 1);
    CHECK(arrivals[0] == 0.0);
}

TEST_CASE("cluster inter-arrival moments and distribution match the exponential law") {
    ChannelParams p = office();
    p.max_excess_delay = 1e7;  // wide window: censoring bias is negligible
    Rng rng(123);
    std::vector<double> gaps;
    while (gaps.size() < 100000) {
        const auto arr = sample_cluster_arrivals(p, rng);
        for (size_t i = 1; i < arr.size(); ++i) gaps.push_back(arr[i] - arr[i - 1]);
    }
    gaps.resize(100000);
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    CHECK(mean == doctest::Approx(1.0 / p.cluster_rate).epsilon(0.02));

    const double lambda = p.cluster_rate;
    const double d = testutil::ks_statistic(gaps, [&](double x) { return 1.0 - std::exp(-lambda * x); });
    // 1% critical value for the fully specified KS test
    CHECK(d < 1.63 / std::sqrt(100000.0));
}

TEST_CASE("ray mixture collapses to a single exponential at beta 0 and 1") {
    ChannelParams p = office();
    Rng rng(5);
    auto collect = [&](double beta, double span) {
        p.mixture_prob = beta;
        std::vector<double> gaps;
        while (gaps.size() < 100000) {
            const auto rays = sample_ray_arrivals(p, span, rng);
            for (size_t i = 1; i < rays.size(); ++i) gaps.push_back(rays[i] - rays[i - 1]);
        }
        gaps.resize(100000);
        return gaps;
    };
    auto mean_of = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double g : v) m += g;
        return m / static_cast<double>(v.size());
    };
    const auto fast = collect(0.0, 5000.0);
    CHECK(mean_of(fast) == doctest::Approx(1.0 / p.ray_rate2).epsilon(0.01));
    const double rate2 = p.ray_rate2;
    CHECK(testutil::ks_statistic(fast, [&](double x) { return 1.0 - std::exp(-rate2 * x); }) <
          1.63 / std::sqrt(100000.0));

    const auto slow = collect(1.0, 50000.0);
    CHECK(mean_of(slow) == doctest::Approx(1.0 / p.ray_rate1).epsilon(0.01));
    const double rate1 = p.ray_rate1;
    CHECK(testutil::ks_statistic(slow, [&](double x) { return 1.0 - std::exp(-rate1 * x); }) <
          1.63 / std::sqrt(100000.0));
}

TEST_CASE("office ray interval is about a third of a nanosecond") {
    ChannelParams p = office();
    p.mixture_prob = 0.0;
    Rng rng(11);
    const auto rays = sample_ray_arrivals(p, 40000.0, rng);
    double mean = 0.0;
    for (size_t i = 1; i < rays.size(); ++i) mean += rays[i] - rays[i - 1];
    mean /= static_cast<double>(rays.size() - 1);
    CHECK(mean == doctest::Approx(0.3367).epsilon(0.02));
}

TEST_CASE("mean tap power formula") {
    ChannelParams p = office();
    const double norm = (1.0 - p.mixture_prob) * p.ray_rate1 + p.mixture_prob * p.ray_rate2 + 1.0;
    CHECK(mean_tap_power(p, 2.0, 6.4, 0.0) == doctest::Approx(2.0 / (6.4 * norm)).epsilon(1e-12));
    // moving out by gamma*ln2 halves the power
    const double a = mean_tap_power(p, 1.0, 6.4, 1.0);
    const double b = mean_tap_power(p, 1.0, 6.4, 1.0 + 6.4 * std::log(2.0));
    CHECK(b == doctest::Approx(0.5 * a).epsilon(1e-12));
    CHECK_THROWS_AS(mean_tap_power(p, 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mean_tap_power(p, 1.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sampled amplitude power matches the assigned mean power") {
    ChannelParams p = office();
    const double target = mean_tap_power(p, 1.0, 6.4, 0.9);
    Rng rng(77);
    double acc = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double a = sample_nakagami_amplitude(2.3, target, rng);
        acc += a * a;
    }
    CHECK(acc / n == doctest::Approx(target).epsilon(0.01));
}

TEST_CASE("cluster energy decay and shadowing") {
    ChannelParams p = office();
    CHECK(cluster_energy(p, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cluster_energy(p, p.inter_cluster_decay, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(cluster_energy(p, 50.0, 0.0) > cluster_energy(p, 60.0, 0.0));

    // ensemble mean against the closed-form lognormal moment
    Rng rng(3);
    const double sigma = p.cluster_shadowing_db;
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc += cluster_energy(p, 10.0, rng.normal(0.0, sigma));
    const double s_ln = sigma * std::log(10.0) / 10.0;
    const double expected = std::exp(-10.0 / p.inter_cluster_decay) * std::exp(0.5 * s_ln * s_ln);
    CHECK(acc / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("intra-cluster decay law") {
    ChannelParams p = office();
    CHECK(intra_cluster_decay(p, 0.0) == doctest::Approx(p.intra_decay_base));
    p.decay_slope = 0.0;
    CHECK(intra_cluster_decay(p, 123.0) == doctest::Approx(p.intra_decay_base));
    p.decay_slope = 0.1;
    CHECK(intra_cluster_decay(p, 10.0) > intra_cluster_decay(p, 5.0));
    CHECK(intra_cluster_decay(p, 10.0) == doctest::Approx(0.1 * 10.0 + p.intra_decay_base));
}

TEST_CASE("nakagami magnitude distribution") {
    Rng rng(13);
    SUBCASE("m = 1 is Rayleigh") {
        const double omega = 0.7;
        std::vector<double> mags;
        double m2 = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const double a = sample_nakagami_amplitude(1.0, omega, rng);
            mags.push_back(std::fabs(a));
            m2 += a * a;
        }
        CHECK(m2 / 100000.0 == doctest::Approx(omega).epsilon(0.02));
        const double d =
            testutil::ks_statistic(mags, [&](double x) { return 1.0 - std::exp(-x * x / omega); });
        CHECK(d < 0.01);
    }
    SUBCASE("empirical CDF tracks the pdf integrated numerically") {
        const double m = 1.8, omega = 1.3;
        std::vector<double> mags;
        for (int i = 0; i < 100000; ++i) mags.push_back(std::fabs(sample_nakagami_amplitude(m, omega, rng)));
        auto pdf = [&](double a) {
            return 2.0 / std::tgamma(m) * std::pow(m / omega, m) * std::pow(a, 2.0 * m - 1.0) *
                   std::exp(-m / omega * a * a);
        };
        auto cdf = [&](double x) { return testutil::simpson(pdf, 0.0, x, 400); };
        CHECK(testutil::ks_statistic(mags, cdf) < 0.01);
    }
    SUBCASE("signs are equiprobable") {
        int pos = 0;
        for (int i = 0; i < 100000; ++i)
            if (sample_nakagami_amplitude(1.0, 1.0, rng) > 0) ++pos;
        CHECK(std::fabs(pos - 50000) < 3.0 * std::sqrt(25000.0));
    }
    CHECK_THROWS_AS(sample_nakagami_amplitude(0.49, 1.0, rng), std::invalid_argument);
}

TEST_CASE("realization is a pure function of params and seed") {
    ChannelParams p = office();
    const ChannelRealization a = generate_realization(p, 2024);
    const ChannelRealization b = generate_realization(p, 2024);
    REQUIRE(a.taps.size() == b.taps.size());
    for (size_t i = 0; i < a.taps.size(); ++i) {
        CHECK(a.taps[i].amplitude == b.taps[i].amplitude);
        CHECK(a.taps[i].delay == b.taps[i].delay);
    }
    const ChannelRealization c = generate_realization(p, 2025);
    CHECK(a.taps.size() != c.taps.size());
}

TEST_CASE("realizations satisfy the structural invariants") {
    ChannelParams p = office();
    for (uint64_t seed = 0; seed < 50; ++seed) {
        const ChannelRealization r = generate_realization(p, seed);
        CHECK_NOTHROW(r.check_invariants(p.max_excess_delay));
        // truncation: nothing retained below the threshold
        double peak = 0.0;
        for (const Tap& t : r.taps) peak = std::max(peak, t.amplitude * t.amplitude);
        const double floor = peak * std::pow(10.0, p.truncation_db / 10.0);
        for (const Tap& t : r.taps) CHECK(t.amplitude * t.amplitude >= floor);
    }
}

TEST_CASE("truncation drops only a bounded sliver of the energy") {
    ChannelParams trunc = office();
    ChannelParams keep_all = office();
    keep_all.truncation_db = -300.0;
    const double floor_lin = std::pow(10.0, trunc.truncation_db / 10.0);
    for (uint64_t seed = 100; seed < 120; ++seed) {
        const ChannelRealization a = generate_realization(trunc, seed);
        const ChannelRealization b = generate_realization(keep_all, seed);
        REQUIRE(b.taps.size() >= a.taps.size());
        double peak = 0.0;
        for (const Tap& t : b.taps) peak = std::max(peak, t.amplitude * t.amplitude);
        const double dropped = b.total_energy() - a.total_energy();
        const double bound =
            static_cast<double>(b.taps.size() - a.taps.size()) * peak * floor_lin;
        CHECK(dropped >= 0.0);
        CHECK(dropped <= bound + 1e-15);
        CHECK(dropped / b.total_energy() < 0.05);
    }
}

TEST_CASE("ensemble energy matches a direct Monte Carlo of the power laws") {
    ChannelParams p = office();
    const int n = 10000;

    // oracle: accumulate E[alpha^2] terms directly from the decay laws,
    // without the amplitude sampler or truncation
    Rng rng(99);
    double oracle = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto arrivals = sample_cluster_arrivals(p, rng);
        for (double t_l : arrivals) {
            const double gamma_l = intra_cluster_decay(p, t_l);
            const double omega_l = cluster_energy(p, t_l, rng.normal(0.0, p.cluster_shadowing_db));
            const auto rays = sample_ray_arrivals(p, p.max_excess_delay - t_l, rng);
            for (double tau : rays) oracle += mean_tap_power(p, omega_l, gamma_l, tau);
        }
    }
    oracle *= p.freq_dependence_flat() / n;

    double sampled = 0.0;
    for (int i = 0; i < n; ++i) sampled += generate_realization(p, 5000 + static_cast<uint64_t>(i)).total_energy();
    sampled /= n;

    CHECK(sampled == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("power-delay profile decays at the intra-cluster rate") {
    ChannelParams p = office();
    p.cluster_shadowing_db = 0.0;  // shadowing shifts bin means but also adds variance
    const double bin_w = 0.75;
    const int bins = 16;
    std::vector<double> acc(bins, 0.0);
    std::vector<long> cnt(bins, 0);
    for (int i = 0; i < 10000; ++i) {
        const ChannelRealization r = generate_realization(p, 40000 + static_cast<uint64_t>(i));
        for (const Tap& t : r.taps) {
            if (t.cluster != 0) continue;
            const int b = static_cast<int>(t.delay / bin_w);
            if (b < bins) {
                acc[static_cast<size_t>(b)] += t.amplitude * t.amplitude;
                cnt[static_cast<size_t>(b)] += 1;
            }
        }
    }
    std::vector<double> xs, ys;
    for (int b = 0; b < bins; ++b) {
        REQUIRE(cnt[b] > 0);
        xs.push_back((b + 0.5) * bin_w);
        ys.push_back(std::log(acc[static_cast<size_t>(b)] / static_cast<double>(cnt[static_cast<size_t>(b)])));
    }
    const double slope = testutil::regression_slope(xs, ys);
    CHECK(slope == doctest::Approx(-1.0 / p.intra_decay_base).epsilon(0.05));
}

TEST_CASE("frequency response basics") {
    ChannelParams p = office();
    p.freq_kappa = 0.0;
    p.freq_c0 = 1.0;
    ChannelRealization single;
    single.clusters = {{0.0, 1.0, p.intra_decay_base}};
    single.taps = {{0, 0.0, 1.0}};

    std::vector<double> grid;
    for (int i = 1; i <= 32; ++i) grid.push_back(2.0 * M_PI * 1e9 * 0.3 * i);

    SUBCASE("unit tap at zero delay gives a flat response") {
        const FrequencyResponse h = frequency_response(single, grid, p, FreqDependenceMode::full);
        for (const auto& v : h.values) {
            CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(v.imag() == doctest::Approx(0.0).epsilon(1e-12));
        }
    }

    SUBCASE("modulus is invariant under a global delay") {
        ChannelRealization delayed = single;
        delayed.clusters[0].arrival = 0.0;
        delayed.taps[0].delay = 0.0;
        ChannelRealization base = generate_realization(p, 31);
        ChannelRealization shifted = base;
        for (Cluster& c : shifted.clusters) c.arrival += 7.5;
        const FrequencyResponse ha = frequency_response(base, grid, p);
        const FrequencyResponse hb = frequency_response(shifted, grid, p);
        for (size_t i = 0; i < grid.size(); ++i)
            CHECK(std::abs(ha.values[i]) == doctest::Approx(std::abs(hb.values[i])).epsilon(1e-9));
    }

    SUBCASE("rejects non-positive frequencies when kappa is nonzero") {
        ChannelParams pk = office();
        std::vector<double> bad{-1.0, 1.0};
        CHECK_THROWS_AS(frequency_response(single, bad, pk, FreqDependenceMode::full), std::domain_error);
    }
}

TEST_CASE("flat frequency dependence approximates the full power law within 5 percent in band") {
    ChannelParams p = office();  // kappa = 0.03
    const ChannelRealization r = generate_realization(p, 8);
    std::vector<double> grid;
    for (double f_mhz = 3244.0; f_mhz <= 10234.0; f_mhz += 50.0) grid.push_back(2.0 * M_PI * f_mhz * 1e6);
    const FrequencyResponse full = frequency_response(r, grid, p, FreqDependenceMode::full);
    const FrequencyResponse flat = frequency_response(r, grid, p, FreqDependenceMode::flat);
    const FrequencyResponse taylor = frequency_response(r, grid, p, FreqDependenceMode::taylor);
    for (size_t i = 0; i < grid.size(); ++i) {
        const double rel = std::abs(full.values[i] - flat.values[i]) / std::abs(flat.values[i]);
        CHECK(rel < 0.05);
        // the first-order expansion should track the power law tighter than flat near omega0
        if (std::fabs(grid[i] / p.omega0_rad_s - 1.0) < 0.2) {
            const double rel_t = std::abs(full.values[i] - taylor.values[i]) / std::abs(full.values[i]);
            CHECK(rel_t <= rel + 1e-12);
        }
    }
}

TEST_CASE("persistence round-trips losslessly at the printed precision") {
    ChannelParams p = office();
    const ChannelRealization r = generate_realization(p, 321);
    std::ostringstream first;
    save_realization(r, first);
    std::istringstream back(first.str());
    const ChannelRealization loaded = load_realization(back);
    CHECK(loaded.seed == r.seed);
    CHECK(loaded.params_hash == r.params_hash);
    REQUIRE(loaded.taps.size() == r.taps.size());
    std::ostringstream second;
    save_realization(loaded, second);
    CHECK(first.str() == second.str());
}

TEST_CASE("parameter validation names the offending field") {
    ChannelParams p = office();
    p.cluster_rate = -0.1;
    try {
        p.validate();
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("cluster_rate") != std::string::npos);
    }
}
