#include "uwb/config.hpp"

#include <doctest.h>

#include <cmath>

using namespace uwb;

TEST_CASE("defaults are valid and serialize to a parseable config") {
    RunConfig cfg = default_config();
    CHECK_NOTHROW(cfg.validate());
    const std::string ini = to_ini(cfg);
    CHECK(ini.find("[channel]") != std::string::npos);
    CHECK(ini.find("[system]") != std::string::npos);
    CHECK(ini.find("[pulse]") != std::string::npos);
    CHECK(ini.find("[run]") != std::string::npos);

    const RunConfig back = parse_ini(ini);
    CHECK(to_ini(back) == ini);  // canonical round trip
    CHECK(back.channel.ray_rate2 == cfg.channel.ray_rate2);
    CHECK(back.system.hop_span == cfg.system.hop_span);
}

TEST_CASE("changing the data rate keeps the hop span tracking the frame") {
    RunConfig cfg = default_config();
    std::string ini = to_ini(cfg);
    const std::string from = "data_rate_mbps = 27.24";
    const size_t at = ini.find(from);
    REQUIRE(at != std::string::npos);
    ini.replace(at, from.size(), "data_rate_mbps = 6.81");
    const RunConfig back = parse_ini(ini);
    CHECK(back.system.data_rate_mbps == doctest::Approx(6.81));
    CHECK(back.system.hop_span == doctest::Approx(back.system.frame_time()));
    CHECK(back.system.interfering_periods == 2);
}

TEST_CASE("presets carry the published table and figure recipes") {
    RunConfig t1 = default_config();
    apply_preset(t1, "table1");
    CHECK(t1.mode == "table");
    CHECK(t1.table_rates_mbps == std::vector<double>{27.24});
    CHECK(t1.table_users == std::vector<int>{1, 8, 16});

    RunConfig t3 = default_config();
    apply_preset(t3, "table3");
    CHECK(t3.table_rates_mbps == std::vector<double>{0.11});

    RunConfig f3 = default_config();
    apply_preset(f3, "fig3");
    CHECK(f3.mode == "analytic");
    CHECK(f3.band == "lower");
    CHECK_FALSE(f3.snr_grid_db.empty());

    RunConfig bad = default_config();
    CHECK_THROWS_AS(apply_preset(bad, "table9"), std::invalid_argument);
}

TEST_CASE("snr range parsing") {
    const auto g = parse_snr_range("0:2:10");
    REQUIRE(g.size() == 6);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 10.0);
    CHECK_THROWS_AS(parse_snr_range("10:0:20"), std::invalid_argument);
    CHECK_THROWS_AS(parse_snr_range("nonsense"), std::invalid_argument);
}

TEST_CASE("mode-aware validation") {
    RunConfig cfg = default_config();
    cfg.mode = "montecarlo";
    cfg.seed_set = false;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.seed = 7;
    cfg.seed_set = true;
    CHECK_NOTHROW(cfg.validate());

    cfg.mode = "interpretive-dance";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg.mode = "analytic";
    cfg.snr_grid_db.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("unknown keys and malformed lines are rejected with line numbers") {
    CHECK_THROWS_WITH_AS(parse_ini("[channel]\nclutter_rate = 1\n"), doctest::Contains("line 2"),
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_ini("[channel]\ncluster_rate 0.016\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_ini("[nowhere]\nx = 1\n"), std::invalid_argument);
    // comments and blank lines are fine
    CHECK_NOTHROW(parse_ini("# comment\n\n[channel]\ncluster_rate = 0.02 # inline\n"));
}
