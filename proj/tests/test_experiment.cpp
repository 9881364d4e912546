#include <doctest.h>

#include <algorithm>

#include "sapit/csv.hpp"
#include "sapit/experiment.hpp"

using namespace sapit;

TEST_CASE("config parser: defaults, values, comments, sections") {
    std::vector<std::string> errors;
    auto cfg = parse_config_text(
        "# comment\n"
        "[run]\n"
        "kind = ber-vs-power\n"
        "N = 128\n"
        "tx_mod = 16qam\n"
        "power_dbm = 10, 12, 14\n"
        "coded = true\n"
        "seed = 7\n"
        "csi_nmse_db = -20\n",
        errors);
    CHECK(errors.empty());
    CHECK(cfg.kind == "ber-vs-power");
    CHECK(cfg.N == 128);
    CHECK(cfg.tx_mod == "16qam");
    CHECK(cfg.coded);
    CHECK(cfg.seed == 7);
    CHECK(cfg.power_dbm == std::vector<double>{10.0, 12.0, 14.0});
    CHECK(cfg.csi_nmse_db == doctest::Approx(-20.0));
}

TEST_CASE("config parser reports unknown keys and bad values together") {
    std::vector<std::string> errors;
    parse_config_text("bogus_key = 3\nN = notanumber\nseed = 1\n", errors);
    REQUIRE(errors.size() >= 2);
    bool unknown = false, badval = false;
    for (const auto& e : errors) {
        unknown |= e.find("bogus_key") != std::string::npos;
        badval |= e.find("invalid value for N") != std::string::npos;
    }
    CHECK(unknown);
    CHECK(badval);
}

TEST_CASE("missing seed produces a warning, not an error") {
    std::vector<std::string> errors;
    auto cfg = parse_config_text("kind = se-only\nN = 32\n", errors);
    CHECK(errors.empty());
    bool warned = std::any_of(cfg.warnings.begin(), cfg.warnings.end(),
                              [](const std::string& w) {
                                  return w.find("seed") != std::string::npos;
                              });
    CHECK(warned);
}

TEST_CASE("validate_config rejects inconsistent setups") {
    ExperimentConfig cfg;
    cfg.seed = 1;
    CHECK(validate_config(cfg).empty());

    auto bad = cfg;
    bad.N_P = bad.N + 1;
    CHECK(!validate_config(bad).empty());

    bad = cfg;
    bad.kind = "nonsense";
    CHECK(!validate_config(bad).empty());

    bad = cfg;
    bad.tx_mod = "128apsk";
    CHECK(!validate_config(bad).empty());

    bad = cfg;
    bad.kind = "rate-vs-N";
    bad.sweep_n.clear();
    CHECK(!validate_config(bad).empty());

    bad = cfg;
    bad.noise_var = -1.0;
    CHECK(!validate_config(bad).empty());
}

TEST_CASE("config hash is stable and value sensitive") {
    ExperimentConfig a, b;
    a.seed = b.seed = 5;
    CHECK(config_hash(a) == config_hash(b));
    b.N = a.N + 1;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("presets parse and validate cleanly") {
    auto names = list_presets();
    CHECK(names.size() == 12);
    for (const char* required :
         {"fig4-left", "fig4-left-desk", "fig5-right-desk", "fig6-left-desk"})
        CHECK(std::find(names.begin(), names.end(), required) != names.end());
    for (const auto& name : names) {
        std::vector<std::string> errors;
        auto cfg = parse_config_text(preset_text(name), errors);
        CHECK(errors.empty());
        auto verr = validate_config(cfg);
        if (!verr.empty()) {
            for (auto& e : verr) MESSAGE(name << ": " << e);
        }
        CHECK(verr.empty());
    }
    CHECK_THROWS(preset_text("no-such-preset"));
}

TEST_CASE("tx constellation factory") {
    CHECK(make_tx_constellation("bpsk").size() == 2);
    CHECK(make_tx_constellation("qpsk").size() == 4);
    CHECK(make_tx_constellation("8psk").size() == 8);
    CHECK(make_tx_constellation("16qam").size() == 16);
    CHECK(make_tx_constellation("64qam").size() == 64);
    CHECK_THROWS(make_tx_constellation("3apsk"));
}

TEST_CASE("make_se_config bridges the physical scale to the normalized one") {
    ExperimentConfig cfg;
    cfg.seed = 1;
    cfg.direct_link = true;
    auto se = make_se_config(cfg, 30.0);
    CHECK(se.N == cfg.N);
    CHECK(se.M == cfg.M);
    CHECK(se.K == cfg.K);
    CHECK(se.zeta > 0.0);
    CHECK(se.sigma2 > 0.0);
    // More transmit power lowers the effective noise with a direct link.
    auto se_hi = make_se_config(cfg, 40.0);
    CHECK(se_hi.sigma2 < se.sigma2);
    CHECK(se_hi.zeta == doctest::Approx(se.zeta));  // power-invariant ratio

    cfg.direct_link = false;
    auto blk = make_se_config(cfg, 30.0);
    auto blk_hi = make_se_config(cfg, 40.0);
    // Blocked link: power enters through zeta instead.
    CHECK(blk_hi.zeta > blk.zeta);
    CHECK(blk_hi.sigma2 == doctest::Approx(blk.sigma2));
}

TEST_CASE("csv writer formatting") {
    CsvWriter w({"a", "b"});
    w.add_row({CsvWriter::num(1.5), CsvWriter::num(std::int64_t(-3))});
    CHECK(w.str() == "a,b\n1.5,-3\n");
    CHECK_THROWS(w.add_row({"only-one"}));
    CHECK(fnv1a("abc") == fnv1a("abc"));
    CHECK(fnv1a("abc") != fnv1a("abd"));
}
