#include <cmath>

#include "doctest.h"
#include "kvtopo/config.hpp"
#include "kvtopo/errors.hpp"

using namespace kvtopo;

namespace {

std::string config_error_key(const std::string& text) {
    try {
        build_run_config(Config::parse_string(text));
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("parsing flat key-value text") {
    const Config c = Config::parse_string(
        "# a comment\n"
        "\n"
        "domain.h = 0.05   # trailing comment\n"
        "  scene.center=0.4 0.6\n"
        "recon.candidates = 0.3 0.6\n");
    CHECK(c.get_double("domain.h", 0.0) == 0.05);
    CHECK(c.get_vec2("scene.center", Vec2::Zero()) == Vec2(0.4, 0.6));
    CHECK(c.get_list("recon.candidates", {}) == std::vector<double>{0.3, 0.6});
    CHECK(c.get_double("missing.key", 7.0) == 7.0);
    CHECK(c.entries().size() == 3);
}

TEST_CASE("malformed configuration text names the line") {
    try {
        Config::parse_string("domain.h = 0.05\nno equals sign\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    try {
        Config::parse_string("domain.h = 0.05\n\ndomain.h = 0.1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(Config::parse_string(" = 3\n"), ParseError);
}

TEST_CASE("serialization round-trips bit-exactly") {
    Config c = Config::parse_string("gamma.type = linear\ngamma.a0 = 1\ngamma.ax = 0.1\n");
    c.set("domain.h", "0.1");
    const Config back = Config::parse_string(c.serialize());
    CHECK(back == c);
    CHECK(back.serialize() == c.serialize());
}

TEST_CASE("hash ignores the output directory only") {
    Config a = Config::parse_string("domain.h = 0.05\noutput.dir = one\n");
    Config b = Config::parse_string("output.dir = two\ndomain.h = 0.05\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash_hex().size() == 16);
    b.set("domain.h", "0.04");
    CHECK(a.hash() != b.hash());
}

TEST_CASE("typed getters reject bad values with the key") {
    const Config c = Config::parse_string("a.x = abc\na.n = 2.5\na.b = maybe\na.v = 1\n");
    CHECK_THROWS_WITH_AS(c.get_double("a.x", 0.0), doctest::Contains("a.x"), ConfigError);
    CHECK_THROWS_AS(c.get_int("a.n", 0), ConfigError);
    CHECK_THROWS_AS(c.get_bool("a.b", false), ConfigError);
    CHECK_THROWS_AS(c.get_vec2("a.v", Vec2::Zero()), ConfigError);
}

TEST_CASE("run configuration defaults") {
    const RunConfig rc = build_run_config(Config{});
    CHECK(rc.domain.h == 0.02);
    CHECK(std::holds_alternative<RectDomain>(rc.domain.shape));
    CHECK_FALSE(rc.scene.object);
    CHECK(rc.candidates == std::vector<double>{0.2, 0.4, 0.6, 0.8});
    CHECK(rc.sweep.eps == std::vector<double>{0.1, 0.07, 0.05, 0.035, 0.025});
    CHECK(rc.polarization.panels == 256);
    CHECK(rc.metadata().find("kvtopo 1.0.0 config_hash=") == 0);
}

TEST_CASE("catalog families") {
    const Config c = Config::parse_string(
        "gamma.type = gaussian\ngamma.base = 1\ngamma.amplitude = 0.5\ngamma.center = 0.5 0.5\ngamma.width = 0.1\n"
        "source.type = linear\nsource.a0 = 1\nsource.ax = 2\nsource.ay = -1\n"
        "flux.type = uniform_field\nflux.field = 0 2\n");
    const RunConfig rc = build_run_config(c);
    CHECK(rc.data.gamma({0.5, 0.5}) == doctest::Approx(1.5));
    CHECK(rc.data.gamma({0.6, 0.5}) == doctest::Approx(1.0 + 0.5 * std::exp(-0.5)));
    CHECK(rc.data.gamma.lower == doctest::Approx(1.0));
    CHECK(rc.data.gamma.upper == doctest::Approx(1.5));
    CHECK(rc.data.source({0.25, 0.5}) == doctest::Approx(1.0));
    // gamma(x) field . n
    CHECK(rc.data.flux({0.5, 0.5}, {0.0, 1.0}) == doctest::Approx(2.0 * 1.5));
    CHECK(rc.data.flux({0.5, 1.0}, {0.0, 1.0}) == doctest::Approx(2.0 * rc.data.gamma({0.5, 1.0})));
    CHECK(rc.data.flux({1.0, 0.2}, {1.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("validation errors name the offending key") {
    CHECK(config_error_key("nonsense.key = 1\n") == "nonsense.key");
    CHECK(config_error_key("domain.h = -1\n") == "domain.h");
    CHECK(config_error_key("domain.shape = hexagon\n") == "domain.shape");
    CHECK(config_error_key("domain.gamma_a = bottom left right top\n") == "domain.gamma_a");
    CHECK(config_error_key("domain.shape = disk\ndomain.radius = 1\ndomain.arc = 0 7\n") == "domain.arc");
    CHECK(config_error_key("gamma.type = cubic\n") == "gamma.type");
    CHECK(config_error_key("gamma.type = linear\ngamma.a0 = 0.2\ngamma.ax = -1\n") == "gamma.type");
    CHECK(config_error_key("gamma.type = uniform_field\n") == "gamma.type");
    CHECK(config_error_key("scene.object = blob\n") == "scene.object");
    CHECK(config_error_key("scene.object = circle\nscene.center = 0.05 0.5\nscene.radius = 0.1\n") ==
          "scene.object");
    CHECK(config_error_key("scene.h_true = 0.015\n") == "scene.h_true");
    CHECK(config_error_key("scene.noise = -0.1\n") == "scene.noise");
    CHECK(config_error_key("measurement.source = file\n") == "measurement.file");
    CHECK(config_error_key("recon.candidates = 0.5 1.2\n") == "recon.candidates");
    CHECK(config_error_key("sweep.eps = 0.05 0.1\n") == "sweep.eps");
    CHECK(config_error_key("sweep.n_segments = 8\n") == "sweep.n_segments");
    CHECK(config_error_key("polarization.panels = 4\n") == "polarization.panels");
}
