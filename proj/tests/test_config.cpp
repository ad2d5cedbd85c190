#include "splitree/config.hpp"
#include "splitree/errors.hpp"

#include <doctest.h>

#include <string>

using namespace splitree;

TEST_CASE("preset") {
  const RunConfig c = parse_config("preset = paper-sec7\n");
  CHECK(c.preset == "paper-sec7");
  CHECK(c.params.lifetime.kind() == LifetimeKind::rice);
  CHECK(c.params.birth_rate == 1.0);
  CHECK(c.params.theta == 1.0);
  CHECK(c.experiment.t == 10.0);
  CHECK(c.experiment.k_list == std::vector<int>{1, 2});
}

TEST_CASE("sections and overrides") {
  const RunConfig c = parse_config(
      "# comment\n[model]\nbirth_rate = 2\ntheta = 1.5\n[lifetime]\nkind = exponential\nparams = 0.5\n"
      "[experiment]\nk_list = 1, 2, 3\nseed = 99\ncheckpoints = 1,2\n");
  CHECK(c.params.birth_rate == 2.0);
  CHECK(c.params.lifetime.death_rate() == 0.5);
  CHECK(c.experiment.k_list.size() == 3);
  CHECK(c.experiment.seed == 99);
  CHECK(c.echo.at("model.theta") == "1.5");
}

TEST_CASE("errors") {
  try {
    parse_config("foo = 1\n[model]\nbar = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("foo") != std::string::npos);
    CHECK(msg.find("model.bar") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("lifetime.kind = rice\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("lifetime.kind = weibull\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.theta = abc\nlifetime.kind = infinite\n"), ConfigError);
  try {
    load_config("/nonexistent/run.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/run.ini") != std::string::npos);
  }
}
