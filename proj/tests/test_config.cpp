#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "porous/config.hpp"

#include <functional>
#include <string>

using porous::Config;
using porous::ConfigError;
using porous::parse_config;
using porous::parse_config_text;

namespace {
std::string what_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
} // namespace

TEST_CASE("basic sections, typed getters, defaults") {
  Config cfg = parse_config_text("[mesh]\n"
                                 "nx = 16\n"
                                 "lx = 2.5\n"
                                 "[solver]\n"
                                 "upwind = true\n"
                                 "newton_tol = 1e-9\n",
                                 "t.cfg");
  CHECK(cfg.has("mesh", "nx"));
  CHECK_FALSE(cfg.has("mesh", "ny"));
  CHECK(cfg.has_section("solver"));
  CHECK_FALSE(cfg.has_section("output"));
  CHECK(cfg.get_int("mesh", "nx") == 16);
  CHECK(cfg.get_double("mesh", "lx") == 2.5);
  CHECK(cfg.get_double("mesh", "ly", 1.0) == 1.0); // fallback
  CHECK(cfg.get_bool("solver", "upwind", false) == true);
  CHECK(cfg.get_double("solver", "newton_tol") == 1e-9);
  CHECK(cfg.line_of("solver", "upwind") == 5);
}

TEST_CASE("boolean spellings") {
  Config cfg = parse_config_text("[solver]\na=true\nb=1\nc=on\nd=false\ne=0\nf=off\ng=maybe\n");
  CHECK(cfg.get_bool("solver", "a", false));
  CHECK(cfg.get_bool("solver", "b", false));
  CHECK(cfg.get_bool("solver", "c", false));
  CHECK_FALSE(cfg.get_bool("solver", "d", true));
  CHECK_FALSE(cfg.get_bool("solver", "e", true));
  CHECK_FALSE(cfg.get_bool("solver", "f", true));
  CHECK_THROWS_AS(cfg.get_bool("solver", "g", false), ConfigError);
}

TEST_CASE("comments, blank lines, inline comments, whitespace") {
  Config cfg = parse_config_text("# full-line comment\n"
                                 "\n"
                                 "[time]\n"
                                 "tau = 0.5   # trailing comment\n"
                                 "  t_end=2.0\n");
  CHECK(cfg.get_double("time", "tau") == 0.5);
  CHECK(cfg.get_double("time", "t_end") == 2.0);
}

TEST_CASE("value keeps everything after the first equals sign") {
  // coefficient specs embed their own key=value pairs
  Config cfg = parse_config_text("[coefficients]\nb = logistic lo=0.05 hi=0.40 rate=0.25\n");
  CHECK(cfg.get_string("coefficients", "b") == "logistic lo=0.05 hi=0.40 rate=0.25");
}

TEST_CASE("duplicate key names both lines") {
  std::string msg = what_of([] {
    parse_config_text("[coefficients]\nb = constant value=1\nb = constant value=2\n", "dup.cfg");
  });
  CHECK(msg.find("dup.cfg") != std::string::npos);
  CHECK(msg.find("duplicate key 'b'") != std::string::npos);
  CHECK(msg.find("lines 2 and 3") != std::string::npos);
}

TEST_CASE("structural parse errors carry line numbers") {
  CHECK(what_of([] { parse_config_text("[nosuch]\nk = 1\n"); })
            .find("unknown section [nosuch] at line 1") != std::string::npos);
  CHECK(what_of([] { parse_config_text("k = 1\n"); })
            .find("key outside any [section] at line 1") != std::string::npos);
  CHECK(what_of([] { parse_config_text("[mesh\nnx = 1\n"); })
            .find("malformed section header at line 1") != std::string::npos);
  CHECK(what_of([] { parse_config_text("[mesh]\njust words\n"); })
            .find("expected 'key = value' at line 2") != std::string::npos);
  CHECK(what_of([] { parse_config_text("[mesh]\n= 3\n"); }).find("empty key at line 2") !=
        std::string::npos);
}

TEST_CASE("type mismatch errors name key, value and line") {
  Config cfg = parse_config_text("[mesh]\nnx = many\nlx = wide\n", "bad.cfg");
  std::string msg = what_of([&] { cfg.get_int("mesh", "nx"); });
  CHECK(msg.find("'nx'") != std::string::npos);
  CHECK(msg.find("not an integer") != std::string::npos);
  CHECK(msg.find("'many'") != std::string::npos);
  CHECK(msg.find("(line 2)") != std::string::npos);

  msg = what_of([&] { cfg.get_double("mesh", "lx"); });
  CHECK(msg.find("not a finite number") != std::string::npos);
  CHECK(msg.find("(line 3)") != std::string::npos);

  // a double with trailing garbage is rejected, not truncated
  Config cfg2 = parse_config_text("[time]\ntau = 0.5abc\n");
  CHECK_THROWS_AS(cfg2.get_double("time", "tau"), ConfigError);
  // an int getter rejects fractional values
  Config cfg3 = parse_config_text("[mesh]\nnx = 2.5\n");
  CHECK_THROWS_AS(cfg3.get_int("mesh", "nx"), ConfigError);
}

TEST_CASE("missing required key") {
  Config cfg = parse_config_text("[time]\ntau = 0.1\n");
  std::string msg = what_of([&] { cfg.get_double("time", "t_end"); });
  CHECK(msg.find("missing required key 't_end' in [time]") != std::string::npos);
}

TEST_CASE("consumption tracking rejects typo keys") {
  Config cfg = parse_config_text("[time]\ntau = 0.1\ntua = 0.2\n", "typo.cfg");
  cfg.get_double("time", "tau");
  std::string msg = what_of([&] { cfg.check_consumed(); });
  CHECK(msg.find("typo.cfg: unknown key(s)") != std::string::npos);
  CHECK(msg.find("'tua' in [time] (line 3)") != std::string::npos);

  // consuming everything clears the complaint
  cfg.mark_consumed("time", "tua");
  CHECK_NOTHROW(cfg.check_consumed());
}

TEST_CASE("fallback getters consume the key too") {
  Config cfg = parse_config_text("[output]\ndir = out\n");
  CHECK(cfg.get_string("output", "dir", "default") == "out");
  CHECK_NOTHROW(cfg.check_consumed());
}

TEST_CASE("keys() lists a section in sorted order") {
  Config cfg = parse_config_text("[solver]\nzeta = 1\nalpha = 2\n");
  auto ks = cfg.keys("solver");
  REQUIRE(ks.size() == 2);
  CHECK(ks[0] == "alpha");
  CHECK(ks[1] == "zeta");
  CHECK(cfg.keys("mesh").empty());
}

TEST_CASE("parse_config surfaces unreadable paths") {
  std::string msg;
  try {
    parse_config("/nonexistent/nowhere.cfg");
  } catch (const ConfigError& e) {
    msg = e.what();
  }
  CHECK(msg.find("cannot open config file") != std::string::npos);
  CHECK(msg.find("/nonexistent/nowhere.cfg") != std::string::npos);
}
