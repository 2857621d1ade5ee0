// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "usct/config.hpp"
#include "usct/error.hpp"

using namespace usct;

namespace {

ErrorCode parse_code(const char* text) {
  try {
    Config::parse(text, "t.cfg");
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("config parses keys, comments and whitespace") {
  const auto c = Config::parse("# header\nnx = 60\n  dx=0.6e-3   # trailing\n\nsponge = off\nencoder = gaussian\n");
  CHECK(c.get_int("nx", 0) == 60);
  CHECK(c.get_double("dx", 0) == 0.6e-3);
  CHECK_FALSE(c.get_bool("sponge", true));
  CHECK(c.get_string("encoder", "") == "gaussian");
  CHECK(c.get_int("seed", 17) == 17);
}

TEST_CASE("config errors name the line") {
  CHECK(parse_code("nx = 60\nbogus = 1\n") == ErrorCode::ConfigError);
  CHECK(parse_code("nx = 60\nnx = 61\n") == ErrorCode::ConfigError);
  CHECK(parse_code("just text\n") == ErrorCode::ConfigError);
  try {
    Config::parse("nx = 60\nbogus = 1\n", "t.cfg");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t.cfg:2") != std::string::npos);
  }
  const auto c = Config::parse("nx = sixty\n");
  CHECK_THROWS_AS(c.get_int("nx", 0), Error);
}

TEST_CASE("acquisition defaults match the virtual imaging system") {
  const auto acq = acquisition_from(Config{});
  CHECK(acq.grid.nx == 360);
  CHECK(acq.grid.dx == 0.6e-3);
  CHECK(acq.array.radius() == doctest::Approx(110.4e-3).epsilon(1e-15));
  CHECK(acq.array.n_receivers() == 256);
  CHECK(acq.array.n_transmitters() == 64);
  CHECK(acq.pulse.f0 == 0.5e6);
  CHECK(acq.dt == 0.2e-6);
  CHECK(acq.n_steps == 640);
}

TEST_CASE("acquisition keys override defaults and feed the hash") {
  const auto a = acquisition_from(Config::parse("nx = 60\npad = 20\nring_radius = 0.0192\nn_receivers = 32\n"));
  CHECK(a.grid.nx == 60);
  CHECK(a.array.n_receivers() == 32);
  CHECK(a.array.n_transmitters() == 8);
  const auto b = acquisition_from(Config::parse("nx = 60\npad = 20\nring_radius = 0.0192\nn_receivers = 32\n"));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  const auto c = acquisition_from(Config::parse("nx = 60\npad = 20\nring_radius = 0.0192\nn_receivers = 32\ndt = 1.9e-7\n"));
  CHECK(config_hash(a) != config_hash(c));
  CHECK_THROWS_AS(acquisition_from(Config::parse("dt = 5e-7\n")), Error);
}
