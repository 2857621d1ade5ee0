// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tempdir.hpp"
#include "usct/cli.hpp"
#include "usct/error.hpp"
#include "usct/io.hpp"

using namespace usct;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run usct_cmd(std::vector<std::string> args) {
  args.insert(args.begin(), "usct");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::uint8_t> bytes(const std::filesystem::path& p) { return io::read_file(p); }

constexpr const char* kDeskConfig =
    "nx = 60\npad = 20\nring_radius = 0.0192\nn_receivers = 16\ntx_stride = 8\nn_steps = 150\n";

}  // namespace

TEST_CASE("simulate twice with the same seed gives identical outputs") {
  testing::TempDir dir("cli_sim");
  const std::string cfg = (dir / "desk.cfg").string();
  std::ofstream(cfg) << kDeskConfig;
  const std::string p = (dir / "p").string();
  REQUIRE(usct_cmd({"phantom", "--config", cfg, "--out", p, "--seed", "3", "--quiet"}).code == 0);
  for (const char* out : {"d1.uswf", "d2.uswf"}) {
    const auto r = usct_cmd({"simulate", "--config", cfg, "--phantom", p + ".sos", "--out", (dir / out).string(),
                             "--snr-db", "30", "--seed", "7", "--quiet"});
    REQUIRE(r.code == 0);
  }
  CHECK(bytes(dir / "d1.uswf") == bytes(dir / "d2.uswf"));
  const auto r = usct_cmd({"simulate", "--config", cfg, "--phantom", p + ".sos", "--out",
                           (dir / "d3.uswf").string(), "--snr-db", "30", "--seed", "8", "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(bytes(dir / "d1.uswf") != bytes(dir / "d3.uswf"));
}

TEST_CASE("pipeline commands compose and the manifest verifies") {
  testing::TempDir dir("cli_pipe");
  const std::string cfg = (dir / "desk.cfg").string();
  std::ofstream(cfg) << kDeskConfig;
  const std::string m = (dir / "m.json").string();
  const std::string p = (dir / "p").string();
  const std::string d = (dir / "d.uswf").string();
  REQUIRE(usct_cmd({"phantom", "--config", cfg, "--out", p, "--seed", "1", "--manifest", m, "--quiet"}).code == 0);
  REQUIRE(usct_cmd({"simulate", "--config", cfg, "--phantom", p + ".sos", "--out", d, "--manifest", m, "--quiet"})
              .code == 0);
  REQUIRE(usct_cmd({"encode", "--data", d, "--out", (dir / "e.uswf").string(), "--weights-out",
                    (dir / "w.usenc").string(), "--channels", "2", "--seed", "4", "--manifest", m, "--quiet"})
              .code == 0);
  const auto fwi = usct_cmd({"fwi", "--config", cfg, "--data", d, "--init", "water", "--iters", "3", "--out",
                             (dir / "r.sos").string(), "--seed", "1", "--quiet"});
  REQUIRE(fwi.code == 0);
  CHECK(std::count(fwi.out.begin(), fwi.out.end(), '\n') == 3);

  // A probability map equal to the mask is a perfect observer.
  int nx = 0;
  const auto mask = io::unpack_mask(io::load(p + ".msk", io::ContainerKind::Mask), &nx);
  const std::vector<double> prob(mask.begin(), mask.end());
  io::save(dir / "obs.prob", io::pack_image(nx, prob));
  const auto a = usct_cmd({"assess", "--est", (dir / "r.sos").string(), "--truth", p + ".sos", "--prob",
                           (dir / "obs.prob").string(), "--mask", p + ".msk", "--threshold", "0.02", "--format",
                           "kv"});
  REQUIRE(a.code == 0);
  for (const char* key : {"rmse=", "ssim=", "dice="}) CHECK(a.out.find(key) != std::string::npos);

  const auto info = usct_cmd({"info", d, "--manifest", m});
  CHECK(info.code == 0);
  CHECK(info.out.find("USCTWAVE") != std::string::npos);
  CHECK(info.out.find("files verified") != std::string::npos);
}

TEST_CASE("exit codes distinguish error classes") {
  testing::TempDir dir("cli_err");
  CHECK(usct_cmd({}).code == cli::kUsageExit);
  CHECK(usct_cmd({"simulate", "--out", "x"}).code == cli::kUsageExit);
  CHECK(usct_cmd({"frobnicate"}).code == cli::kUsageExit);
  CHECK(usct_cmd({"--help"}).code == 0);

  const auto missing = usct_cmd({"simulate", "--phantom", (dir / "none.sos").string(), "--out", "x", "--quiet"});
  CHECK(missing.code == exit_code(ErrorCode::IoError));

  std::ofstream(dir / "bad.cfg") << "colour = blue\n";
  CHECK(usct_cmd({"info", "--config", (dir / "bad.cfg").string()}).code == exit_code(ErrorCode::ConfigError));

  std::ofstream(dir / "junk.sos") << "USCTSOSM";
  const auto junk = usct_cmd({"info", (dir / "junk.sos").string()});
  CHECK(junk.code == exit_code(ErrorCode::FormatError));
  CHECK(junk.err.find("at byte") != std::string::npos);
}
