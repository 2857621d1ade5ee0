// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "doctest.h"
#include "tempdir.hpp"
#include "usct/error.hpp"
#include "usct/manifest.hpp"

using namespace usct;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("manifest round trips through JSON") {
  testing::TempDir dir("manifest");
  write_text(dir / "a.sos", "alpha");
  write_text(dir / "b.uswf", "bravo bravo");
  DatasetManifest m;
  m.set_config(AcquisitionConfig{});
  m.phantoms.push_back({"p0", 12, "B"});
  m.phantoms.push_back({"external", std::nullopt, ""});
  m.encoder = EncoderDescriptor{"rademacher", 4, 64, 99, "w.usenc"};
  m.noise = NoiseDescriptor{30.0, 7};
  m.add_file(dir.path(), dir / "a.sos", "phantom");
  m.add_file(dir.path(), dir / "b.uswf", "waveform");
  CHECK(m.files[0].path == "a.sos");
  CHECK(m.files[1].bytes == 11);

  const auto back = DatasetManifest::from_json(m.to_json());
  CHECK(back == m);
  write_manifest(dir / "m.json", m);
  CHECK(read_manifest(dir / "m.json") == m);
  CHECK_NOTHROW(verify_manifest(m, dir.path()));

  m.add_file(dir.path(), dir / "a.sos", "phantom");
  CHECK(m.files.size() == 2);
}

TEST_CASE("manifest verification detects changed and missing files") {
  testing::TempDir dir("manifest_verify");
  write_text(dir / "a.sos", "alpha");
  DatasetManifest m;
  m.add_file(dir.path(), dir / "a.sos", "phantom");

  write_text(dir / "a.sos", "alphA");
  try {
    verify_manifest(m, dir.path());
    FAIL("expected ChecksumMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ChecksumMismatch);
  }
  std::filesystem::remove(dir / "a.sos");
  try {
    verify_manifest(m, dir.path());
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("malformed manifests are format errors") {
  for (const char* text : {"", "{", "[]", R"({"format":"other","version":1})", R"({"format":"usct-dataset","version":2})"}) {
    try {
      DatasetManifest::from_json(text);
      FAIL("expected an error for " << text);
    } catch (const Error& e) {
      CHECK((e.code() == ErrorCode::FormatError || e.code() == ErrorCode::UnsupportedVersion));
    }
  }
}
