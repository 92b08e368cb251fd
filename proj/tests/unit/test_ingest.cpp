// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "csiauth/ingest.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace csiauth;
namespace fs = std::filesystem;

namespace {

ingest::PcapSource source(const fs::path& p) {
  ingest::PcapSource s;
  s.path = p;
  return s;
}

}  // namespace

TEST_CASE("parse_pcap decodes fixture frames value for value") {
  const auto dir = testing::temp_dir("pcap_ok");
  const auto frames = testing::ramp_frames(128, 10);
  testing::write_pcap(dir / "a.pcap", frames);
  const auto r = ingest::parse_pcap(source(dir / "a.pcap"));
  REQUIRE(r.matrix.subcarriers() == 128);
  REQUIRE(r.matrix.samples() == 10);
  CHECK(r.skipped_count == 0);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t k = 0; k < 128; ++k) {
      CHECK(r.matrix(k, t).real() == frames[t].re[k]);
      CHECK(r.matrix(k, t).imag() == frames[t].im[k]);
    }
  CHECK(r.frames[3].sequence == 3);
  // chanspec 0xD826: channel 38, 40 MHz -> centred on 5190 MHz
  const auto& f = r.matrix.freqs();
  CHECK(f[64] == doctest::Approx(5.19e9));
  CHECK(f[1] - f[0] == doctest::Approx(40e6 / 128));
  CHECK(validate_matrix(r.matrix).empty());
}

TEST_CASE("parse_pcap skips truncated tail frames") {
  const auto dir = testing::temp_dir("pcap_trunc");
  auto frames = testing::ramp_frames(128, 7);
  frames[5].truncate = 100;
  frames[6].truncate = 3;
  testing::write_pcap(dir / "t.pcap", frames);
  const auto r = ingest::parse_pcap(source(dir / "t.pcap"));
  CHECK(r.matrix.samples() == 5);
  CHECK(r.skipped_count == 2);
  CHECK(r.truncated_count == 2);
}

TEST_CASE("parse_pcap skips frames with another subcarrier count") {
  const auto dir = testing::temp_dir("pcap_mixed");
  auto frames = testing::ramp_frames(128, 4);
  auto other = testing::ramp_frames(64, 2);
  frames.insert(frames.begin() + 1, other.begin(), other.end());
  testing::write_pcap(dir / "m.pcap", frames);
  const auto r = ingest::parse_pcap(source(dir / "m.pcap"));
  CHECK(r.matrix.samples() == 4);
  CHECK(r.mismatched_count == 2);
  CHECK(r.matrix(0, 1).real() == 2.0);  // second accepted frame keeps capture order
}

TEST_CASE("parse_pcap errors") {
  const auto dir = testing::temp_dir("pcap_err");
  CHECK_THROWS_WITH_AS(ingest::parse_pcap(source(dir / "missing.pcap")), doctest::Contains("missing.pcap"),
                       Error);
  auto frames = testing::ramp_frames(128, 3);
  for (auto& f : frames) f.udp_port = 6000;
  testing::write_pcap(dir / "none.pcap", frames);
  try {
    ingest::parse_pcap(source(dir / "none.pcap"));
    FAIL("expected NoCsiFrames");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_csi_frames);
  }
  auto all_trunc = testing::ramp_frames(128, 3);
  for (auto& f : all_trunc) f.truncate = 10;
  testing::write_pcap(dir / "trunc.pcap", all_trunc);
  try {
    ingest::parse_pcap(source(dir / "trunc.pcap"));
    FAIL("expected TruncatedFrame");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::truncated_frame);
  }
  testing::write_bytes(dir / "junk.pcap", std::vector<std::uint8_t>(40, 0x42));
  try {
    ingest::parse_pcap(source(dir / "junk.pcap"));
    FAIL("expected BadMagic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::bad_magic);
  }
  auto bad = source(dir / "a.pcap");
  bad.udp_port = 0;
  CHECK_THROWS_AS(ingest::validate(bad), Error);
  bad.udp_port = 5500;
  bad.expected_subcarriers = 100;
  CHECK_THROWS_AS(ingest::validate(bad), Error);
}

TEST_CASE("decode_chanspec") {
  const auto c = ingest::decode_chanspec(0xD024);
  CHECK(c.valid);
  CHECK(c.channel == 36);
  CHECK(c.center_hz == 5.18e9);
  CHECK(c.bandwidth_hz == 20e6);
  const auto w = ingest::decode_chanspec(0xD826);
  CHECK(w.valid);
  CHECK(w.channel == 38);
  CHECK(w.bandwidth_hz == 40e6);
  const auto g = ingest::decode_chanspec(0x1006);
  CHECK(g.center_hz == 2.437e9);
  CHECK_FALSE(ingest::decode_chanspec(0x0000).valid);
}

TEST_CASE("portable format round trip is bit exact") {
  Rng rng(5);
  const auto dir = testing::temp_dir("portable");
  auto m = testing::random_matrix(rng, 4, 3);
  const SubjectLabel label{"S07", 3, Hand::left};
  ingest::write_portable(m, label, dir / "x.csiport");
  const auto r = ingest::read_portable(dir / "x.csiport");
  CHECK(r.label == label);
  REQUIRE(r.matrix.values().size() == m.values().size());
  for (std::size_t i = 0; i < m.values().size(); ++i) CHECK(r.matrix.values()[i] == m.values()[i]);
  CHECK(r.matrix.freqs() == m.freqs());
  CHECK(ingest::encode_portable(m, label) == ingest::encode_portable(m, label));
}

TEST_CASE("portable format errors") {
  Rng rng(6);
  const auto m = testing::random_matrix(rng, 4, 3);
  auto bytes = ingest::encode_portable(m, {"S1", 0, Hand::right});
  auto bad_magic = bytes;
  bad_magic[7] = 'X';
  auto code_of = [](const std::vector<std::uint8_t>& b) {
    try {
      ingest::decode_portable(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io_error;
  };
  CHECK(code_of(bad_magic) == ErrorCode::bad_magic);
  auto short_payload = bytes;
  short_payload.resize(short_payload.size() - 16);
  CHECK(code_of(short_payload) == ErrorCode::length_mismatch);
  auto version = bytes;
  version[8] = 9;
  CHECK(code_of(version) == ErrorCode::unsupported_version);
}

TEST_CASE("dataset directory round trip") {
  Rng rng(8);
  Dataset d;
  d.records.push_back({testing::random_matrix(rng, 4, 5), {"A", 0, Hand::right}});
  d.records.push_back({testing::random_matrix(rng, 4, 5), {"B", 1, Hand::left}});
  const auto dir = testing::temp_dir("dsdir");
  ingest::write_dataset_dir(d, dir, {{"note", "x"}});
  const auto back = ingest::read_dataset_dir(dir);
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[1].label == d.records[1].label);
  CHECK(back.records[1].matrix.values() == d.records[1].matrix.values());
  CHECK_THROWS_AS(ingest::read_dataset_dir(dir / "nope"), Error);
}
