// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace csiauth::testing {

std::vector<double> freqs(std::size_t K, double start, double step) {
  std::vector<double> f(K);
  for (std::size_t k = 0; k < K; ++k) f[k] = start + step * static_cast<double>(k);
  return f;
}

CsiMatrix random_matrix(Rng& rng, std::size_t K, std::size_t T) {
  CsiMatrix m(K, T, freqs(K));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t)
      m(k, t) = std::polar(rng.uniform(0.1, 2.0), rng.uniform(-std::numbers::pi, std::numbers::pi));
  return m;
}

CsiMatrix polar_matrix(const std::vector<std::vector<double>>& amp,
                       const std::vector<std::vector<double>>& phase) {
  const std::size_t K = amp.size();
  const std::size_t T = amp.front().size();
  CsiMatrix m(K, T, freqs(K));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t)
      m(k, t) = std::polar(amp[k][t], phase.empty() ? 0.0 : phase[k][t]);
  return m;
}

namespace {

void le16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xFF));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void le32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void be16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

}  // namespace

std::vector<std::uint8_t> pcap_bytes(const std::vector<NexmonFrame>& frames) {
  std::vector<std::uint8_t> out;
  le32(out, 0xA1B2C3D4);
  le16(out, 2);
  le16(out, 4);
  le32(out, 0);
  le32(out, 0);
  le32(out, 65535);
  le32(out, 1);  // Ethernet

  std::uint32_t usec = 0;
  for (const auto& f : frames) {
    const std::size_t K = f.re.size();
    std::vector<std::uint8_t> payload;
    le16(payload, 0x1111);
    payload.push_back(static_cast<std::uint8_t>(f.rssi));
    payload.push_back(0x08);
    for (int i = 0; i < 6; ++i) payload.push_back(static_cast<std::uint8_t>(0x10 + i));
    le16(payload, f.sequence);
    le16(payload, 0x0000);
    le16(payload, f.chanspec);
    le16(payload, 0x4345);
    for (std::size_t s = 0; s < K; ++s) {
      const std::size_t k = (s + K / 2) % K;  // storage slot s holds natural bin k
      le16(payload, static_cast<std::uint16_t>(f.re[k]));
      le16(payload, static_cast<std::uint16_t>(f.im[k]));
    }

    std::vector<std::uint8_t> pkt;
    for (int i = 0; i < 6; ++i) pkt.push_back(0xFF);
    for (int i = 0; i < 6; ++i) pkt.push_back(0x02);
    be16(pkt, 0x0800);
    const auto ip_len = static_cast<std::uint16_t>(20 + 8 + payload.size());
    pkt.push_back(0x45);
    pkt.push_back(0);
    be16(pkt, ip_len);
    be16(pkt, 0);
    be16(pkt, 0);
    pkt.push_back(64);
    pkt.push_back(17);  // UDP
    be16(pkt, 0);
    for (int i = 0; i < 4; ++i) pkt.push_back(10);
    for (int i = 0; i < 4; ++i) pkt.push_back(static_cast<std::uint8_t>(i == 3 ? 255 : 10));
    be16(pkt, 5500);
    be16(pkt, static_cast<std::uint16_t>(f.udp_port));
    be16(pkt, static_cast<std::uint16_t>(8 + payload.size()));
    be16(pkt, 0);
    pkt.insert(pkt.end(), payload.begin(), payload.end());

    const auto orig = static_cast<std::uint32_t>(pkt.size());
    pkt.resize(pkt.size() - std::min(f.truncate, pkt.size()));
    le32(out, 1700000000);
    le32(out, usec);
    usec += 1000;
    le32(out, static_cast<std::uint32_t>(pkt.size()));
    le32(out, orig);
    out.insert(out.end(), pkt.begin(), pkt.end());
  }
  return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream o(path, std::ios::binary);
  o.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_pcap(const std::filesystem::path& path, const std::vector<NexmonFrame>& frames) {
  write_bytes(path, pcap_bytes(frames));
}

std::vector<NexmonFrame> ramp_frames(std::size_t K, std::size_t T) {
  std::vector<NexmonFrame> frames(T);
  for (std::size_t t = 0; t < T; ++t) {
    auto& f = frames[t];
    f.sequence = static_cast<std::uint16_t>(t);
    for (std::size_t k = 0; k < K; ++k) {
      f.re.push_back(static_cast<std::int16_t>(k + 1 + t));
      f.im.push_back(static_cast<std::int16_t>(-static_cast<int>(k) + 2 * static_cast<int>(t)));
    }
  }
  return frames;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("csiauth_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

FeatureMatrix blobs(std::size_t classes, std::size_t per_class, std::size_t dims, double spread,
                    std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix F;
  for (std::size_t j = 0; j < dims; ++j) F.names.push_back("x" + std::to_string(j));
  std::vector<std::vector<double>> centres(classes, std::vector<double>(dims));
  for (auto& c : centres)
    for (auto& v : c) v = rng.uniform(-spread, spread) * static_cast<double>(classes);
  std::vector<double> row(dims);
  for (std::size_t i = 0; i < per_class; ++i)
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t j = 0; j < dims; ++j) row[j] = centres[c][j] + rng.normal();
      F.add_row(row, "C" + std::to_string(c), "C" + std::to_string(c) + "#" + std::to_string(i));
    }
  return F;
}

}  // namespace csiauth::testing
