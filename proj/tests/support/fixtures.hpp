// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for unit and acceptance tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csiauth/error.hpp"
#include "csiauth/model.hpp"
#include "csiauth/random.hpp"

namespace csiauth::testing {

/// Random complex matrix with amplitudes in [0.1, 2) and phases in [-pi, pi).
CsiMatrix random_matrix(Rng& rng, std::size_t K, std::size_t T);

/// Matrix whose entries are amp[k][t] * exp(i phase[k][t]).
CsiMatrix polar_matrix(const std::vector<std::vector<double>>& amp,
                       const std::vector<std::vector<double>>& phase = {});

std::vector<double> freqs(std::size_t K, double start = 5.16e9, double step = 312.5e3);

/// One Nexmon CSI frame as it appears in the UDP payload.
struct NexmonFrame {
  std::vector<std::int16_t> re;  // natural (unshifted) order, as the parser returns it
  std::vector<std::int16_t> im;
  std::uint16_t chanspec = 0xD826;  // 5 GHz, 40 MHz, channel 38
  std::uint16_t sequence = 0;
  std::int8_t rssi = -40;
  int udp_port = 5500;
  // Bytes cut from the end of the captured packet (incl_len < orig_len).
  std::size_t truncate = 0;
};

/// Serializes frames into a classic little-endian Ethernet/IPv4/UDP pcap
/// using the default Nexmon payload layout with FFT-shifted storage.
std::vector<std::uint8_t> pcap_bytes(const std::vector<NexmonFrame>& frames);
void write_pcap(const std::filesystem::path& path, const std::vector<NexmonFrame>& frames);

/// Frames of a deterministic K-subcarrier pattern: re = k + 1 + t, im = -k + 2 t.
std::vector<NexmonFrame> ramp_frames(std::size_t K, std::size_t T);

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

/// Gaussian blobs: `classes` labels "C0".., `per_class` rows each, centres
/// spaced `spread` apart on every axis with unit noise.
FeatureMatrix blobs(std::size_t classes, std::size_t per_class, std::size_t dims, double spread,
                    std::uint64_t seed);

}  // namespace csiauth::testing

// Checks that `expr` throws csiauth::Error carrying `expected_code`.
#define CHECK_THROWS_AS_CODE(expr, expected_code)                  \
  do {                                                             \
    bool threw_ = false;                                           \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const ::csiauth::Error& e_) {                         \
      threw_ = true;                                               \
      CHECK(::csiauth::to_string(e_.code()) ==                     \
            ::csiauth::to_string(expected_code));                  \
    }                                                              \
    CHECK_MESSAGE(threw_, "expected " #expr " to throw");          \
  } while (false)
