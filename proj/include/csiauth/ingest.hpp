// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::ingest {

/// Byte layout of a Nexmon CSI UDP payload. The defaults describe the
/// bcm43455c0 build: an 18-byte header followed by K little-endian int16
/// (real, imag) pairs in FFT bin order.
struct NexmonLayout {
  std::uint16_t magic = 0x1111;
  std::size_t magic_offset = 0;
  std::size_t rssi_offset = 2;
  std::size_t frame_control_offset = 3;
  std::size_t source_mac_offset = 4;
  std::size_t sequence_offset = 10;
  std::size_t core_spatial_offset = 12;
  std::size_t chanspec_offset = 14;
  std::size_t chip_version_offset = 16;
  std::size_t csi_offset = 18;
  // Reorder FFT bins so subcarrier 0 is the lowest frequency.
  bool fft_shift = true;
};

struct PcapSource {
  std::filesystem::path path;
  int udp_port = 5500;
  std::size_t expected_subcarriers = 128;
  NexmonLayout layout;
  double default_center_hz = 5.18e9;
  double default_bandwidth_hz = 40e6;
};

struct FrameHeader {
  std::int8_t rssi = 0;
  std::uint8_t frame_control = 0;
  std::array<std::uint8_t, 6> source_mac{};
  std::uint16_t sequence = 0;
  std::uint16_t core_spatial = 0;
  std::uint16_t chanspec = 0;
  std::uint16_t chip_version = 0;
};

struct PcapParseResult {
  CsiMatrix matrix;
  std::vector<FrameHeader> frames;
  std::size_t skipped_count = 0;    // truncated + malformed + wrong subcarrier count
  std::size_t truncated_count = 0;
  std::size_t mismatched_count = 0;
};

/// Decoded Broadcom chanspec; `valid` is false when band or bandwidth bits
/// are not recognised.
struct Chanspec {
  bool valid = false;
  int channel = 0;
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
};

Chanspec decode_chanspec(std::uint16_t chanspec);

/// Subcarrier centre frequencies start + k * step, k = 0..K-1.
std::vector<double> uniform_freqs(double start_hz, double step_hz, std::size_t count);

void validate(const PcapSource& src);

/// Reads a classic libpcap capture and stacks every accepted CSI frame as a
/// column, in capture order.
PcapParseResult parse_pcap(const PcapSource& src);

inline constexpr std::array<char, 8> kPortableMagic = {'C', 'S', 'I', 'P', 'O', 'R', 'T', '1'};
inline constexpr std::uint32_t kPortableVersion = 1;

struct PortableRecord {
  CsiMatrix matrix;
  SubjectLabel label;
};

std::vector<std::uint8_t> encode_portable(const CsiMatrix& m, const SubjectLabel& label);
PortableRecord decode_portable(std::span<const std::uint8_t> bytes);

void write_portable(const CsiMatrix& m, const SubjectLabel& label,
                    const std::filesystem::path& path);
PortableRecord read_portable(const std::filesystem::path& path);

/// A dataset directory holds one portable file per record plus
/// manifest.json listing them in order.
/// `provenance` entries are copied verbatim into the manifest.
void write_dataset_dir(const Dataset& d, const std::filesystem::path& dir,
                       const std::vector<std::pair<std::string, std::string>>& provenance = {});
Dataset read_dataset_dir(const std::filesystem::path& dir);

}  // namespace csiauth::ingest
