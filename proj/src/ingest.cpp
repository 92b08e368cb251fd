// SPDX-License-Identifier: Apache-2.0
#include "csiauth/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "csiauth/error.hpp"
#include "json.hpp"

namespace csiauth::ingest {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::file_not_found, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

// Little/big-endian field readers over a bounded byte view.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, bool big_endian = false)
      : bytes_(bytes), big_endian_(big_endian) {}

  bool has(std::size_t offset, std::size_t n) const { return offset + n <= bytes_.size(); }

  std::uint8_t u8(std::size_t offset) const { return bytes_[offset]; }

  std::uint16_t u16(std::size_t offset) const {
    const std::uint16_t a = bytes_[offset], b = bytes_[offset + 1];
    return big_endian_ ? static_cast<std::uint16_t>((a << 8) | b)
                       : static_cast<std::uint16_t>((b << 8) | a);
  }

  std::uint32_t u32(std::size_t offset) const {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::uint32_t byte = bytes_[offset + i];
      v |= big_endian_ ? byte << (8 * (3 - i)) : byte << (8 * i);
    }
    return v;
  }

  std::uint64_t u64(std::size_t offset) const {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      const std::uint64_t byte = bytes_[offset + i];
      v |= big_endian_ ? byte << (8 * (7 - i)) : byte << (8 * i);
    }
    return v;
  }

  double f64(std::size_t offset) const { return std::bit_cast<double>(u64(offset)); }

  std::span<const std::uint8_t> slice(std::size_t offset, std::size_t n) const {
    return bytes_.subspan(offset, n);
  }

  std::size_t size() const { return bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  bool big_endian_;
};

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint16_t kEtherTypeIpv6 = 0x86DD;
constexpr std::uint16_t kEtherTypeVlan = 0x8100;
constexpr std::uint8_t kIpProtoUdp = 17;

enum class UdpStatus { none, ok, truncated };

struct UdpView {
  UdpStatus status = UdpStatus::none;
  std::span<const std::uint8_t> payload;
};

// Locates the UDP payload inside one captured packet. Packets that are not
// UDP to `port` yield status none.
UdpView find_udp_payload(std::span<const std::uint8_t> pkt, std::uint32_t linktype, int port,
                         bool capture_truncated) {
  ByteReader net(pkt, /*big_endian=*/true);
  std::size_t ip_offset = 0;
  std::uint16_t ethertype = 0;
  switch (linktype) {
    case 1: {  // Ethernet
      if (!net.has(0, 14)) return {};
      ethertype = net.u16(12);
      ip_offset = 14;
      while (ethertype == kEtherTypeVlan) {
        if (!net.has(ip_offset, 4)) return {};
        ethertype = net.u16(ip_offset + 2);
        ip_offset += 4;
      }
      break;
    }
    case 12:
    case 101: {  // raw IP
      if (!net.has(0, 1)) return {};
      const int version = net.u8(0) >> 4;
      ethertype = version == 6 ? kEtherTypeIpv6 : kEtherTypeIpv4;
      break;
    }
    case 113: {  // Linux cooked capture v1
      if (!net.has(0, 16)) return {};
      ethertype = net.u16(14);
      ip_offset = 16;
      break;
    }
    default:
      return {};
  }

  std::size_t udp_offset = 0;
  if (ethertype == kEtherTypeIpv4) {
    if (!net.has(ip_offset, 20)) return {};
    if ((net.u8(ip_offset) >> 4) != 4) return {};
    const std::size_t ihl = static_cast<std::size_t>(net.u8(ip_offset) & 0x0F) * 4;
    if (ihl < 20 || net.u8(ip_offset + 9) != kIpProtoUdp) return {};
    udp_offset = ip_offset + ihl;
  } else if (ethertype == kEtherTypeIpv6) {
    if (!net.has(ip_offset, 40) || net.u8(ip_offset + 6) != kIpProtoUdp) return {};
    udp_offset = ip_offset + 40;
  } else {
    return {};
  }

  if (!net.has(udp_offset, 8)) return {};
  if (net.u16(udp_offset + 2) != port) return {};
  const std::size_t udp_length = net.u16(udp_offset + 4);
  if (udp_length < 8) return {UdpStatus::truncated, {}};
  const std::size_t available = pkt.size() - udp_offset;
  if (udp_length > available || capture_truncated) {
    return {UdpStatus::truncated, pkt.subspan(udp_offset + 8, std::min(udp_length, available) - 8)};
  }
  return {UdpStatus::ok, pkt.subspan(udp_offset + 8, udp_length - 8)};
}

bool is_supported_subcarrier_count(std::size_t k) {
  return k == 64 || k == 128 || k == 256 || k == 512;
}

}  // namespace

Chanspec decode_chanspec(std::uint16_t chanspec) {
  Chanspec out;
  out.channel = chanspec & 0x00FF;
  const std::uint16_t band = chanspec & 0xC000;
  switch (chanspec & 0x3800) {
    case 0x1000: out.bandwidth_hz = 20e6; break;
    case 0x1800: out.bandwidth_hz = 40e6; break;
    case 0x2000: out.bandwidth_hz = 80e6; break;
    case 0x2800: out.bandwidth_hz = 160e6; break;
    default: return out;
  }
  if (out.channel == 0) return out;
  if (band == 0xC000) {
    out.center_hz = (5000.0 + 5.0 * out.channel) * 1e6;
  } else if (band == 0x0000) {
    out.center_hz = out.channel == 14 ? 2484e6 : (2407.0 + 5.0 * out.channel) * 1e6;
  } else {
    return out;
  }
  out.valid = true;
  return out;
}

std::vector<double> uniform_freqs(double start_hz, double step_hz, std::size_t count) {
  std::vector<double> f(count);
  for (std::size_t k = 0; k < count; ++k) f[k] = start_hz + static_cast<double>(k) * step_hz;
  return f;
}

void validate(const PcapSource& src) {
  if (src.udp_port < 1 || src.udp_port > 65535) {
    throw Error(ErrorCode::invalid_config, "udp_port must be in [1, 65535]");
  }
  if (!is_supported_subcarrier_count(src.expected_subcarriers)) {
    throw Error(ErrorCode::invalid_config, "expected_subcarriers must be one of 64, 128, 256, 512");
  }
}

PcapParseResult parse_pcap(const PcapSource& src) {
  validate(src);
  const auto bytes = read_file(src.path);
  if (bytes.size() < 24) {
    throw Error(ErrorCode::no_csi_frames, src.path.string() + ": shorter than a pcap header");
  }

  const std::uint32_t raw_magic = ByteReader(bytes).u32(0);
  bool big_endian = false;
  bool nanosecond = false;
  switch (raw_magic) {
    case 0xA1B2C3D4: break;
    case 0xA1B23C4D: nanosecond = true; break;
    case 0xD4C3B2A1: big_endian = true; break;
    case 0x4D3CB2A1: big_endian = true; nanosecond = true; break;
    default:
      throw Error(ErrorCode::bad_magic, src.path.string() + ": not a classic pcap file");
  }
  const ByteReader file(bytes, big_endian);
  const std::uint32_t linktype = file.u32(20);

  const std::size_t K = src.expected_subcarriers;
  const auto& layout = src.layout;
  const std::size_t csi_bytes = 4 * K;

  PcapParseResult result;
  std::vector<Complex> columns;  // frame-major, transposed at the end
  double first_ts = 0.0;
  double last_ts = 0.0;
  std::size_t offset = 24;
  while (offset + 16 <= bytes.size()) {
    const double ts = file.u32(offset) + file.u32(offset + 4) * (nanosecond ? 1e-9 : 1e-6);
    const std::size_t incl_len = file.u32(offset + 8);
    const std::size_t orig_len = file.u32(offset + 12);
    offset += 16;
    const std::size_t avail = std::min(incl_len, bytes.size() - offset);
    const auto pkt = std::span<const std::uint8_t>(bytes).subspan(offset, avail);
    offset += avail;

    const auto udp = find_udp_payload(pkt, linktype, src.udp_port,
                                      avail < incl_len || incl_len < orig_len);
    if (udp.status == UdpStatus::none) continue;

    const ByteReader payload(udp.payload);
    if (!payload.has(layout.magic_offset, 2) ||
        payload.u16(layout.magic_offset) != layout.magic) {
      if (udp.status == UdpStatus::truncated) {
        ++result.truncated_count;
        ++result.skipped_count;
      }
      continue;  // other traffic on the CSI port
    }
    if (udp.status == UdpStatus::truncated || !payload.has(layout.csi_offset, 0)) {
      ++result.truncated_count;
      ++result.skipped_count;
      continue;
    }
    const std::size_t body = payload.size() - layout.csi_offset;
    if (body % 4 != 0 || !payload.has(layout.chip_version_offset, 2)) {
      ++result.truncated_count;
      ++result.skipped_count;
      continue;
    }
    if (body != csi_bytes) {
      if (is_supported_subcarrier_count(body / 4)) {
        ++result.mismatched_count;
      } else {
        ++result.truncated_count;
      }
      ++result.skipped_count;
      continue;
    }

    FrameHeader hdr;
    hdr.rssi = static_cast<std::int8_t>(payload.u8(layout.rssi_offset));
    hdr.frame_control = payload.u8(layout.frame_control_offset);
    for (std::size_t i = 0; i < 6; ++i) hdr.source_mac[i] = payload.u8(layout.source_mac_offset + i);
    hdr.sequence = payload.u16(layout.sequence_offset);
    hdr.core_spatial = payload.u16(layout.core_spatial_offset);
    hdr.chanspec = payload.u16(layout.chanspec_offset);
    hdr.chip_version = payload.u16(layout.chip_version_offset);

    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t bin = layout.fft_shift ? (k + K / 2) % K : k;
      const std::size_t at = layout.csi_offset + 4 * bin;
      const auto re = static_cast<std::int16_t>(payload.u16(at));
      const auto im = static_cast<std::int16_t>(payload.u16(at + 2));
      columns.emplace_back(static_cast<double>(re), static_cast<double>(im));
    }
    if (result.frames.empty()) first_ts = ts;
    last_ts = ts;
    result.frames.push_back(hdr);
  }

  const std::size_t T = result.frames.size();
  if (T == 0) {
    if (result.truncated_count > 0 && result.mismatched_count == 0) {
      throw Error(ErrorCode::truncated_frame,
                  src.path.string() + ": all " + std::to_string(result.truncated_count) +
                      " CSI frames are truncated");
    }
    throw Error(ErrorCode::no_csi_frames, src.path.string() + ": no CSI frames on UDP port " +
                                              std::to_string(src.udp_port));
  }
  if (T < 2) {
    throw Error(ErrorCode::no_csi_frames,
                src.path.string() + ": only one CSI frame accepted, need at least 2");
  }

  const Chanspec cs = decode_chanspec(result.frames.front().chanspec);
  const double center = cs.valid ? cs.center_hz : src.default_center_hz;
  const double bandwidth = cs.valid ? cs.bandwidth_hz : src.default_bandwidth_hz;
  const double step = bandwidth / static_cast<double>(K);
  const double start = center - static_cast<double>(K / 2) * step;

  CsiMatrix m(K, T, uniform_freqs(start, step, K));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) m(k, t) = columns[t * K + k];
  }
  if (T > 1 && last_ts > first_ts) {
    m.sample_rate_hint = static_cast<double>(T - 1) / (last_ts - first_ts);
  }
  m.meta.source_id = src.path.filename().string();
  std::ostringstream spec;
  spec << "chanspec=0x" << std::hex << std::setw(4) << std::setfill('0')
       << result.frames.front().chanspec << std::dec << " center_hz=" << center
       << " bandwidth_hz=" << bandwidth << (cs.valid ? "" : " (defaults)");
  m.meta.channel_spec = spec.str();
  result.matrix = std::move(m);
  return result;
}

std::vector<std::uint8_t> encode_portable(const CsiMatrix& m, const SubjectLabel& label) {
  const std::size_t K = m.subcarriers();
  const std::size_t T = m.samples();
  const auto& f = m.freqs();
  if (K < 2 || T < 2 || f.size() != K) {
    throw Error(ErrorCode::invalid_spec, "portable format needs a valid K>=2, T>=2 matrix");
  }
  // The header stores only start and step, so the axis must be uniform.
  const double start = f.front();
  double step = f[1] - f[0];
  const double span_step = (f.back() - f.front()) / static_cast<double>(K - 1);
  auto reproduces = [&](double s) { return uniform_freqs(start, s, K) == f; };
  if (!reproduces(step) && reproduces(span_step)) step = span_step;
  for (std::size_t k = 0; k < K; ++k) {
    const double expect = start + static_cast<double>(k) * step;
    if (std::abs(f[k] - expect) > 1e-9 * std::max(1.0, std::abs(f[k]))) {
      throw Error(ErrorCode::non_uniform_frequency_axis,
                  "portable format requires uniformly spaced subcarriers");
    }
  }
  if (label.sample_index < 0) throw Error(ErrorCode::invalid_spec, "sample_index must be >= 0");

  std::vector<std::uint8_t> out(kPortableMagic.begin(), kPortableMagic.end());
  out.reserve(64 + label.subject_id.size() + K * T * 16);
  put_u32(out, kPortableVersion);
  put_u32(out, static_cast<std::uint32_t>(K));
  put_u32(out, static_cast<std::uint32_t>(T));
  put_f64(out, start);
  put_f64(out, step);
  put_u32(out, static_cast<std::uint32_t>(label.subject_id.size()));
  out.insert(out.end(), label.subject_id.begin(), label.subject_id.end());
  put_u32(out, static_cast<std::uint32_t>(label.sample_index));
  put_u8(out, static_cast<std::uint8_t>(label.hand));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      put_f64(out, m(k, t).real());
      put_f64(out, m(k, t).imag());
    }
  }
  return out;
}

PortableRecord decode_portable(std::span<const std::uint8_t> bytes) {
  const ByteReader in(bytes);
  if (!in.has(0, 8) || !std::equal(kPortableMagic.begin(), kPortableMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::bad_magic, "portable CSI file has wrong magic");
  }
  if (!in.has(8, 4)) throw Error(ErrorCode::length_mismatch, "portable header truncated");
  const std::uint32_t version = in.u32(8);
  if (version != kPortableVersion) {
    throw Error(ErrorCode::unsupported_version,
                "portable CSI version " + std::to_string(version) + " is not supported");
  }
  if (!in.has(12, 28)) throw Error(ErrorCode::length_mismatch, "portable header truncated");
  const std::size_t K = in.u32(12);
  const std::size_t T = in.u32(16);
  const double start = in.f64(20);
  const double step = in.f64(28);
  const std::size_t id_len = in.u32(36);
  std::size_t at = 40;
  if (!in.has(at, id_len + 5)) throw Error(ErrorCode::length_mismatch, "portable header truncated");
  PortableRecord rec;
  const auto id = in.slice(at, id_len);
  rec.label.subject_id.assign(id.begin(), id.end());
  at += id_len;
  rec.label.sample_index = static_cast<int>(in.u32(at));
  at += 4;
  const std::uint8_t hand = in.u8(at);
  at += 1;
  if (hand > 2) throw Error(ErrorCode::invalid_spec, "portable header has invalid hand code");
  rec.label.hand = static_cast<Hand>(hand);

  if (bytes.size() - at != K * T * 16) {
    throw Error(ErrorCode::length_mismatch,
                "portable payload holds " + std::to_string(bytes.size() - at) +
                    " bytes, expected " + std::to_string(K * T * 16));
  }
  std::vector<Complex> values(K * T);
  for (std::size_t i = 0; i < K * T; ++i, at += 16) {
    values[i] = Complex(in.f64(at), in.f64(at + 8));
  }
  rec.matrix = CsiMatrix(K, T, uniform_freqs(start, step, K), std::move(values));
  return rec;
}

void write_portable(const CsiMatrix& m, const SubjectLabel& label,
                    const std::filesystem::path& path) {
  write_file(path, encode_portable(m, label));
}

PortableRecord read_portable(const std::filesystem::path& path) {
  auto rec = decode_portable(read_file(path));
  rec.matrix.meta.source_id = path.filename().string();
  return rec;
}

void write_dataset_dir(const Dataset& d, const std::filesystem::path& dir,
                       const std::vector<std::pair<std::string, std::string>>& provenance) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::ordered_json manifest;
  manifest["format"] = "csiauth-dataset";
  manifest["version"] = 1;
  auto& prov = manifest["provenance"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : provenance) prov[key] = value;
  auto& records = manifest["records"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    std::ostringstream name;
    name << "rec_" << std::setw(5) << std::setfill('0') << i << ".csiport";
    const auto& r = d.records[i];
    write_portable(r.matrix, r.label, dir / name.str());
    records.push_back({{"file", name.str()},
                       {"subject_id", r.label.subject_id},
                       {"sample_index", r.label.sample_index},
                       {"hand", std::string(to_string(r.label.hand))}});
  }
  const std::string text = manifest.dump(2) + "\n";
  write_file(dir / "manifest.json",
             {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

Dataset read_dataset_dir(const std::filesystem::path& dir) {
  const auto bytes = read_file(dir / "manifest.json");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, (dir / "manifest.json").string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "csiauth-dataset") {
    throw Error(ErrorCode::invalid_config, (dir / "manifest.json").string() + ": not a dataset manifest");
  }
  Dataset d;
  for (const auto& entry : manifest.at("records")) {
    const auto path = dir / entry.at("file").get<std::string>();
    auto rec = read_portable(path);
    d.records.push_back({std::move(rec.matrix), std::move(rec.label)});
  }
  return d;
}

}  // namespace csiauth::ingest
