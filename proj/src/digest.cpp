// SPDX-License-Identifier: Apache-2.0
#include "csiauth/digest.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstdio>

namespace csiauth {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
  bool done = false;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::io_error, "sha256 initialisation failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

void Sha256::update(std::span<const std::uint8_t> bytes) {
  if (impl_->done) throw Error(ErrorCode::io_error, "sha256 already finalised");
  if (!bytes.empty()) EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
}

void Sha256::update(std::string_view text) {
  update({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void Sha256::update_u64(std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  update(b);
}

void Sha256::update_f64(double v) { update_u64(std::bit_cast<std::uint64_t>(v)); }

std::string Sha256::hex() {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md, &len);
  impl_->done = true;
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  Sha256 h;
  h.update(text);
  return h.hex();
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

std::string dataset_digest(const Dataset& d) {
  Sha256 h;
  h.update_u64(d.records.size());
  for (const Record& r : d.records) {
    h.update_u64(r.label.subject_id.size());
    h.update(r.label.subject_id);
    h.update_u64(static_cast<std::uint64_t>(r.label.sample_index));
    h.update_u64(static_cast<std::uint64_t>(r.label.hand));
    const CsiMatrix& m = r.matrix;
    h.update_u64(m.subcarriers());
    h.update_u64(m.samples());
    for (double f : m.freqs()) h.update_f64(f);
    // Complex is two contiguous doubles; hash the raw little-endian image.
    static_assert(std::endian::native == std::endian::little);
    h.update({reinterpret_cast<const std::uint8_t*>(m.values().data()),
              m.values().size() * sizeof(Complex)});
  }
  return h.hex();
}

}  // namespace csiauth
