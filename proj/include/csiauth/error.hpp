// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csiauth {

enum class ErrorCode {
  file_not_found,
  io_error,
  no_csi_frames,
  truncated_frame,
  bad_magic,
  length_mismatch,
  unsupported_version,
  non_uniform_frequency_axis,
  invalid_spec,
  invalid_config,
  too_few_subcarriers_remain,
  window_too_large,
  zero_energy_window,
  zero_spectrum,
  degenerate_input,
  degenerate_feature,
  single_class,
  schema_mismatch,
  degenerate_class,
  too_few_scores,
  record_too_short,
  insufficient_data,
  leakage_detected,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace csiauth
