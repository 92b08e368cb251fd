// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace csiauth {

inline constexpr std::string_view kToolVersion = "0.3.0";

}  // namespace csiauth
