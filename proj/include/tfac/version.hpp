// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace tfac {

inline constexpr const char* kToolName = "tfac";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace tfac
