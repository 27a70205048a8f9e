// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace muse {

/// splitmix64 finalizer, used to derive independent per-item seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace muse
