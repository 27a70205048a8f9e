// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace muse::kernels {

#if MUSE_HAVE_AVX2
namespace detail {
const KernelTable& avx2_table_impl() noexcept;
}
#endif

const KernelTable* avx2_table() noexcept
{
#if MUSE_HAVE_AVX2
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &detail::avx2_table_impl() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept
{
    static const KernelTable& selected = []() -> const KernelTable& {
        const char* forced = std::getenv("MUSE_SIMD");
        if (forced != nullptr && std::string_view(forced) == "scalar") {
            return scalar_table();
        }
        const KernelTable* simd = avx2_table();
        return simd != nullptr ? *simd : scalar_table();
    }();
    return selected;
}

std::string_view isa_name(Isa isa) noexcept
{
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

} // namespace muse::kernels
