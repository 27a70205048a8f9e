// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace muse {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Failures are collected
/// per index; the first error kind is rethrown with every message joined, in
/// index order, so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn,
                         const std::function<std::string(std::size_t)>& label = {})
{
    std::vector<std::string> failures(n);
    std::vector<ErrorKind> kinds(n, ErrorKind::InvalidArgument);
    std::vector<char> failed(n, 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (const Error& e) {
                failed[i] = 1;
                kinds[i] = e.kind();
                failures[i] = e.what();
            } catch (const std::exception& e) {
                failed[i] = 1;
                failures[i] = e.what();
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    std::string message;
    std::size_t count = 0;
    ErrorKind kind = ErrorKind::InvalidArgument;
    for (std::size_t i = 0; i < n; ++i) {
        if (failed[i] == 0) {
            continue;
        }
        if (count == 0) {
            kind = kinds[i];
        }
        ++count;
        message += "\n  " + (label ? label(i) : std::to_string(i)) + ": " + failures[i];
    }
    if (count > 0) {
        throw Error(kind, std::to_string(count) + " of " + std::to_string(n) + " items failed:" + message);
    }
}

} // namespace muse
