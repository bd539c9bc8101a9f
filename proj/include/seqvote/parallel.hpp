// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace seqvote {

// Splits [0, n) into at most `workers` contiguous chunks and runs
// fn(chunk, begin, end) for each, one thread per chunk. Chunk boundaries
// depend only on n and the chunk count. The first exception thrown by
// any chunk is rethrown after all threads join.
template <typename Fn>
std::size_t for_each_chunk(std::size_t n, unsigned workers, Fn&& fn) {
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
    if (chunks == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return 1;
    }
    std::vector<std::exception_ptr> errors(chunks);
    {
        std::vector<std::jthread> threads;
        threads.reserve(chunks);
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t begin = n * c / chunks;
            const std::size_t end = n * (c + 1) / chunks;
            threads.emplace_back([&, c, begin, end] {
                try {
                    fn(c, begin, end);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return chunks;
}

}  // namespace seqvote
