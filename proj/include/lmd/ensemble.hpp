#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "lmd/rng.hpp"

namespace lmd {

/// Samples per RNG block. Block b of an ensemble always draws from
/// base.substream(b), so results do not depend on the thread count.
inline constexpr std::size_t kEnsembleBlock = 4096;

/// Runs fn(block_index, begin, end, rng) over [0, m) in fixed-size blocks,
/// spreading blocks over `threads` workers. fn must only write to its own
/// index range.
template <class Fn>
void for_each_block(std::size_t m, const RngStream& base, unsigned threads, Fn&& fn) {
    const std::size_t n_blocks = (m + kEnsembleBlock - 1) / kEnsembleBlock;
    auto run_block = [&](std::size_t b) {
        RngStream rng = base.substream(b);
        const std::size_t begin = b * kEnsembleBlock;
        const std::size_t end = std::min(m, begin + kEnsembleBlock);
        fn(b, begin, end, rng);
    };
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n_blocks));
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t b = w; b < n_blocks; b += workers) run_block(b);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace lmd
