// SPDX-License-Identifier: Apache-2.0
//
// xlelm: extreme learning machines realized through XL-MIMO fading channels
// Copyright (C) 2026 The xlelm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "xlelm/errors.hpp"

namespace xlelm
{

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 random bits.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round)
    {
        const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// Seedable random stream.
///
/// The generator is Philox4x32-10 keyed by the 64-bit seed. The 128-bit
/// counter holds the stream id in its upper half and the block index in its
/// lower half, so streams derived from one seed with different ids are
/// disjoint for fewer than 2^64 blocks each. Every block yields two 64-bit
/// words (low word first).
///
/// Derived values:
///  - uniform01: top 53 bits of a word times 2^-53, in [0, 1).
///  - gaussian:  Box-Muller on two uniforms; both outputs of a pair are used.
///  - below(n):  Lemire's multiply-and-reject, unbiased.
///
/// Integer outputs are bit-identical on every platform. Gaussian outputs go
/// through std::log/std::cos/std::sqrt and therefore depend on the libm
/// rounding behaviour of the platform.
class RngStream
{
  public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) : seed_(seed), stream_(stream_id)
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    /// Fresh stream sharing this stream's seed.
    RngStream substream(std::uint64_t stream_id) const { return RngStream(seed_, stream_id); }

    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64()
    {
        if (buffered_ == 0)
            refill();
        --buffered_;
        return buffer_[1 - buffered_];
    }

    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double gaussian()
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] keeps the logarithm finite
        const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0)
            throw ConfigError("RngStream::below: empty range");
        unsigned __int128 m = (unsigned __int128)next_u64() * n;
        auto low = std::uint64_t(m);
        if (low < n)
        {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold)
            {
                m = (unsigned __int128)next_u64() * n;
                low = std::uint64_t(m);
            }
        }
        return std::uint64_t(m >> 64);
    }

    /// k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k)
    {
        if (k > n)
            throw ConfigError("sample_without_replacement: k = " + std::to_string(k) + " exceeds n = " +
                              std::to_string(n));
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i)
        {
            const auto j = i + std::size_t(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    /// Uniformly random permutation of [0, n).
    std::vector<std::size_t> permutation(std::size_t n) { return sample_without_replacement(n, n); }

  private:
    void refill()
    {
        const std::array<std::uint32_t, 4> ctr = {std::uint32_t(block_), std::uint32_t(block_ >> 32),
                                                   std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
        const auto out = philox4x32_10(ctr, {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
        ++block_;
        buffer_[0] = std::uint64_t(out[0]) | (std::uint64_t(out[1]) << 32);
        buffer_[1] = std::uint64_t(out[2]) | (std::uint64_t(out[3]) << 32);
        buffered_ = 2;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace xlelm
