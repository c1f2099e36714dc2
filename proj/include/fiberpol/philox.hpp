// Copyright 2026 The fiberpol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and a
// Gaussian stream built on it. A stream is fully identified by
// (seed, trajectory, substream); there is no hidden state beyond the position
// inside the stream, so trajectories can be simulated in any order or on any
// thread and still see the same numbers.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fiberpol {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key)
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter single_round(const Counter& ctr, const Key& key)
    {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
};

// Standard normal draws for one (seed, trajectory, substream) triple.
// Counter layout: {block low, block high, trajectory, substream}.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t trajectory, std::uint32_t substream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trajectory_(trajectory),
          substream_(substream)
    {
    }

    double next()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const auto bits = Philox4x32::generate(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             trajectory_, substream_},
            key_);
        ++block_;

        // Box-Muller on two 53-bit uniforms; u1 in (0, 1] keeps the log finite.
        const std::uint64_t w0 = (static_cast<std::uint64_t>(bits[0]) << 32) | bits[1];
        const std::uint64_t w1 = (static_cast<std::uint64_t>(bits[2]) << 32) | bits[3];
        const double u1 = (static_cast<double>(w0 >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(w1 >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    Philox4x32::Key key_;
    std::uint32_t trajectory_;
    std::uint32_t substream_;
    std::uint64_t block_{0};
    double spare_{0.0};
    bool has_spare_{false};
};

} // namespace fiberpol
