// Copyright 2026 The satmpc Authors
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

#ifndef SATMPC_RANDOM_HPP
#define SATMPC_RANDOM_HPP

#include <cstdint>
#include <random>

namespace satmpc {

// mt19937_64's output sequence is fixed by the standard, so everything drawn
// through these helpers is reproducible across platforms and standard
// libraries (unlike std::uniform_real_distribution).
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Uniform double in [lo, hi); returns lo when lo == hi.
double uniform(Rng& rng, double lo, double hi);

/// Independent seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace satmpc

#endif  // SATMPC_RANDOM_HPP
