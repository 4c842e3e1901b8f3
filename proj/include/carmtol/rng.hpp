// Copyright 2026 The carmtol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace carmtol {

// Every random draw in the library comes from an Rng built from an explicit
// seed. Substream seeds are a SplitMix64 hash chain over (master seed, keys),
// and each stream is a std::mt19937_64 (whose output sequence is fixed by the
// C++ standard). Conversions to floating point are done here rather than
// through <random> distributions, whose algorithms are implementation-defined.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t master,
                                       std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

// Stream identifiers; part of the substream key so purposes never share draws.
enum class Stream : std::uint64_t {
  eval_points = 1,
  landmarks = 2,
  trial = 3,
  pixel_noise = 4,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t master, Stream stream, std::initializer_list<std::uint64_t> keys = {})
      : engine_(derive(master, stream, keys)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  static std::uint64_t derive(std::uint64_t master, Stream stream,
                              std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = substream_seed(master, {static_cast<std::uint64_t>(stream)});
    for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
    return h;
  }

  std::mt19937_64 engine_;
};

}  // namespace carmtol
