/*
 * Copyright 2026 The TaskProbe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <string_view>

#include "taskprobe/error.hpp"
#include "taskprobe/numerics.hpp"

namespace taskprobe {

// Ground truth of a challenge: the task was (In) or was not (Out) used to
// build the released statistic or model.
enum class Membership { kIn, kOut };

inline std::string_view to_string(Membership m) { return m == Membership::kIn ? "in" : "out"; }

inline Membership parse_membership(std::string_view text) {
  if (text == "in" || text == "IN" || text == "1") return Membership::kIn;
  if (text == "out" || text == "OUT" || text == "0") return Membership::kOut;
  throw Error(ErrorKind::kParse, "unknown membership label '" + std::string(text) + "'");
}

// One round of the inclusion game: the fair coin and the stream the round
// draws everything else from. Tracing experiments and the generic game runner
// both derive rounds through here, so they agree draw for draw.
struct GameRound {
  Membership truth;
  SeededRng rng;
};

// Stream id, under an experiment's master stream, whose children are the
// per-round streams.
inline constexpr std::uint64_t kRoundStreams = 0;

inline GameRound draw_round(const SeededRng& master, std::uint64_t index) {
  SeededRng rng = master.substream(index);
  const Membership truth = rng.coin() ? Membership::kIn : Membership::kOut;
  return {truth, rng};
}

}  // namespace taskprobe
