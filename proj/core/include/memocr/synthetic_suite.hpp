#pragma once

#include "memocr/eval_instance.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace memocr {

inline constexpr std::size_t kSyntheticSuiteSize = 50;
inline constexpr std::uint64_t kSyntheticSuiteSeed = 20251014;

// Deterministic song-credit QA instances: one evidence sentence naming the
// writer, several on-topic auxiliary sentences (one carries a year used by the
// detail question), and off-topic filler split into three chunks.
std::vector<EvalInstance> make_synthetic_suite(std::size_t n = kSyntheticSuiteSize,
                                               std::uint64_t seed = kSyntheticSuiteSeed);

// Off-topic prose of exactly `tokens` whitespace tokens. Shares no content
// word with any synthetic question.
std::string synthetic_filler(std::size_t tokens, std::uint64_t seed);

}  // namespace memocr
