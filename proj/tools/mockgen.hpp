#pragma once

#include <cstdint>
#include <string>

#include "cotlab/data.hpp"

namespace cotlab::pipeline {

// Deterministic stand-ins for the generator endpoint in --mock runs. The
// synthesized rationale reuses question vocabulary with a per-example
// repetition period, mentions the gold value, and ends with an answer
// declaration so the stripping path has real work to do. Varying the
// repetition across examples gives perturbation sweeps a graded signal
// instead of an all-or-nothing cliff.
std::string mock_rationale(const data::Example& example, std::uint64_t seed);

// Keeps the first few tokens of the sentence; a deterministic replacement for
// the compression endpoint.
std::string mock_compress_sentence(const std::string& sentence);

}  // namespace cotlab::pipeline
