#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "birkhoff/loops.hpp"
#include "birkhoff/types.hpp"

namespace birkhoff {

// file image of a loop: per entry one coefficient array covering the band,
// each coefficient a [re, im] pair; version is pinned to 1
struct LoopSpec {
  int version = 1;
  int n = 1;
  int kmin = 0;
  int kmax = 0;
  std::vector<std::vector<std::vector<Complex>>> entries;
  std::vector<CMatrix> lie_basis;  // optional, empty when absent
};

bool operator==(const LoopSpec& a, const LoopSpec& b);

// malformed text raises ParseError naming the offending field
LoopSpec parse_loop_spec(const std::string& text);

// emit/parse round-trips bit-exactly for finite coefficients
std::string emit_loop_spec(const LoopSpec& spec);

LoopSpec to_spec(const MatrixLoop& g);
MatrixLoop to_loop(const LoopSpec& spec);

// FNV-1a of the raw input bytes, printed as "fnv1a64:<16 hex digits>"
std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_string(const std::string& bytes);

}  // namespace birkhoff
