#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cprlab {

/// Carrier-phase-recovery algorithm families.
enum class Algorithm { nlms, bwa, vv };

inline constexpr std::array<Algorithm, 3> all_algorithms{Algorithm::nlms, Algorithm::bwa, Algorithm::vv};

inline constexpr std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::nlms: return "nlms";
    case Algorithm::bwa: return "bwa";
    case Algorithm::vv: return "vv";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "nlms" || s == "NLMS") return Algorithm::nlms;
  if (s == "bwa" || s == "BWA") return Algorithm::bwa;
  if (s == "vv" || s == "VV") return Algorithm::vv;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (expected nlms, bwa or vv)");
}

inline bool uses_block_length(Algorithm a) { return a != Algorithm::nlms; }

}  // namespace cprlab
