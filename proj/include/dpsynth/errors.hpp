#pragma once

#include <stdexcept>
#include <string>

namespace dpsynth {

// Thrown when an operation would materialize more state than the desk-scale
// guards allow (full grids, LP tableaus, ...). Callers can catch this
// separately from input-domain errors.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

namespace guards {
// Hard cap on the number of grid points any operation may materialize (k^r).
inline constexpr std::uint64_t kMaxGridPoints = 1ull << 20;
// Hard cap on the number of structural nonzeros an LP may carry.
inline constexpr std::size_t kMaxLPNonzeros = 50'000;
// Per-block variable cap for the flat-metric LP.
inline constexpr std::size_t kMaxFlatMetricBlock = 4096;
// Support-size cap per measure for the exact transport LP.
inline constexpr std::size_t kMaxTransportSupport = 1024;
// Largest operator order the dense lemma verification will touch.
inline constexpr std::uint64_t kMaxDenseHaarOrder = 1ull << 14;
}  // namespace guards

}  // namespace dpsynth
