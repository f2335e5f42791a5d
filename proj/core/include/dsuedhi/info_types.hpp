#pragma once

#include <cstddef>
#include <vector>

#include "dsuedhi/matrix.hpp"

namespace dsuedhi {

/// Instantaneous information provided at interval `provision`: one travel
/// time per path (s), the sum of the current link travel times.
struct InstantInfo {
  std::size_t provision = 0;
  std::vector<double> times;
};

/// Forecast information provided at interval `provision`: paths x remaining
/// intervals; column j is the forecast travel time for departure interval
/// provision + j.
struct ForecastInfo {
  std::size_t provision = 0;
  Matrix times;
};

}  // namespace dsuedhi
