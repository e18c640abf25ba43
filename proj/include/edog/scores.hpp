#pragma once

#include <map>
#include <string>

#include "edog/graph.hpp"

namespace edog {

// Per-pair maliciousness scores. Higher always means more suspicious, no
// matter which detector produced the map; `detector` records which one did.
struct EdgeScores {
  std::string detector;
  std::map<NodePair, double> scores;
};

}  // namespace edog
