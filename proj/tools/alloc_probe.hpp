#pragma once

#include <cstddef>

#include "dcflow/bench.hpp"

// Live-heap accounting through a replaced global operator new. Linking
// alloc_probe.cpp into an executable turns it on for that executable.
namespace dcflow::alloc {

void reset_peak();
std::size_t peak_bytes();
std::size_t live_bytes();
MemoryProbe probe();

}  // namespace dcflow::alloc
