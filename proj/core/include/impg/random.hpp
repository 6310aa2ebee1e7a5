#pragma once

#include <random>

namespace impg {

// All randomness flows through an explicitly passed, explicitly seeded
// generator; nothing reads ambient entropy.
using Rng = std::mt19937_64;

}  // namespace impg
