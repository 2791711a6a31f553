#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hotmpc {

// Shamir x-coordinate of a participant; always nonzero.
using ParticipantId = std::uint32_t;

// Virtual time in simulated units. Nothing in the library reads a wall clock.
using SimTime = std::uint64_t;

using ParticipantList = std::vector<ParticipantId>;

inline std::string node_account(ParticipantId id) { return "node-" + std::to_string(id); }

}  // namespace hotmpc
