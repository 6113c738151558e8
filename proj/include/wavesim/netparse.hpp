#pragma once

#include <string>

#include "wavesim/ir.hpp"

namespace wavesim {

// Parses the network description language documented in docs/network-format.md.
// Throws Error with the offending line / layer named.
NetworkGraph parse_network(const std::string& text);
NetworkGraph load_network_file(const std::string& path);

}  // namespace wavesim
