#pragma once

#include <string>

#include "wavesim/netparse.hpp"

inline std::string repo_path(const std::string& rel) {
  return std::string(WAVESIM_SOURCE_DIR) + "/" + rel;
}

inline wavesim::NetworkGraph load_bundled(const std::string& name) {
  return wavesim::load_network_file(repo_path("networks/" + name + ".net"));
}
