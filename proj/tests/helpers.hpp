#pragma once

#include <filesystem>
#include <string>

#include "cocarry/rng.hpp"
#include "cocarry/skeleton.hpp"

namespace testutil {

inline cocarry::Vec4 random_in_limits(cocarry::Rng& rng, double margin = 0.0) {
  cocarry::Vec4 q;
  for (int i = 0; i < 4; ++i) {
    const auto j = static_cast<std::size_t>(i);
    q[i] = rng.uniform(cocarry::joint_limits::lower[j] + margin,
                       cocarry::joint_limits::upper[j] - margin);
  }
  return q;
}

inline std::string fixture(const std::string& name) {
  return (std::filesystem::path(FIXTURES_DIR) / name).string();
}

inline std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace testutil
