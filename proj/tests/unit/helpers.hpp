#pragma once

#include "sead/core/rng.hpp"
#include "sead/core/volume.hpp"

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("sead-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline sead::Volume random_volume(sead::Shape3 s, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
    sead::Rng rng(seed);
    std::uniform_real_distribution<float> u(lo, hi);
    sead::Volume v(s);
    for (auto& x : v.values()) x = u(rng);
    return v;
}

} // namespace testutil
