#pragma once

#include <filesystem>
#include <vector>

#include "hateclf/nn/tensor.hpp"

namespace hateclf::nn {

// Little-endian binary parameter archive: magic, count, then per entry the
// name, logical shape, storage rows/cols and float32 payload.
void save_params(const std::filesystem::path& path, const std::vector<Param*>& params);

// Loads into `params` by name; every parameter must be present with a matching
// storage shape.
void load_params(const std::filesystem::path& path, const std::vector<Param*>& params);

}  // namespace hateclf::nn
