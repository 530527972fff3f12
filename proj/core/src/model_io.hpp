#pragma once

#include <filesystem>

#include "hateclf/models.hpp"
#include "json.hpp"

namespace hateclf::detail {

inline constexpr const char* kDescriptorFile = "model.json";
inline constexpr const char* kParamsFile = "params.bin";
inline constexpr const char* kVocabFile = "vocab.tsv";

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace hateclf::detail
