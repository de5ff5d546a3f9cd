#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "oamjrc/scenario.hpp"

namespace oamjrc {

/// Parses a scene from JSON text with sections array / beam / oam / targets /
/// noise. Angles are degrees in the file. Throws ConfigError on malformed
/// input, including a non-integral mu * U.
Scene parse_scene(std::string_view json_text);

/// Reads and parses a scene file. Throws IoError when unreadable.
Scene load_scene(const std::filesystem::path& path);

/// Serializes a scene in the same schema parse_scene accepts.
std::string scene_to_json(const Scene& scene, int indent = 2);

/// Reads a whole text file. Throws IoError.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace oamjrc
