#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "subframe/frames.hpp"

namespace subframe::io {

/// Frame JSON: {"m", "n", "family", "params", "re": [[...]], "im": [[...]]}
/// with one inner array per row.
nlohmann::json frame_to_json(const Frame& frame);

/// Rejects frames whose column norms deviate from 1 by more than unit_norm_tol.
Frame frame_from_json(const nlohmann::json& j, double unit_norm_tol = 1e-9);

nlohmann::json params_to_json(const FrameParams& params);
FrameParams params_from_json(const nlohmann::json& j);

void write_frame(const Frame& frame, const std::filesystem::path& path);
Frame read_frame(const std::filesystem::path& path, double unit_norm_tol = 1e-9);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace subframe::io
