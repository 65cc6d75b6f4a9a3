#pragma once

#include "pulseforge/core_types.hpp"

#include <filesystem>
#include <string>

namespace pulseforge::io {

/// `stem` may name either file of the pair or the bare stem; `<stem>.f32`
/// holds little-endian float32 samples in T,H,W,C order and `<stem>.json`
/// carries {t, h, w, c, fps}.
VideoCube read_cube(const std::filesystem::path& stem);
void write_cube(const VideoCube& cube, const std::filesystem::path& stem);

/// CSV (`t_seconds,value`) or JSON (`{fs, samples}`), chosen by extension.
Signal read_signal(const std::filesystem::path& path);
void write_signal(const Signal& s, const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::filesystem::path cube_stem(const std::filesystem::path& path);

}  // namespace pulseforge::io
