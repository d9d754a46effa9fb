#pragma once

#include <filesystem>
#include <functional>
#include <string_view>

namespace promptassist::detail {

/// Writes to "<path>.tmp", flushes to disk, then renames over `path`. The
/// previous file (if any) survives any failure before the rename.
/// `before_rename` is a test seam for simulating a crash mid-save.
/// Throws Error{StorageFull} on ENOSPC and Error{IoError} otherwise.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents,
                           const std::function<void()>& before_rename = {});

}  // namespace promptassist::detail
