#pragma once

#include <string>

#include "cobra/dataset.hpp"

namespace cobra {

/// Writes features (columns x1..xd) and, when present, targets (final column
/// y) with full round-trip precision.
void save_csv(const Dataset& data, const std::string& path);

/// Loads a comma-separated file. `target_column` is a header name or a
/// 0-based column index; pass an empty string for a feature-only file. Every
/// non-target cell must parse as a finite real.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 bool has_header);

}  // namespace cobra
