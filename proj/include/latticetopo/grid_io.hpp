#pragma once

#include <filesystem>

#include "latticetopo/core.hpp"

namespace ltopo {

// Reads a grid file in either supported format, detected by content:
//  - binary: 16-byte header (magic "LTGF", u16 LE version = 1, u16 reserved,
//    u32 LE rows, u32 LE cols) followed by rows*cols float64 LE, row-major;
//  - CSV: optional "# rows=R cols=C" line, then R lines of C comma-separated
//    numbers.
// Malformed headers, non-numeric cells, dimension mismatches and non-finite
// entries are reported with their row/column position.
ScalarField load_field(const std::filesystem::path& path);

void save_field_binary(const ScalarField& field, const std::filesystem::path& path);
void save_field_csv(const ScalarField& field, const std::filesystem::path& path);

}  // namespace ltopo
