#pragma once

#include <string>
#include <vector>

#include "smm/apps.hpp"
#include "smm/vec.hpp"

namespace smm {

/// Read a headerless numeric CSV into rows of equal width.  Blank lines are
/// skipped.  Throws std::runtime_error naming the path when the file cannot
/// be opened, a field fails to parse, or row widths differ.
std::vector<Vec> read_matrix_csv(const std::string& path);

/// Read labeled classification rows: each line is a 0-based class index
/// followed by the attribute values.  Same error contract as
/// read_matrix_csv, plus a non-integral or negative class index throws.
LabeledData read_labeled_csv(const std::string& path);

}  // namespace smm
