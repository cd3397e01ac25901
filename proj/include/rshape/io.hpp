#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "rshape/types.hpp"

namespace rshape::io {

/// Shortest round-trippable text for a double ("%.17g"); NaN prints as "nan".
std::string format_double(double v);

/// Dense CSV, one line per matrix row, 17 significant digits.
void write_matrix_csv(std::ostream& os, const MatrixXd& m);
void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& m);
MatrixXd read_matrix_csv(std::istream& is);
MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// One CSV line per sample (the transpose of DataSet::samples).
void write_dataset_csv(const std::filesystem::path& path, const DataSet& data);

}  // namespace rshape::io
