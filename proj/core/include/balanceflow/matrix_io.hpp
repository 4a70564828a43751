#pragma once

#include "balanceflow/matrix.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace balanceflow {

/// File-level failure (missing path, malformed content). Distinct from
/// std::invalid_argument so callers can map it to an I/O exit code.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shared matrix formats: CSV (one matrix row per line, comma-separated
/// decimal floats) and JSON {"n": int, "entries": [[...], ...]}.
/// Format is chosen by file extension (.csv / .json).
Matrix read_matrix_file(const std::string& path);
Matrix parse_matrix_csv(std::istream& in, const std::string& origin = "<stream>");
Matrix parse_matrix_json(std::istream& in, const std::string& origin = "<stream>");

/// Zero-diagonal read: rejects nonzero diagonals exceeding 1e-12.
AppraisalMatrix read_appraisal_file(const std::string& path);

/// Rectangular variant of read_matrix_file (e.g. n x k frames).
Matrix read_table_file(const std::string& path);

void write_matrix_file(const std::string& path, const Matrix& m);
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_json(std::ostream& out, const Matrix& m);

/// Full-precision decimal rendering (round-trips doubles exactly).
std::string format_double(double v);

}  // namespace balanceflow
