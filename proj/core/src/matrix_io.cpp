#include "balanceflow/matrix_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace balanceflow {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Matrix rows_to_table(const std::vector<std::vector<double>>& rows, const std::string& origin) {
    if (rows.empty()) throw IoError(origin + ": empty matrix");
    const size_t cols = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != cols) throw IoError(origin + ": rows have inconsistent lengths");
    }
    Matrix m(rows.size(), cols);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    if (!m.allFinite()) throw IoError(origin + ": matrix entries must be finite");
    return m;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, const std::string& origin) {
    Matrix m = rows_to_table(rows, origin);
    if (m.rows() != m.cols()) {
        throw IoError(origin + ": matrix must be square, got " + std::to_string(m.rows()) + " x " +
                      std::to_string(m.cols()));
    }
    return m;
}

std::vector<std::vector<double>> parse_csv_rows(std::istream& in, const std::string& origin) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw IoError(origin + ": cannot parse '" + cell + "' as a number");
            }
        }
        if (row.empty()) throw IoError(origin + ": blank data row");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<double>> parse_json_rows(std::istream& in, const std::string& origin) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("entries")) {
        throw IoError(origin + ": expected an object with 'n' and 'entries'");
    }
    std::vector<std::vector<double>> rows;
    try {
        rows = j.at("entries").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(origin + ": 'entries' must be an array of numeric rows: " + e.what());
    }
    const auto n = j.at("n").get<long long>();
    if (n != static_cast<long long>(rows.size())) {
        throw IoError(origin + ": 'n' disagrees with the number of rows");
    }
    return rows;
}

}  // namespace

Matrix parse_matrix_csv(std::istream& in, const std::string& origin) {
    return rows_to_matrix(parse_csv_rows(in, origin), origin);
}

Matrix parse_matrix_json(std::istream& in, const std::string& origin) {
    return rows_to_matrix(parse_json_rows(in, origin), origin);
}

Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    if (ends_with(path, ".json")) return parse_matrix_json(in, path);
    return parse_matrix_csv(in, path);
}

Matrix read_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    const auto rows = ends_with(path, ".json") ? parse_json_rows(in, path) : parse_csv_rows(in, path);
    return rows_to_table(rows, path);
}

AppraisalMatrix read_appraisal_file(const std::string& path) {
    Matrix m = read_matrix_file(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (std::abs(m(i, i)) > AppraisalMatrix::diag_tol) {
            throw IoError(path + ": nonzero diagonal entry exceeds 1e-12 for a zero-diagonal type");
        }
    }
    return AppraisalMatrix(std::move(m));
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

void write_matrix_json(std::ostream& out, const Matrix& m) {
    nlohmann::json j;
    j["n"] = m.rows();
    auto& entries = j["entries"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index jc = 0; jc < m.cols(); ++jc) row.push_back(m(i, jc));
        entries.push_back(std::move(row));
    }
    out << j.dump(2) << '\n';
}

void write_matrix_file(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    if (ends_with(path, ".json")) write_matrix_json(out, m);
    else write_matrix_csv(out, m);
    if (!out.good()) throw IoError(path + ": write failed");
}

}  // namespace balanceflow
