#include "smm/csv.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace smm {
namespace {

bool blank(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

std::vector<double> parse_row(const std::string& line, const std::string& path,
                              std::size_t lineno) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const char* begin = field.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
        if (end == begin || (end && *end != '\0'))
            throw std::runtime_error("bad numeric field in " + path + " line " +
                                     std::to_string(lineno) + ": '" + field + "'");
        row.push_back(v);
    }
    if (row.empty())
        throw std::runtime_error("empty row in " + path + " line " + std::to_string(lineno));
    return row;
}

std::vector<Vec> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::vector<Vec> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        Vec row = parse_row(line, path, lineno);
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged row in " + path + " line " +
                                     std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("no data rows in " + path);
    return rows;
}

}  // namespace

std::vector<Vec> read_matrix_csv(const std::string& path) { return read_rows(path); }

LabeledData read_labeled_csv(const std::string& path) {
    const std::vector<Vec> rows = read_rows(path);
    if (rows.front().size() < 2)
        throw std::runtime_error("labeled rows in " + path +
                                 " need a class index and at least one attribute");
    LabeledData data;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const double c = rows[t][0];
        if (c < 0.0 || c != std::floor(c))
            throw std::runtime_error("bad class index in " + path + " row " +
                                     std::to_string(t + 1));
        data.classes.push_back(static_cast<int>(c));
        data.attrs.emplace_back(rows[t].begin() + 1, rows[t].end());
    }
    return data;
}

}  // namespace smm
