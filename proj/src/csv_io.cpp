#include "catejudge/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace catejudge {

namespace {

std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

// Strict finite-double parse; rejects empty cells, trailing junk, nan/inf.
bool parse_cell(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* s = cell.c_str();
    char* end = nullptr;
    out = std::strtod(s, &end);
    return end == s + cell.size() && std::isfinite(out);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

TestDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open dataset file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw config_error("dataset file '" + path + "' is empty");
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 3)
        throw config_error("dataset header needs at least x1,w,y; got " +
                           std::to_string(header.size()) + " columns");
    const std::size_t d = header.size() - 2;
    for (std::size_t j = 0; j < d; ++j) {
        const std::string want = "x" + std::to_string(j + 1);
        if (header[j] != want)
            throw config_error("dataset header column " + std::to_string(j + 1) + " is '" +
                               header[j] + "', expected '" + want + "'");
    }
    if (header[d] != "w" || header[d + 1] != "y")
        throw config_error("dataset header must end with columns w,y");

    TestDataset data;
    std::vector<double> flat;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;  // tolerate a trailing blank line
        ++row;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != d + 2)
            throw config_error("row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(d + 2));
        double v = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (!parse_cell(cells[j], v))
                throw config_error("row " + std::to_string(row) + ", column x" +
                                   std::to_string(j + 1) + ": cannot parse '" + cells[j] + "'");
            flat.push_back(v);
        }
        if (!parse_cell(cells[d], v) || (v != 0.0 && v != 1.0))
            throw config_error("row " + std::to_string(row) + ", column w: '" + cells[d] +
                               "' is not 0 or 1");
        data.w.push_back(static_cast<int>(v));
        if (!parse_cell(cells[d + 1], v))
            throw config_error("row " + std::to_string(row) + ", column y: cannot parse '" +
                               cells[d + 1] + "'");
        data.y.push_back(v);
    }
    if (row < 2) throw config_error("dataset has " + std::to_string(row) + " rows, need >= 2");

    data.x = Matrix(row, d);
    data.x.data = std::move(flat);
    data.validate();
    return data;
}

void write_dataset_csv(const std::string& path, const TestDataset& data) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write dataset file '" + path + "'");
    for (std::size_t j = 0; j < data.d(); ++j) out << "x" << (j + 1) << ",";
    out << "w,y\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.d(); ++j) out << fmt(data.x(i, j)) << ",";
        out << data.w[i] << "," << fmt(data.y[i]) << "\n";
    }
    if (!out) throw config_error("failed writing dataset file '" + path + "'");
}

std::vector<double> read_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open prediction file '" + path + "'");
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != 1)
            throw config_error("prediction file '" + path + "' row " + std::to_string(row + 1) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected a single column");
        double v = 0.0;
        if (!parse_cell(cells[0], v)) {
            if (first) {  // header line
                first = false;
                continue;
            }
            throw config_error("prediction file '" + path + "' row " + std::to_string(row + 1) +
                               ": cannot parse '" + cells[0] + "'");
        }
        first = false;
        ++row;
        values.push_back(v);
    }
    if (values.empty()) throw config_error("prediction file '" + path + "' has no values");
    return values;
}

void write_column_csv(const std::string& path, const std::vector<double>& values,
                      const std::string& header) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write file '" + path + "'");
    out << header << "\n";
    for (double v : values) out << fmt(v) << "\n";
    if (!out) throw config_error("failed writing file '" + path + "'");
}

}  // namespace catejudge
