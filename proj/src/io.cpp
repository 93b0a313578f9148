#include "reshape/io.hpp"

#include "reshape/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace reshape {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return in;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool saw_hard = false;  // comma/semicolon/tab: empty fields are significant
    for (char ch : line) {
        if (ch == ',' || ch == ';' || ch == '\t') {
            out.push_back(cur);
            cur.clear();
            saw_hard = true;
        } else if (ch == ' ' || ch == '\r') {
            if (!saw_hard && !cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty() || saw_hard) out.push_back(cur);
    return out;
}

double parse_double(const std::string& token, const std::string& where) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw ParseError(where + ": cannot parse '" + token + "' as a number");
    }
    return value;
}

DataMatrix read_matrix(const std::filesystem::path& path, bool header, std::vector<std::string>* names) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::size_t rows = 0;
    bool need_header = header;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        auto fields = split_fields(line);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (cols == 0) cols = fields.size();
        if (fields.size() != cols) {
            throw ParseError(where + ": expected " + std::to_string(cols) + " fields, got " + std::to_string(fields.size()));
        }
        if (need_header) {
            need_header = false;
            if (names) *names = fields;
            continue;
        }
        for (const auto& f : fields) values.push_back(parse_double(f, where));
        ++rows;
    }
    if (rows == 0) throw ParseError(path.string() + ": no data rows");
    return DataMatrix(rows, cols, std::move(values));
}

std::vector<double> read_column(const std::filesystem::path& path, bool header) {
    auto m = read_matrix(path, header);
    if (m.cols() != 1) throw ParseError(path.string() + ": expected one value per row");
    return m.raw();
}

std::vector<TensorEntry> read_tensor(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::vector<TensorEntry> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        auto fields = split_fields(line);
        if (fields.size() != 4) throw ParseError(where + ": expected 4 columns (i, k, v, value)");
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        TensorEntry e;
        std::size_t* idx[3] = {&e.i, &e.k, &e.v};
        for (int c = 0; c < 3; ++c) {
            const double x = parse_double(fields[c], where);
            if (x < 1 || x != std::floor(x) || x > 1e15) throw ParseError(where + ": indices must be positive integers");
            *idx[c] = static_cast<std::size_t>(x) - 1;
        }
        e.value = parse_double(fields[3], where);
        out.push_back(e);
    }
    if (!header_seen) throw ParseError(path.string() + ": missing header row");
    return out;
}

void write_tensor(const std::filesystem::path& path, const BlackBoxGrid& grid) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << "i,k,v,value\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < grid.n; ++i) {
        for (std::size_t r = 0; r < grid.num_variables(); ++r) {
            for (std::size_t k = 0; k < grid.n; ++k) {
                out << i + 1 << ',' << k + 1 << ',' << grid.variables[r] + 1 << ',' << grid.at(i, k, r) << '\n';
            }
        }
    }
}

}  // namespace reshape
