#include "twincg/sparse.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace twincg {

ParseError::ParseError(std::size_t line, const std::string& message, const std::string& source)
    : std::runtime_error((source.empty() ? std::string() : source + ":") + "line " +
                         std::to_string(line) + ": " + message),
      line_(line), detail_(message) {}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool blank_or_comment(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '%';
}

} // namespace

CsrMatrix parse_matrix_market(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) {
        throw ParseError(1, "empty input, expected %%MatrixMarket header");
    }
    ++lineno;
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") {
        throw ParseError(lineno, "missing %%MatrixMarket banner");
    }
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") {
        throw ParseError(lineno, "unsupported object '" + object + "'");
    }
    if (format != "coordinate") {
        throw ParseError(lineno, "unsupported format '" + format + "', only coordinate");
    }
    if (field != "real" && field != "double") {
        throw ParseError(lineno, "unsupported field '" + field + "'");
    }
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") {
        throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");
    }

    std::size_t rows = 0, cols = 0, entries = 0;
    for (;;) {
        if (!std::getline(in, line)) {
            throw ParseError(lineno + 1, "missing size line");
        }
        ++lineno;
        if (blank_or_comment(line)) {
            continue;
        }
        std::istringstream sizes(line);
        if (!(sizes >> rows >> cols >> entries)) {
            throw ParseError(lineno, "malformed size line");
        }
        break;
    }
    if (rows != cols) {
        throw ParseError(lineno, "matrix is not square (" + std::to_string(rows) + "x" +
                                     std::to_string(cols) + ")");
    }

    std::vector<Triplet> triplets;
    triplets.reserve(symmetric ? 2 * entries : entries);
    std::size_t seen = 0;
    while (seen < entries && std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line)) {
            continue;
        }
        std::istringstream entry(line);
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(entry >> i >> j >> v)) {
            throw ParseError(lineno, "malformed entry");
        }
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows ||
            static_cast<std::size_t>(j) > cols) {
            throw ParseError(lineno, "entry index out of range");
        }
        const auto r = static_cast<std::size_t>(i - 1);
        const auto c = static_cast<std::size_t>(j - 1);
        if (symmetric && c > r) {
            throw ParseError(lineno, "upper-triangle entry in symmetric file");
        }
        triplets.push_back({r, c, v});
        if (symmetric && r != c) {
            triplets.push_back({c, r, v});
        }
        ++seen;
    }
    if (seen != entries) {
        throw ParseError(lineno, "expected " + std::to_string(entries) + " entries, found " +
                                     std::to_string(seen));
    }

    CsrMatrix a = CsrMatrix::from_triplets(rows, std::move(triplets));
    if (symmetric && !a.is_structurally_symmetric()) {
        throw ParseError(lineno, "symmetric-tagged matrix is not structurally symmetric");
    }
    return a;
}

CsrMatrix load_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open matrix file '" + path.string() + "'");
    }
    try {
        return parse_matrix_market(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail(), path.string());
    }
}

void write_matrix_market(const CsrMatrix& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n() << ' ' << a.n() << ' ' << a.nnz() << '\n';
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto va = a.values();
    char buf[64];
    for (std::size_t i = 0; i < a.n(); ++i) {
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", va[k]);
            out << (i + 1) << ' ' << (ci[k] + 1) << ' ' << buf << '\n';
        }
    }
}

void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write matrix file '" + path.string() + "'");
    }
    write_matrix_market(a, out);
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

} // namespace twincg
