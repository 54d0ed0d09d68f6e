#include "hspmv/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace hspmv {
namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw MatrixMarketError("matrix market line " + std::to_string(line) + ": " + what);
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// from_chars accepts subnormals, which stream extraction rejects.
bool parse_real(const std::string& token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) {
        throw MatrixMarketError("matrix market: empty input");
    }

    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") {
        fail(lineno, "missing %%MatrixMarket banner");
    }
    object = lowercase(object);
    format = lowercase(format);
    field = lowercase(field);
    symmetry = lowercase(symmetry);
    if (object != "matrix") {
        fail(lineno, "unsupported object '" + object + "'");
    }
    if (format != "coordinate") {
        fail(lineno, "only coordinate format is supported, got '" + format + "'");
    }
    if (field != "real" && field != "integer") {
        fail(lineno, "unsupported field '" + field + "'");
    }
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") {
        fail(lineno, "unsupported symmetry '" + symmetry + "'");
    }

    // Skip comments and blank lines up to the size line.
    bool have_size = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || is_blank(line)) {
            continue;
        }
        have_size = true;
        break;
    }
    if (!have_size) {
        fail(lineno, "missing size line");
    }
    index_t nrows = 0, ncols = 0, declared = 0;
    {
        std::istringstream size(line);
        if (!(size >> nrows >> ncols >> declared) || nrows < 0 || ncols < 0 || declared < 0) {
            fail(lineno, "malformed size line '" + line + "'");
        }
    }
    if (symmetric && nrows != ncols) {
        fail(lineno, "symmetric matrix must be square");
    }

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(symmetric ? 2 * declared : declared));
    index_t seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || is_blank(line)) {
            continue;
        }
        if (seen == declared) {
            fail(lineno, "more entries than the declared " + std::to_string(declared));
        }
        std::istringstream entry(line);
        index_t i = 0, j = 0;
        std::string value_token;
        double v = 0.0;
        if (!(entry >> i >> j >> value_token) || !parse_real(value_token, v)) {
            fail(lineno, "malformed entry '" + line + "'");
        }
        if (i < 1 || i > nrows || j < 1 || j > ncols) {
            fail(lineno, "index (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") outside declared " + std::to_string(nrows) + "x" +
                             std::to_string(ncols));
        }
        entries.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) {
            entries.push_back({j - 1, i - 1, v});
        }
        ++seen;
    }
    if (seen != declared) {
        throw MatrixMarketError("matrix market: declared " + std::to_string(declared) +
                                " entries but found " + std::to_string(seen));
    }
    return csr_from_triplets(entries, nrows, ncols);
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MatrixMarketError("cannot open " + path.string());
    }
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.nrows() << ' ' << a.ncols() << ' ' << a.nnz() << '\n';
    char buf[64];
    for (index_t i = 0; i < a.nrows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            // Shortest representation that parses back to the same double.
            const auto res = std::to_chars(buf, buf + sizeof(buf), vals[k]);
            out << (i + 1) << ' ' << (cols[k] + 1) << ' ' << std::string_view(buf, res.ptr - buf)
                << '\n';
        }
    }
}

std::string write_matrix_market(const CsrMatrix& a) {
    std::ostringstream out;
    write_matrix_market(out, a);
    return out.str();
}

void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write_matrix_market(out, a);
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

}  // namespace hspmv
