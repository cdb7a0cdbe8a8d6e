#include "rank1/matrix_market.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace rank1 {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_value(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) throw ParseError("invalid numeric value '" + tok + "'", line);
  return v;
}

Index parse_index(const std::string& tok, std::size_t line) {
  Index v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError("invalid integer '" + tok + "'", line);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

MarketMatrix mm_parse(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError("empty input", 0);
  ++lineno;
  const auto header = split(line);
  if (header.size() != 5 || lower(header[0]) != "%%matrixmarket")
    throw ParseError("missing %%MatrixMarket header", lineno);
  if (lower(header[1]) != "matrix") throw ParseError("object must be 'matrix'", lineno);
  const std::string format = lower(header[2]);
  const std::string field = lower(header[3]);
  const std::string symmetry = lower(header[4]);
  if (format != "coordinate" && format != "array")
    throw ParseError("format must be 'coordinate' or 'array'", lineno);
  if (field != "real" && field != "integer")
    throw ParseError("unsupported field '" + field + "' (only real-valued data)", lineno);
  if (symmetry != "general") throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);

  auto next_data_line = [&](std::vector<std::string>& toks) {
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line) || line[0] == '%') continue;
      toks = split(line);
      return true;
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_data_line(toks)) throw ParseError("missing size line", lineno);

  if (format == "coordinate") {
    if (toks.size() != 3) throw ParseError("size line must be 'rows cols nnz'", lineno);
    const Index m = parse_index(toks[0], lineno);
    const Index n = parse_index(toks[1], lineno);
    const Index nnz = parse_index(toks[2], lineno);
    std::vector<Triplet> t;
    t.reserve(nnz);
    while (next_data_line(toks)) {
      if (t.size() == nnz) throw ParseError("more entries than declared", lineno);
      if (toks.size() != 3) throw ParseError("entry must be 'row col value'", lineno);
      const Index i = parse_index(toks[0], lineno);
      const Index j = parse_index(toks[1], lineno);
      if (i < 1 || i > m || j < 1 || j > n) throw ParseError("index out of range", lineno);
      t.push_back({i - 1, j - 1, parse_value(toks[2], lineno)});
    }
    if (t.size() != nnz) throw ParseError("fewer entries than declared", lineno);
    return SparseMatrix(m, n, std::move(t));
  }

  if (toks.size() != 2) throw ParseError("size line must be 'rows cols'", lineno);
  const Index m = parse_index(toks[0], lineno);
  const Index n = parse_index(toks[1], lineno);
  DenseMatrix d(m, n);
  Index k = 0;
  while (next_data_line(toks)) {
    for (const auto& tok : toks) {
      if (k == m * n) throw ParseError("more entries than declared", lineno);
      // column-major
      d(k % m, k / m) = parse_value(tok, lineno);
      ++k;
    }
  }
  if (k != m * n) throw ParseError("fewer entries than declared", lineno);
  return d;
}

MarketMatrix mm_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  try {
    return mm_parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  }
}

void mm_write(const Matrix& m, std::ostream& out) {
  const Index r = rows(m), c = cols(m);
  require_dims(r > 0 && c > 0, "mm_write: degenerate 0-dimension matrix");
  if (const auto* d = std::get_if<DenseMatrix>(&m)) {
    out << "%%MatrixMarket matrix array real general\n" << r << ' ' << c << '\n';
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) out << format_double((*d)(i, j)) << '\n';
    return;
  }
  std::vector<Triplet> t;
  if (const auto* s = std::get_if<SparseMatrix>(&m)) {
    t = s->triplets();
  } else {
    const auto& b = std::get<BandedMatrix>(m);
    for (Index i = 0; i < r; ++i)
      b.for_each_in_row(i, [&](Index j, double v) {
        if (v != 0.0) t.push_back({i, j, v});
      });
  }
  out << "%%MatrixMarket matrix coordinate real general\n" << r << ' ' << c << ' ' << t.size() << '\n';
  for (const auto& e : t) out << e.row + 1 << ' ' << e.col + 1 << ' ' << format_double(e.value) << '\n';
}

void mm_write(const Matrix& m, const std::filesystem::path& path) {
  std::ostringstream buf;
  mm_write(m, buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("mm_write: cannot open " + path.string());
  out << buf.str();
  if (!out) throw Error("mm_write: write failed for " + path.string());
}

Matrix to_matrix(MarketMatrix m) {
  return std::visit([](auto&& a) -> Matrix { return Matrix(std::move(a)); }, std::move(m));
}

Vector read_vector(const std::filesystem::path& path) {
  const DenseMatrix d = to_dense(to_matrix(mm_read(path)));
  if (d.cols() != 1) throw ParseError(path.string() + ": vector file must have one column", 0);
  return Vector(d.data().begin(), d.data().end());
}

void write_vector(std::span<const double> v, const std::filesystem::path& path) {
  mm_write(Matrix(DenseMatrix(v.size(), 1, Vector(v.begin(), v.end()))), path);
}

}  // namespace rank1
