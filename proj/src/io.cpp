#include "posfact/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace posfact::io {

namespace {

// Tokens, with '#' killing the rest of its line.
std::vector<std::string> tokenize(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

double parse_real(const std::string& tok) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("bad numeric token '" + tok + "'");
  }
  if (pos != tok.size()) throw ParseError("bad numeric token '" + tok + "'");
  return v;
}

Complex parse_entry(const std::string& tok) {
  if (!tok.empty() && tok.front() == '(') {
    if (tok.back() != ')') throw ParseError("unterminated complex '" + tok + "'");
    const auto comma = tok.find(',');
    if (comma == std::string::npos) {
      throw ParseError("complex entry needs a comma: '" + tok + "'");
    }
    const double re = parse_real(tok.substr(1, comma - 1));
    const double im = parse_real(tok.substr(comma + 1, tok.size() - comma - 2));
    return Complex(re, im);
  }
  return Complex(parse_real(tok), 0.0);
}

long parse_count(const std::string& tok) {
  size_t pos = 0;
  long v;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("bad dimension '" + tok + "'");
  }
  if (pos != tok.size() || v < 1) throw ParseError("bad dimension '" + tok + "'");
  return v;
}

}  // namespace

CMatrix read_matrix(std::istream& in) {
  const auto tokens = tokenize(in);
  if (tokens.size() < 2) throw ParseError("matrix header 'rows cols' missing");
  const long rows = parse_count(tokens[0]);
  const long cols = parse_count(tokens[1]);
  if (static_cast<long>(tokens.size()) != 2 + rows * cols) {
    throw ParseError("expected " + std::to_string(rows * cols) +
                     " entries, found " + std::to_string(tokens.size() - 2));
  }
  CMatrix M(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      M(i, j) = parse_entry(tokens[2 + i * cols + j]);
    }
  if (!M.allFinite()) throw ParseError("matrix has non-finite entries");
  return M;
}

CMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_matrix(in);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_matrix(std::ostream& out, const CMatrix& M) {
  out << M.rows() << " " << M.cols() << "\n";
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      const Complex z = M(i, j);
      if (j) out << " ";
      if (z.imag() == 0.0) {
        out << format_double(z.real());
      } else {
        out << "(" << format_double(z.real()) << "," << format_double(z.imag())
            << ")";
      }
    }
    out << "\n";
  }
}

void write_matrix_file(const std::string& path, const CMatrix& M) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_matrix(out, M);
}

std::string digest_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json matrix_to_json(const CMatrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) {
      row.push_back({M(i, j).real(), M(i, j).imag()});
    }
    rows.push_back(row);
  }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", rows}};
}

json subspace_to_json(const Subspace& S) {
  return json{{"ambient_dim", S.ambient_dim},
              {"dim", S.dim()},
              {"basis", matrix_to_json(S.basis)}};
}

json spectrum_to_json(const SpectrumReport& rep) {
  json clusters = json::array();
  for (const auto& c : rep.clusters) {
    clusters.push_back({{"eigenvalue", {c.eigenvalue.real(), c.eigenvalue.imag()}},
                        {"algebraic_mult", c.algebraic_mult},
                        {"geometric_mult", c.geometric_mult}});
  }
  return json{{"clusters", clusters},
              {"eigvec_cond", rep.eigvec_cond},
              {"diagonalizable", rep.diagonalizable},
              {"spectrum_nonneg", rep.spectrum_nonneg}};
}

json tolerances_to_json(const Tolerances& tol) {
  return json{{"tol_rank", tol.tol_rank},
              {"tol_psd", tol.tol_psd},
              {"tol_eq", tol.tol_eq},
              {"tol_cluster", tol.tol_cluster},
              {"cond_max", tol.cond_max}};
}

json factorization_to_json(const Factorization& f) {
  return json{{"A", matrix_to_json(f.A)},
              {"B", matrix_to_json(f.B)},
              {"residual", f.residual},
              {"optimal", f.optimal},
              {"range_match", f.range_match},
              {"kernel_match", f.kernel_match}};
}

void write_lab_csv(std::ostream& out, const LabResult& lab) {
  out << "dim,metric,value\n";
  for (const auto& row : lab.metrics) {
    out << row.dim << "," << row.metric << "," << format_double(row.value)
        << "\n";
  }
}

}  // namespace posfact::io
