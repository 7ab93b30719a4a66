#pragma once

#include "posfact/lab.hpp"
#include "posfact/types.hpp"

#include <iosfwd>
#include <string>

// vendored single-header nlohmann/json
#include "json.hpp"

namespace posfact::io {

using json = nlohmann::json;

/// Text matrix format: '#' comments, first non-comment line "rows cols",
/// then row-major entries as `re` or `(re,im)`, whitespace separated.
CMatrix read_matrix(std::istream& in);
CMatrix read_matrix_file(const std::string& path);

/// 17 significant digits; doubles round-trip bit-exactly.
void write_matrix(std::ostream& out, const CMatrix& M);
void write_matrix_file(const std::string& path, const CMatrix& M);

std::string format_double(double x);

/// FNV-1a content digest used as the report's input fingerprint.
std::string digest_hex(const std::string& bytes);

json matrix_to_json(const CMatrix& M);
json subspace_to_json(const Subspace& S);
json spectrum_to_json(const SpectrumReport& rep);
json tolerances_to_json(const Tolerances& tol);
json factorization_to_json(const Factorization& f);

void write_lab_csv(std::ostream& out, const LabResult& lab);

}  // namespace posfact::io
