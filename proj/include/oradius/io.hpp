#pragma once

#include <string>
#include <string_view>

#include "oradius/bounds.hpp"
#include "oradius/harness.hpp"
#include "oradius/matrix.hpp"

namespace oradius {

/// {"n": N, "entries": [[[re, im], ...], ...]} with N rows of N pairs.
/// Throws ParseError (grammar, ragged rows, n mismatch) or NonFinite.
ComplexMatrix parse_matrix_json(std::string_view text);
std::string matrix_to_json(const ComplexMatrix& m);

/// Throws IoError.
std::string read_text_file(const std::string& path);
/// Writes to a sibling temporary file and renames it over `path`. Throws IoError.
void write_file_atomic(const std::string& path, std::string_view content);

ComplexMatrix read_matrix_file(const std::string& path);

/// Shortest form with 17 significant digits ("inf", "-inf", "nan" for non-finite).
std::string format_double(double x);

/// bound_id,n,alpha,r,phi,lhs,rhs,slack,budget,verdict
std::string csv_header();
std::string csv_row(const BoundReport& r);
std::string campaign_csv(const CampaignReport& rep);
std::string summary_json(const CampaignReport& rep);

}  // namespace oradius
