#pragma once

#include <array>
#include <string>
#include <vector>

#include "motsp/core.hpp"

namespace motsp {

/// EUC_2D subset of the TSPLIB format.
struct TsplibFile {
    std::string name;
    int dimension = 0;
    std::string edge_weight_type = "EUC_2D";
    std::vector<std::array<double, 2>> coords;  // 0-based

    bool operator==(const TsplibFile&) const = default;
};

/// Parse TSPLIB text (EUC_2D only). Errors name the offending line.
TsplibFile parse_tsplib(const std::string& text);

/// Inverse of parse_tsplib on accepted files (coordinates exact).
std::string write_tsplib(const TsplibFile& file);

/// Bi-objective instance from two coordinate sets of equal size: city i's
/// feature row is (a.x, a.y, b.x, b.y), both objectives Euclidean. Raw scale;
/// normalize_instance before inference.
Instance make_kroab(const TsplibFile& a, const TsplibFile& b);

}  // namespace motsp
