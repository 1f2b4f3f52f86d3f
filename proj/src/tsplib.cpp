#include "motsp/tsplib.hpp"

#include <charconv>
#include <sstream>

namespace motsp {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// "KEY : value" / "KEY: value" / "KEY value" -> (KEY, value)
bool split_keyword(const std::string& line, std::string& key, std::string& value) {
    size_t colon = line.find(':');
    if (colon != std::string::npos) {
        key = trim(line.substr(0, colon));
        value = trim(line.substr(colon + 1));
        return !key.empty();
    }
    std::istringstream ss(line);
    if (!(ss >> key)) return false;
    std::getline(ss, value);
    value = trim(value);
    return true;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

TsplibFile parse_tsplib(const std::string& text) {
    TsplibFile file;
    file.edge_weight_type.clear();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool in_coords = false;
    int coords_seen = 0;
    std::vector<bool> seen;

    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t == "EOF") break;
        if (!in_coords) {
            std::string key, value;
            if (!split_keyword(t, key, value))
                throw ParseError("tsplib: unreadable line " + std::to_string(line_no));
            if (key == "NAME") {
                file.name = value;
            } else if (key == "DIMENSION") {
                try {
                    file.dimension = std::stoi(value);
                } catch (const std::exception&) {
                    throw ParseError("tsplib: bad DIMENSION at line " + std::to_string(line_no));
                }
                if (file.dimension < 1)
                    throw ParseError("tsplib: DIMENSION must be positive (line " + std::to_string(line_no) + ")");
            } else if (key == "EDGE_WEIGHT_TYPE") {
                file.edge_weight_type = value;
                if (value != "EUC_2D")
                    throw ParseError("tsplib: unsupported EDGE_WEIGHT_TYPE '" + value + "' at line " +
                                     std::to_string(line_no) + " (only EUC_2D)");
            } else if (key == "NODE_COORD_SECTION") {
                if (file.dimension < 1)
                    throw ParseError("tsplib: NODE_COORD_SECTION before DIMENSION (line " +
                                     std::to_string(line_no) + ")");
                if (file.edge_weight_type.empty())
                    throw ParseError("tsplib: NODE_COORD_SECTION before EDGE_WEIGHT_TYPE (line " +
                                     std::to_string(line_no) + ")");
                in_coords = true;
                file.coords.assign(file.dimension, {0.0, 0.0});
                seen.assign(file.dimension, false);
            }
            // TYPE, COMMENT and other keywords are tolerated and skipped.
        } else {
            std::istringstream row(t);
            long idx;
            double x, y;
            if (!(row >> idx >> x >> y))
                throw ParseError("tsplib: bad coordinate line " + std::to_string(line_no));
            if (idx < 1 || idx > file.dimension)
                throw ParseError("tsplib: node index " + std::to_string(idx) + " out of range at line " +
                                 std::to_string(line_no));
            if (seen[idx - 1])
                throw ParseError("tsplib: duplicate node index at line " + std::to_string(line_no));
            seen[idx - 1] = true;
            file.coords[idx - 1] = {x, y};
            ++coords_seen;
        }
    }
    if (!in_coords) throw ParseError("tsplib: missing NODE_COORD_SECTION");
    if (coords_seen != file.dimension)
        throw ParseError("tsplib: NODE_COORD_SECTION has " + std::to_string(coords_seen) +
                         " entries, DIMENSION says " + std::to_string(file.dimension));
    return file;
}

std::string write_tsplib(const TsplibFile& file) {
    std::ostringstream out;
    out << "NAME : " << file.name << "\n";
    out << "TYPE : TSP\n";
    out << "DIMENSION : " << file.dimension << "\n";
    out << "EDGE_WEIGHT_TYPE : EUC_2D\n";
    out << "NODE_COORD_SECTION\n";
    for (int i = 0; i < file.dimension; ++i)
        out << (i + 1) << " " << format_double(file.coords[i][0]) << " " << format_double(file.coords[i][1])
            << "\n";
    out << "EOF\n";
    return out.str();
}

Instance make_kroab(const TsplibFile& a, const TsplibFile& b) {
    if (a.dimension != b.dimension)
        throw ConfigError("make_kroab: dimensions differ (" + std::to_string(a.dimension) + " vs " +
                          std::to_string(b.dimension) + ")");
    std::vector<std::vector<double>> rows;
    rows.reserve(a.dimension);
    for (int i = 0; i < a.dimension; ++i)
        rows.push_back({a.coords[i][0], a.coords[i][1], b.coords[i][0], b.coords[i][1]});
    return make_instance(family_specs("euclidean"), rows);
}

}  // namespace motsp
