#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "symadex/common.hpp"
#include "symadex/geometry.hpp"

namespace symadex {

std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct RegionMeta {
    Vector x_o;
    Eigen::Index target = -1;
    double epsilon = 0.0;
    std::string method;
    bool verified = false;
    double margin = 0.0;
    double log10_under = 0.0;
    double log10_over = 0.0;
};

struct RegionFile {
    Polyhedron region;
    RegionMeta meta;
};

std::string format_region(const Polyhedron& region, const RegionMeta& meta);
RegionFile parse_region(const std::string& text);
void save_region(const std::filesystem::path& path, const Polyhedron& region, const RegionMeta& meta);
RegionFile load_region(const std::filesystem::path& path);

/// One point per row, comma separated.
std::string format_points_csv(const std::vector<Vector>& points);
std::vector<Vector> parse_points_csv(const std::string& text);

/// Comma separated list such as "0.1,0.2".
Vector parse_vector(const std::string& text);

/// Sensitivity map rendered as a `rows` x (size / rows) grid.
std::string format_map_csv(const Eigen::VectorXi& widths, Eigen::Index rows);
std::string format_map_pgm(const Eigen::VectorXi& widths, Eigen::Index rows);

/// Most square grid for n values (rows <= columns).
Eigen::Index grid_rows(Eigen::Index n);

}  // namespace symadex
