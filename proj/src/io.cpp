#include "symadex/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace symadex {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error("cannot read '" + path.string() + "'");
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot move output into '" + path.string() + "'");
    }
}

namespace {

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j, const char* what) {
    if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError(std::string(what) + " must hold numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

}  // namespace

std::string format_region(const Polyhedron& region, const RegionMeta& meta) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < region.num_cuts(); ++i) rows.push_back(to_json(region.W.row(i).transpose()));
    json query = {{"x_o", to_json(meta.x_o)}, {"target", meta.target}, {"epsilon", meta.epsilon}};
    json doc = {
        {"dim", region.dim()},
        {"W", rows},
        {"c", to_json(region.c)},
        {"box", {{"lb", to_json(region.lower)}, {"ub", to_json(region.upper)}}},
        {"meta",
         {{"query", query},
          {"method", meta.method},
          {"verified", meta.verified},
          {"margin", meta.margin},
          {"log10_under", meta.log10_under},
          {"log10_over", meta.log10_over}}},
    };
    return doc.dump(2) + "\n";
}

RegionFile parse_region(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("region JSON: ") + e.what());
    }
    try {
        RegionFile out;
        const auto dim = doc.at("dim").get<Eigen::Index>();
        out.region.lower = vector_from(doc.at("box").at("lb"), "box.lb");
        out.region.upper = vector_from(doc.at("box").at("ub"), "box.ub");
        out.region.c = vector_from(doc.at("c"), "c");
        const json& rows = doc.at("W");
        if (!rows.is_array()) throw ParseError("W must be an array");
        out.region.W = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), dim);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Vector row = vector_from(rows[i], "W row");
            if (row.size() != dim) throw ParseError("W row " + std::to_string(i) + " has wrong length");
            out.region.W.row(static_cast<Eigen::Index>(i)) = row.transpose();
        }
        if (out.region.lower.size() != dim) throw ParseError("box size does not match dim");
        out.region.validate();
        if (doc.contains("meta")) {
            const json& meta = doc["meta"];
            if (meta.contains("query")) {
                const json& q = meta["query"];
                if (q.contains("x_o")) out.meta.x_o = vector_from(q["x_o"], "x_o");
                out.meta.target = q.value("target", Eigen::Index{-1});
                out.meta.epsilon = q.value("epsilon", 0.0);
            }
            out.meta.method = meta.value("method", std::string{});
            out.meta.verified = meta.value("verified", false);
            out.meta.margin = meta.value("margin", 0.0);
            out.meta.log10_under = meta.value("log10_under", 0.0);
            out.meta.log10_over = meta.value("log10_over", 0.0);
        }
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("region JSON: ") + e.what());
    } catch (const DimensionError& e) {
        throw ParseError(std::string("region JSON: ") + e.what());
    }
}

void save_region(const std::filesystem::path& path, const Polyhedron& region, const RegionMeta& meta) {
    write_file_atomic(path, format_region(region, meta));
}

RegionFile load_region(const std::filesystem::path& path) { return parse_region(read_text_file(path)); }

Vector parse_vector(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        const auto first = token.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token.substr(first), &used);
        } catch (const std::exception&) {
            throw ParseError("not a number: '" + token + "'");
        }
        if (token.find_first_not_of(" \t\r\n", first + used) != std::string::npos)
            throw ParseError("not a number: '" + token + "'");
        values.push_back(v);
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string format_points_csv(const std::vector<Vector>& points) {
    std::string out;
    char buf[32];
    for (const Vector& p : points) {
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", p(j));
            if (j) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::vector<Vector> parse_points_csv(const std::string& text) {
    std::vector<Vector> points;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        points.push_back(parse_vector(line));
        if (points.back().size() != points.front().size()) throw ParseError("rows differ in length");
    }
    return points;
}

Eigen::Index grid_rows(Eigen::Index n) {
    auto rows = static_cast<Eigen::Index>(std::sqrt(static_cast<double>(n)));
    while (rows > 1 && n % rows != 0) --rows;
    return std::max<Eigen::Index>(rows, 1);
}

std::string format_map_csv(const Eigen::VectorXi& widths, Eigen::Index rows) {
    const Eigen::Index cols = widths.size() / rows;
    std::string out;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (c) out += ',';
            out += std::to_string(widths(r * cols + c));
        }
        out += '\n';
    }
    return out;
}

std::string format_map_pgm(const Eigen::VectorXi& widths, Eigen::Index rows) {
    const Eigen::Index cols = widths.size() / rows;
    std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
    for (Eigen::Index i = 0; i < rows * cols; ++i)
        out += static_cast<char>(static_cast<unsigned char>(std::clamp(widths(i) - 1, 0, 255)));
    return out;
}

}  // namespace symadex
