#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "symadex/io.hpp"
#include "symadex/network.hpp"

namespace symadex {

namespace {

struct LineReader {
    std::istringstream in;
    std::size_t number = 0;

    // Next non-empty line with comments stripped; false at end of input.
    bool next(std::string& line) {
        while (std::getline(in, line)) {
            ++number;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(number) + ": " + what);
    }
};

std::vector<double> parse_row(const std::string& line, LineReader& reader) {
    std::istringstream row(line);
    std::vector<double> values;
    std::string token;
    while (row >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            reader.fail("not a number: '" + token + "'");
        }
        if (used != token.size()) reader.fail("not a number: '" + token + "'");
        values.push_back(v);
    }
    return values;
}

}  // namespace

Network parse_network(const std::string& text) {
    LineReader reader{std::istringstream(text)};
    std::string line;
    if (!reader.next(line)) throw ParseError("empty network file");
    std::istringstream header(line);
    std::string magic;
    std::string version;
    long n0 = 0;
    long depth = 0;
    if (!(header >> magic >> version >> n0 >> depth) || magic != "relu-ffn" || version != "v1")
        reader.fail("expected header 'relu-ffn v1 <inputs> <layers>'");
    if (n0 <= 0 || depth <= 0) reader.fail("input size and layer count must be positive");

    std::vector<Layer> layers;
    Eigen::Index fan_in = n0;
    for (long i = 0; i < depth; ++i) {
        const std::string name = "layer " + std::to_string(i + 1);
        if (!reader.next(line)) reader.fail("missing " + name);
        std::istringstream spec(line);
        std::string keyword;
        std::string act;
        long rows = 0;
        if (!(spec >> keyword >> rows >> act) || keyword != "layer" || rows <= 0)
            reader.fail(name + ": expected 'layer <size> <relu|identity>'");
        Layer layer;
        if (act == "relu") layer.activation = Activation::ReLU;
        else if (act == "identity") layer.activation = Activation::Identity;
        else reader.fail(name + ": unknown activation '" + act + "'");

        layer.weights.resize(rows, fan_in);
        for (long r = 0; r < rows; ++r) {
            if (!reader.next(line)) reader.fail(name + ": missing weight row " + std::to_string(r + 1));
            const auto values = parse_row(line, reader);
            if (static_cast<Eigen::Index>(values.size()) != fan_in)
                reader.fail(name + ": weight row " + std::to_string(r + 1) + " has " + std::to_string(values.size()) +
                            " entries, expected " + std::to_string(fan_in));
            for (Eigen::Index j = 0; j < fan_in; ++j) layer.weights(r, j) = values[static_cast<std::size_t>(j)];
        }
        if (!reader.next(line)) reader.fail(name + ": missing bias row");
        const auto bias = parse_row(line, reader);
        if (static_cast<long>(bias.size()) != rows)
            reader.fail(name + ": bias row has " + std::to_string(bias.size()) + " entries, expected " +
                        std::to_string(rows));
        layer.bias = Eigen::Map<const Vector>(bias.data(), rows);
        layers.push_back(std::move(layer));
        fan_in = rows;
    }
    if (reader.next(line)) reader.fail("unexpected trailing content");
    try {
        return Network(std::move(layers));
    } catch (const DimensionError& e) {
        throw ParseError(e.what());
    }
}

Network load_network(const std::filesystem::path& path) {
    return parse_network(read_text_file(path));
}

std::string format_network(const Network& net) {
    std::string out = "relu-ffn v1 " + std::to_string(net.input_dim()) + " " + std::to_string(net.num_layers()) + "\n";
    char buf[32];
    auto append_row = [&](const auto& row) {
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row(j));
            if (j) out += ' ';
            out += buf;
        }
        out += '\n';
    };
    for (const Layer& layer : net.layers()) {
        out += "layer " + std::to_string(layer.size()) +
               (layer.activation == Activation::ReLU ? " relu\n" : " identity\n");
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) append_row(layer.weights.row(r));
        append_row(layer.bias);
    }
    return out;
}

void save_network(const Network& net, const std::filesystem::path& path) {
    write_file_atomic(path, format_network(net));
}

}  // namespace symadex
