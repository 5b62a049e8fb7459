#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "symadex/cli.hpp"
#include "symadex/io.hpp"
#include "symadex/network.hpp"
#include "symadex/relaxation.hpp"

using namespace symadex;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = SYMADEX_FIXTURES;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "symadex");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("symadex_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> line_synthesis(const fs::path& out) {
    return {"synthesize", "--network", kFixtures + "/line.net", "--input-vec", "0.45", "--target", "0",
            "--eps",      "0.3",       "--s-plus",               "20",          "--seed", "3",        "--out",
            out.string()};
}

}  // namespace

TEST_CASE("synthesize then verify the written region") {
    const fs::path dir = scratch("e2e");
    const Result r = run(line_synthesis(dir));
    REQUIRE(r.code == cli::kVerified);
    for (const char* f : {"region.json", "map.csv", "map.pgm", "log.txt"}) CHECK(fs::exists(dir / f));
    CHECK(r.out.find("\"verified\":true") != std::string::npos);

    const RegionFile file = load_region(dir / "region.json");
    CHECK(file.meta.verified);
    CHECK(file.meta.target == 0);
    const Network net = load_network(kFixtures + "/line.net");
    CHECK(verify_region(net, file.region, 0, RelaxationKind::Triangle).verified);

    const Result v = run({"verify", "--region", (dir / "region.json").string(), "--network", kFixtures + "/line.net"});
    CHECK(v.code == cli::kVerified);
    CHECK(v.out.find("verified=true") != std::string::npos);
}

TEST_CASE("region output is reproducible byte for byte") {
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    REQUIRE(run(line_synthesis(a)).code == cli::kVerified);
    REQUIRE(run(line_synthesis(b)).code == cli::kVerified);
    CHECK(read_text_file(a / "region.json") == read_text_file(b / "region.json"));
}

TEST_CASE("input errors exit with 3") {
    const Result missing = run({"synthesize", "--network", "/nonexistent/net.txt", "--input-vec", "0.1", "--target",
                                "0", "--eps", "0.1"});
    CHECK(missing.code == cli::kInputError);
    CHECK(missing.err.find("/nonexistent/net.txt") != std::string::npos);

    const fs::path dir = scratch("corrupt");
    write_file_atomic(dir / "bad.json", "{ \"dim\": 2, \"W\": [");
    const Result corrupt = run({"verify", "--region", (dir / "bad.json").string(), "--network",
                                kFixtures + "/reference.net", "--target", "1"});
    CHECK(corrupt.code == cli::kInputError);
    CHECK_FALSE(corrupt.err.empty());

    CHECK(run({"synthesize", "--network", kFixtures + "/line.net", "--input-vec", "0.1,0.2", "--target", "0", "--eps",
               "0.1"})
              .code == cli::kInputError);
    CHECK(run({"synthesize", "--network", kFixtures + "/line.net", "--input-vec", "0.1", "--target", "7", "--eps",
               "0.1"})
              .code == cli::kInputError);
    CHECK(run({"frobnicate"}).code == cli::kInputError);
}

TEST_CASE("verify on the reference box fails with margin -4") {
    const Result r = run({"verify", "--region", kFixtures + "/reference_box.json", "--network",
                          kFixtures + "/reference.net"});
    CHECK(r.code == cli::kUnverified);
    CHECK(r.out.find("verified=false margin=-4.000000") != std::string::npos);
    const Result d = run({"verify", "--region", kFixtures + "/reference_box.json", "--network",
                          kFixtures + "/reference.net", "--relaxation", "deeppoly"});
    CHECK(d.code == cli::kUnverified);
}

TEST_CASE("attack writes a reloadable CSV") {
    const fs::path dir = scratch("attack");
    const Result r = run({"attack", "--network", kFixtures + "/line.net", "--input-vec", "0.45", "--target", "0",
                          "--eps", "0.3", "--s-plus", "6", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const std::vector<Vector> points = parse_points_csv(read_text_file(dir / "attacks.csv"));
    REQUIRE_FALSE(points.empty());
    for (const Vector& p : points) {
        CHECK(p.size() == 1);
        CHECK(p(0) > 0.5);
        CHECK(p(0) <= 0.75 + 1e-12);
    }

    const fs::path none = scratch("attack_none");
    const Result empty = run({"attack", "--network", kFixtures + "/line.net", "--input-vec", "0.1", "--target", "0",
                              "--eps", "0.05", "--s-plus", "4", "--out", none.string()});
    CHECK(empty.code == cli::kNoAttacks);
    CHECK_FALSE(fs::exists(none / "attacks.csv"));

    const Result syn = run({"synthesize", "--network", kFixtures + "/line.net", "--input-vec", "0.1", "--target",
                            "0", "--eps", "0.05", "--s-plus", "4", "--out", none.string()});
    CHECK(syn.code == cli::kNoAttacks);
}

TEST_CASE("theory table") {
    const Result r = run({"theory", "--d", "100", "--sigma", "0.8", "--omega", "1", "--m", "100", "--V", "0.9"});
    CHECK(r.code == 0);
    CHECK(r.out.find("4.7e+12") != std::string::npos);
    const Result small = run({"theory", "--d", "3", "--sigma", "0.5", "--omega", "1", "--m", "1", "--v", "0.5",
                              "--trials", "2000"});
    CHECK(small.code == 0);
    CHECK(small.out.find("16") != std::string::npos);
    CHECK(run({"theory", "--d", "3", "--sigma", "0.5", "--omega", "1", "--m", "1", "--V", "1.5"}).code ==
          cli::kInputError);
}

TEST_CASE("config files are overridden by flags") {
    CHECK(cli::config_arguments("# c\n eps = 0.3 \n\ntarget=0\n") ==
          std::vector<std::string>{"--eps", "0.3", "--target", "0"});
    CHECK_THROWS_AS(cli::config_arguments("eps 0.3\n"), ParseError);

    const fs::path dir = scratch("config");
    write_file_atomic(dir / "run.cfg", "network=" + kFixtures + "/line.net\ninput-vec=0.45\ntarget=0\neps=0.01\n");
    // eps 0.01 admits no attack; the flag restores a feasible radius
    CHECK(run({"attack", "--config", (dir / "run.cfg").string(), "--out", dir.string()}).code == cli::kNoAttacks);
    CHECK(run({"attack", "--config", (dir / "run.cfg").string(), "--eps", "0.3", "--out", dir.string()}).code == 0);
    CHECK(run({"attack", "--config", (dir / "missing.cfg").string()}).code == cli::kInputError);
}
