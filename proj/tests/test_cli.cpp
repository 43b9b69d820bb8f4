#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "combagg/cli.hpp"
#include "combagg/idla.hpp"
#include "combagg/lattice.hpp"
#include "combagg/rotor.hpp"
#include "combagg/sandpile.hpp"
#include "json.hpp"

using namespace combagg;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / ("combagg_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sim idla with one particle") {
    auto r = run({"sim", "idla", "--n", "1", "--seed", "7"});
    CHECK(r.code == 0);
    CHECK(r.out == "x,y\n0,0\n");
}

TEST_CASE("sim rotor with three particles") {
    auto r = run({"sim", "rotor", "--n", "3", "--rotors", "all-first"});
    CHECK(r.code == 0);
    CHECK(r.out == "x,y\n-1,0\n0,0\n0,1\n");
}

TEST_CASE("sim idla replays by seed") {
    auto a = run({"sim", "idla", "--n", "300", "--seed", "5"});
    auto b = run({"sim", "idla", "--n", "300", "--seed", "5"});
    auto c = run({"sim", "idla", "--n", "300", "--seed", "6"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    std::istringstream in(a.out);
    CHECK(read_region_csv(in) == idla::idla_run(300, 5).cluster);
}

TEST_CASE("sim sandpile writes cluster, side files and metadata") {
    const auto dir = scratch_dir();
    const auto csv = dir / "s.csv";
    auto r = run({"sim", "sandpile", "--n", "1000", "--tol", "1e-9", "--out", csv.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    for (const char* f : {"s.csv", "s.mass.csv", "s.odometer.csv", "s.json"}) CHECK(fs::exists(dir / f));

    sandpile::RelaxOptions opt;
    opt.stop_tol = 1e-9;
    const auto ref = sandpile::relax(sandpile::MassField::point(1000.0), opt);
    const Region back = read_region_csv(csv.string());
    CHECK(back == ref.cluster);

    auto meta = nlohmann::json::parse(slurp(dir / "s.json"));
    CHECK(meta["model"] == "sandpile");
    CHECK(meta["n"].get<double>() == 1000.0);
    CHECK(meta["cluster_size"].get<std::size_t>() == ref.cluster.size());
    CHECK(meta["total_mass"].get<double>() == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(meta["wall_ms"].get<double>() >= 0.0);
    CHECK(meta["extents"]["x_max"].get<int>() == -meta["extents"]["x_min"].get<int>());

    // the mass dump sums to n
    std::istringstream mass(slurp(dir / "s.mass.csv"));
    std::string line;
    std::getline(mass, line);
    CHECK(line == "x,y,value");
    double total = 0.0;
    while (std::getline(mass, line)) total += std::stod(line.substr(line.rfind(',') + 1));
    CHECK(total == doctest::Approx(1000.0).epsilon(1e-12));
    fs::remove_all(dir);
}

TEST_CASE("sim rotor json and file round trip") {
    auto r = run({"sim", "rotor", "--n", "200", "--rotors", "toward-origin", "--format", "json"});
    REQUIRE(r.code == 0);
    auto meta = nlohmann::json::parse(r.out);
    const auto ref = rotor::rotor_aggregate(200, rotor::RotorState::toward_origin());
    CHECK(meta["cluster_size"].get<std::size_t>() == 200);
    CHECK(meta["steps"].get<std::uint64_t>() == ref.steps);
    Region from_json;
    for (const auto& row : meta["cluster"]) from_json.insert({row[0].get<std::int64_t>(), row[1].get<std::int64_t>()});
    CHECK(from_json == ref.cluster);

    const auto dir = scratch_dir();
    const auto csv = dir / "r.csv";
    REQUIRE(run({"sim", "rotor", "--n", "200", "--rotors", "toward-origin", "--out", csv.string()}).code == 0);
    CHECK(read_region_csv(csv.string()) == ref.cluster);
    std::ifstream rot(dir / "r.rotors.csv");
    auto indices = rotor::read_rotor_csv(rot);
    for (const auto& [v, i] : indices) CHECK(ref.rotors.index(v) == i);
    fs::remove_all(dir);
}

TEST_CASE("sim idla trials report sorted seeds") {
    auto r = run({"sim", "idla", "--n", "300", "--seed", "10", "--trials", "4", "--jobs", "2", "--eps", "0.3"});
    REQUIRE(r.code == 0);
    auto meta = nlohmann::json::parse(r.out);
    REQUIRE(meta["runs"].size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(meta["runs"][i]["seed"].get<int>() == 10 + i);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"sim", "idla", "--n", "5", "--bogus"}).code == 2);
    CHECK(run({"sim", "lattice-gas", "--n", "5"}).code == 2);
    CHECK(run({"sim", "idla"}).code == 2);
    CHECK(run({"sim", "idla", "--n", "2.5"}).code == 2);
    CHECK(run({"sim", "sandpile", "--n", "10", "--rotors", "all-first"}).code == 2);
    CHECK(run({"sim", "sandpile", "--n", "-1"}).code == 2);
    CHECK(run({"sim", "rotor", "--n", "5", "--rotors", "sideways"}).code == 2);
    CHECK(run({"sim", "idla", "--n", "5", "--format", "xml"}).code == 2);
    CHECK(run({"verify", "everything"}).code == 2);
    CHECK(run({"render", "/nonexistent/cluster.csv"}).code == 2);
    CHECK(run({"sim", "idla", "--help"}).code == 0);
}

TEST_CASE("render through the command line") {
    const auto dir = scratch_dir();
    const auto csv = dir / "c.csv";
    REQUIRE(run({"sim", "sandpile", "--n", "300", "--out", csv.string()}).code == 0);
    auto a = run({"render", csv.string(), "--overlay", "ball:300"});
    auto b = run({"render", csv.string(), "--overlay", "ball:300"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("<?xml", 0) == 0);
    CHECK(a.out.find("data-ball=\"300\"") != std::string::npos);

    const auto svg = dir / "c.svg";
    REQUIRE(run({"render", csv.string(), "--out", svg.string()}).code == 0);
    CHECK(slurp(svg).find("<path") == std::string::npos);

    std::ofstream(dir / "bad.csv") << "x,y\n1,two\n";
    CHECK(run({"render", (dir / "bad.csv").string()}).code == 2);
    std::ofstream(dir / "nohead.csv") << "1,2\n";
    CHECK(run({"render", (dir / "nohead.csv").string()}).code == 2);
    CHECK(run({"render", csv.string(), "--overlay", "ring:3"}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("verify prints a JSON report and gates the exit code") {
    auto ok = run({"verify", "abelian", "--n", "200"});
    CHECK(ok.code == 0);
    auto doc = nlohmann::json::parse(ok.out);
    CHECK(doc["check"] == "abelian");
    CHECK(doc["pass"] == true);
    CHECK(doc["reports"][0]["criterion"] == 3);

    // the third kernel clause fails at 1 - 1e-6
    auto red = run({"verify", "kernel", "--tmax", "20"});
    CHECK(red.code == 1);
    CHECK(nlohmann::json::parse(red.out)["pass"] == false);
}
