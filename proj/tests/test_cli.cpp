#include <doctest.h>

#include <cli.hpp>

#include <dualmink/io.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace dualmink;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DUALMINK_DATA_DIR;

struct Result
{
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "dualmink");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

struct TempDir
{
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name)
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

} // namespace

TEST_CASE("measure prints the ball total")
{
    const auto r = run({"measure", "--body", (kData / "ball.json").string(), "--p", "0", "--q", "3", "--region", "full"});
    REQUIRE(r.code == 0);
    const auto doc = Json::parse(r.out);
    CHECK(std::abs(doc["total"].get<double>() / (4.0 * std::numbers::pi) - 1.0) <= 1e-6);
    CHECK(doc["provenance"]["config_hash"].get<std::string>().size() == 16);
    CHECK(doc["provenance"].contains("seed"));

    const auto cone = run({"measure", "--body", (kData / "cube.json").string(), "--kind", "cone"});
    REQUIRE(cone.code == 0);
    CHECK(Json::parse(cone.out)["value"].get<double>() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("solve writes the unit ball for isotropic data")
{
    TempDir dir("dualmink-cli-solve");
    const auto args = std::vector<std::string>{
        "solve", "--f", (kData / "isotropic.field.json").string(), "--p", "0.5", "--q", "3.5", "--level", "4"};
    auto a = args;
    a.insert(a.end(), {"--out", dir / "a.json", "--report", dir / "ra.json"});
    REQUIRE(run(a).code == 0);
    auto b = args;
    b.insert(b.end(), {"--out", dir / "b.json", "--report", dir / "rb.json", "--threads", "1"});
    REQUIRE(run(b).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "ra.json") == slurp(dir / "rb.json"));

    const auto body = read_json_file(dir / "a.json");
    CHECK(body["type"] == "support_grid");
    CHECK(body["provenance"].contains("config_hash"));
    CHECK(body["provenance"].contains("seed"));
    for (const auto& v : body["values"]) CHECK(std::abs(v.get<double>() - 1.0) <= 1e-3);
    CHECK(body_from_json(body).kind() == ConvexBody::Kind::SupportGrid);

    auto wrong = args;
    wrong[8] = "3";
    const auto r = run(wrong);
    CHECK(r.code == 2);
    CHECK(r.err.find("isotropic.field.json") != std::string::npos);
    CHECK(r.err.find("/level") != std::string::npos);
}

TEST_CASE("solve reports degeneracy with exit code 3")
{
    TempDir dir("dualmink-cli-degenerate");
    const auto m = run({"measure", "--body", (kData / "ellipsoid.json").string(), "--kind", "density", "--p", "0.3",
                        "--q", "3.2", "--out", dir / "d.json"});
    REQUIRE(m.code == 0);
    write_json_file(dir / "f.json", read_json_file(dir / "d.json")["field"]);
    const auto r = run({"solve", "--f", dir / "f.json", "--p", "0.3", "--q", "3.2", "--scheme", "multiplicative"});
    CHECK(r.code == 3);
    CHECK(r.err.find("degenerate") != std::string::npos);
    CHECK(run({"solve", "--f", dir / "f.json", "--p", "0.3", "--q", "3.2", "--out", dir / "u.json"}).code == 0);
}

TEST_CASE("verify writes reproducible reports and guards baselines")
{
    TempDir dir("dualmink-cli-verify");
    const auto base = std::vector<std::string>{"verify",     "basic-estimate",
                                               "--family",   (kData / "ellipsoids.family.json").string(),
                                               "--p",        "0",
                                               "--q",        "3.2",
                                               "--lambda-cap", "20",
                                               "--baseline-dir", dir / "baselines"};
    auto a = base;
    a.insert(a.end(), {"--out", dir / "a.json", "--tsv", dir / "a.tsv"});
    const auto first = run(a);
    REQUIRE(first.code == 0);
    CHECK(first.err.find("baseline established") != std::string::npos);
    auto b = base;
    b.insert(b.end(), {"--out", dir / "b.json", "--tsv", dir / "b.tsv"});
    const auto second = run(b);
    REQUIRE(second.code == 0);
    CHECK(second.err.find("baseline matches") != std::string::npos);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.tsv") == slurp(dir / "b.tsv"));

    const auto report = read_json_file(dir / "a.json");
    CHECK(report["provenance"]["seed"] == 1);
    CHECK(report["verdict"]["status"] == "pass");
    const auto hash = report["provenance"]["config_hash"].get<std::string>();
    CHECK(slurp(dir / "a.tsv").find(hash) != std::string::npos);

    const fs::path stored = dir.path / "baselines" / ("basic_estimate-" + hash + ".json");
    REQUIRE(fs::exists(stored));
    auto doc = read_json_file(stored);
    doc["metrics"]["ratio_spread"] = doc["metrics"]["ratio_spread"].get<double>() * 1.05;
    write_json_file(stored, doc);
    const auto drift = run(base);
    CHECK(drift.code == 1);
    CHECK(drift.err.find("ratio_spread") != std::string::npos);

    auto strict = base;
    strict.insert(strict.end(), {"--c-ratio", "1.5", "--no-baseline"});
    CHECK(run(strict).code == 1);
    auto empty = base;
    empty.insert(empty.end(), {"--lambda-cap", "1.0001", "--no-baseline"});
    const auto inc = run(empty);
    CHECK(inc.code == 0);
    CHECK(inc.err.find("inconclusive") != std::string::npos);
}

TEST_CASE("probes")
{
    const auto d = run({"probe", "degeneration", "--p", "0.5"});
    REQUIRE(d.code == 0);
    const auto doc = Json::parse(d.out);
    CHECK(doc["verdict"]["status"] == "observational");
    CHECK(doc["summary"]["lambda_strictly_increasing"] == true);
    CHECK(run({"probe", "degeneration"}).code == 2);
    CHECK(run({"probe", "degeneration", "--allow-unsupported"}).code == 0);
    CHECK(run({"probe", "degeneration", "--p", "0.5", "--schedule", "1,x"}).code == 2);

    const auto u = run({"probe", "uniqueness", "--starts", "2", "--level", "3"});
    CHECK(u.code == 0);
    CHECK(Json::parse(u.out)["verdict"]["status"] == "pass");
    CHECK(run({"probe", "uniqueness", "--q", "3.5"}).code == 2);
}

TEST_CASE("john")
{
    const auto r = run({"john", "--body", (kData / "cube.json").string()});
    REQUIRE(r.code == 0);
    const auto doc = Json::parse(r.out);
    for (const auto& a : doc["half_axes"]) CHECK(std::abs(a.get<double>() - 1.0) <= 1e-3);
    CHECK(doc["containment"]["inner_excess"].get<double>() <= 1e-6);
    CHECK(doc["containment"]["outer_excess"].get<double>() <= 1e-6);
}

TEST_CASE("usage errors")
{
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"measure"}).code == 2);
    CHECK(run({"measure", "--body", "/nonexistent/body.json"}).code == 2);
    CHECK(run({"measure", "--body", (kData / "ball.json").string(), "--region", "blob"}).code == 2);
    CHECK(run({"solve", "--p", "0.5"}).code == 2);
    CHECK(run({"verify", "nothing"}).code == 2);

    TempDir dir("dualmink-cli-usage");
    {
        std::ofstream os(dir / "bad.json");
        os << "{\n  \"type\": \"ellipsoid\",\n  \"half_axes\": [1, -1, 1]\n}\n";
    }
    const auto bad = run({"measure", "--body", dir / "bad.json"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("bad.json:3") != std::string::npos);
    CHECK(bad.err.find("/half_axes") != std::string::npos);

    {
        std::ofstream os(dir / "fam.json");
        os << "{\"kind\": \"ellipsoids\", \"count\": 0}";
    }
    const auto fam = run({"verify", "c0", "--family", dir / "fam.json"});
    CHECK(fam.code == 2);
    CHECK(fam.err.find("fam.json") != std::string::npos);
    CHECK(fam.err.find("/count") != std::string::npos);
}
