#include <catch_amalgamated.hpp>

#include <filesystem>
#include <limits>
#include <random>

#include "mincusum/io/config.hpp"
#include "mincusum/io/csv.hpp"
#include "mincusum/io/output.hpp"

using namespace mincusum;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mincusum_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const char* kMinimal = R"({
  "scenario": {"id": "s", "kind": "single_fault", "repeat": 3,
               "channels": [{"pre": {"family": "gaussian", "mean": 0}, "post": {"family": "gaussian", "mean": 1}}]},
  "experiment": {"true_hypothesis": "1", "nu": [0, 5], "thresholds": {"from": 2, "to": 3, "step": 0.5},
                 "paths": 100, "seed": 7}
})";

}  // namespace

TEST_CASE("doubles round-trip through their shortest text") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 2000; ++k) {
        const double v = k % 2 ? u(gen) : std::ldexp(u(gen), -k % 300);
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.25) == "0.25");
    CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()).empty());
    CHECK(std::isnan(io::parse_double("")));
    CHECK(io::parse_double(io::format_double(INFINITY)) == INFINITY);
    CHECK_THROWS(io::parse_double("1.5x"));
}

TEST_CASE("csv quoting survives a parse") {
    const std::vector<std::string> row{"plain", "a,b", "say \"hi\"", "two\nlines", ""};
    std::ostringstream os;
    io::CsvWriter w(os);
    w.row(row);
    w.row({"x", "y"});
    CHECK(os.str().find("\"a,b\"") != std::string::npos);
    CHECK(os.str().find("\"say \"\"hi\"\"\"") != std::string::npos);
    const auto parsed = io::parse_csv(os.str());
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0] == row);
    CHECK(parsed[1] == std::vector<std::string>{"x", "y"});
    CHECK_THROWS(io::parse_csv("\"open"));
}

TEST_CASE("config parses and names missing or bad fields") {
    const StudyConfig cfg = io::parse_config_text(kMinimal);
    CHECK(cfg.scenario.channels.size() == 3);
    CHECK(cfg.thresholds == std::vector<double>{2.0, 2.5, 3.0});
    CHECK(cfg.change_points == std::vector<std::size_t>{0, 5});
    CHECK(cfg.sim.paths == 100);
    CHECK(cfg.prefix == "s");

    auto field_of = [](const std::string& text) {
        try {
            io::parse_config_text(text);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("(accepted)");
    };
    auto doc = nlohmann::ordered_json::parse(kMinimal);
    auto edit = [&](auto f) {
        auto d = doc;
        f(d);
        return field_of(d.dump());
    };
    CHECK(edit([](auto& d) { d["experiment"]["thresholds"] = nlohmann::ordered_json::array(); }) ==
          "experiment.thresholds");
    CHECK(edit([](auto& d) { d["experiment"]["thresholds"] = {3.0, 2.0}; }) == "experiment.thresholds");
    CHECK(edit([](auto& d) { d["experiment"]["bogus"] = 1; }) == "experiment.bogus");
    CHECK(edit([](auto& d) { d["experiment"]["true_hypothesis"] = "9"; }) == "experiment.true_hypothesis");
    CHECK(edit([](auto& d) { d["experiment"].erase("thresholds"); }) == "experiment.thresholds");
    CHECK(edit([](auto& d) { d["experiment"]["paths"] = -3; }) == "experiment.paths");
    CHECK(edit([](auto& d) { d["scenario"]["channels"][0]["post"]["family"] = "cauchy"; })
              .rfind("scenario.channels", 0) == 0);
    CHECK(edit([](auto& d) { d["scenario"]["channels"][0]["post"] = {{"family", "bernoulli"}, {"p", 0.5}}; })
              .rfind("scenario", 0) == 0);
    CHECK(field_of("{not json") == "(file)");
}

TEST_CASE("resolved config re-parses to the same snapshot") {
    const StudyConfig cfg = io::parse_config_text(kMinimal);
    const auto snap = io::to_json(cfg);
    const StudyConfig again = io::parse_config(snap);
    CHECK(io::to_json(again).dump() == snap.dump());
    CHECK(again.thresholds == cfg.thresholds);
}

TEST_CASE("sha256 matches the standard test vectors") {
    CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("atomic write leaves only the target") {
    const fs::path dir = scratch_dir("atomic");
    const fs::path target = dir / "sub" / "out.csv";
    io::write_atomic(target, "a,b\n");
    io::write_atomic(target, "c,d\n");
    CHECK(io::read_file(target) == "c,d\n");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(target.parent_path())) ++n;
    CHECK(n == 1);
}

TEST_CASE("uncommitted sessions remove their files") {
    const fs::path dir = scratch_dir("session");
    {
        io::OutputSession s;
        s.write(dir / "r.csv", "x\n");
        s.write_manifest(dir / "m.json", {{"k", 1}});
        CHECK(fs::exists(dir / "r.csv"));
    }
    CHECK_FALSE(fs::exists(dir / "r.csv"));
    CHECK_FALSE(fs::exists(dir / "m.json"));
    {
        io::OutputSession s;
        const auto& f = s.write(dir / "r.csv", "x\n");
        CHECK(f.sha256 == io::sha256_hex("x\n"));
        s.write_manifest(dir / "m.json", {{"k", 1}});
        s.commit();
    }
    REQUIRE(fs::exists(dir / "m.json"));
    const auto m = nlohmann::json::parse(io::read_file(dir / "m.json"));
    CHECK(m.at("outputs").at(0).at("bytes") == 2);
    CHECK(m.contains("wall_clock_seconds"));
}
