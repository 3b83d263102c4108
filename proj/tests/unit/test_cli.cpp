#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dcycle_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + DCYCLE_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
    return WEXITSTATUS(status);
#else
    return status;
#endif
}

std::string fixture_csv() { return (oracle::fixture_dir() / "fixture.csv").string(); }

}  // namespace

TEST_CASE("run writes the full artifact set") {
    const auto out = scratch("full");
    REQUIRE(run("run " + fixture_csv() + " --out " + out.string()) == 0);
    for (const char* rel : {"config.json", "clean/clean_report.json", "segments.csv", "features.csv",
                            "pca.json", "clusters/mean_shift.csv", "clusters/mean_shift.json",
                            "clusters/kmeans.csv", "clusters/kmeans.json", "cycles/mean_shift.csv",
                            "cycles/mean_shift.json", "cycles/kmeans.csv", "cycles/kmeans.json",
                            "sapd/source.csv", "sapd/mean_shift.csv", "sapd/kmeans.csv",
                            "evaluation.json"})
        CHECK(fs::is_regular_file(out / rel));
    fs::remove_all(out);
}

TEST_CASE("missing input is a usage error and writes nothing") {
    const auto out = scratch("missing");
    CHECK(run("run /nonexistent/trace.csv --out " + out.string()) == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("malformed input fails the clean stage") {
    const auto dir = scratch("bad");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "bad.csv");
        f << "t,v_kmh\n0,1\n1,not-a-number\n";
    }
    const auto out = dir / "out";
    CHECK(run("run " + (dir / "bad.csv").string() + " --out " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out));
    fs::remove_all(dir);
}

TEST_CASE("unknown options and methods are usage errors") {
    CHECK(run("run " + fixture_csv() + " --method spectral --out /tmp/x") == 2);
    CHECK(run("frobnicate") == 2);
}

TEST_CASE("--stage stops after the named stage") {
    const auto out = scratch("stage");
    REQUIRE(run("run " + fixture_csv() + " --stage features --out " + out.string()) == 0);
    CHECK(fs::is_regular_file(out / "features.csv"));
    CHECK_FALSE(fs::exists(out / "pca.json"));
    CHECK_FALSE(fs::exists(out / "evaluation.json"));
    fs::remove_all(out);
}

TEST_CASE("single method runs only that method") {
    const auto out = scratch("kmeans");
    REQUIRE(run("run " + fixture_csv() + " --method kmeans --out " + out.string()) == 0);
    CHECK(fs::is_regular_file(out / "cycles/kmeans.csv"));
    CHECK_FALSE(fs::exists(out / "cycles/mean_shift.csv"));
    fs::remove_all(out);
}

TEST_CASE("runs are byte-for-byte reproducible") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run("run " + fixture_csv() + " --out " + a.string()) == 0);
    REQUIRE(run("run " + fixture_csv() + " --out " + b.string()) == 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(e.path(), a);
        REQUIRE(fs::is_regular_file(b / rel));
        CHECK(oracle::slurp(e.path()) == oracle::slurp(b / rel));
    }
    CHECK(files > 10);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("--print-config prints JSON and exits cleanly") {
    const auto out = scratch("print");
    const std::string cmd = std::string("\"") + DCYCLE_CLI + "\" run --print-config > " + out.string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto text = oracle::slurp(out);
    CHECK(text.find("\"mean_shift\"") != std::string::npos);
    fs::remove(out);
}
