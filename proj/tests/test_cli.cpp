#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string cli = PLPP_CLI_PATH;

int run(const std::string& args) {
    std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const char* p) const { return (path / p).string(); }
};

}  // namespace

TEST_CASE("gen-data writes a deterministic task file") {
    TempDir dir("plpp_cli_gen");
    std::string t1 = dir / "a.task";
    std::string t2 = dir / "b.task";
    CHECK(run("gen-data --classes 10 --shots 4 --seed 1 --out " + t1) == 0);
    CHECK(run("gen-data --classes 10 --shots 4 --seed 1 --out " + t2) == 0);
    CHECK(slurp(t1) == slurp(t2));
    // 40 train rows
    std::string contents = slurp(t1);
    std::size_t count = 0, pos = 0;
    while ((pos = contents.find("image train", pos)) != std::string::npos) {
        ++count;
        pos += 1;
    }
    CHECK(count == 40);
    CHECK(fs::exists(t1 + ".manifest.json"));
}

TEST_CASE("gen-data validates flags with exit 2") {
    TempDir dir("plpp_cli_gen_bad");
    CHECK(run("gen-data --classes 1 --out " + (dir / "x.task")) == 2);
    CHECK(run("gen-data") == 2);  // missing required --out
    CHECK(run("definitely-not-a-command") == 2);
}

TEST_CASE("train: defaults echoed in manifest, missing task exits 3, bad alpha exits 2") {
    TempDir dir("plpp_cli_train");
    std::string task = dir / "t.task";
    REQUIRE(run("gen-data --classes 4 --shots 2 --test-per-class 2 --seed 2 --out " + task) == 0);

    std::string out = dir / "run1";
    CHECK(run("train --task " + task + " --epochs 2 --vocab-size 32 --embed-dim 8 "
              "--out-dir " + out) == 0);
    std::string manifest = slurp(fs::path(out) / "manifest.json");
    CHECK(manifest.find("\"lambda\": 10.0") != std::string::npos);
    CHECK(manifest.find("\"alpha\": 0.2") != std::string::npos);
    CHECK(manifest.find("\"k\": 5") != std::string::npos);
    CHECK(fs::exists(fs::path(out) / "records.csv"));
    CHECK(fs::exists(fs::path(out) / "prompt.snapshot"));

    CHECK(run("train --task " + (dir / "missing.task")) == 3);
    CHECK(run("train --task " + task + " --alpha 1.5") == 2);
}

TEST_CASE("train: plpp at lambda 0 matches ce record CSV byte for byte") {
    TempDir dir("plpp_cli_reduction");
    std::string task = dir / "t.task";
    REQUIRE(run("gen-data --classes 4 --shots 2 --test-per-class 2 --seed 3 --out " + task) == 0);
    std::string base = " --task " + task + " --epochs 2 --seed 5 --vocab-size 32 --embed-dim 8";
    CHECK(run("train" + base + " --objective plpp --lambda 0 --out-dir " + (dir / "a")) == 0);
    CHECK(run("train" + base + " --objective ce --out-dir " + (dir / "b")) == 0);
    CHECK(slurp(fs::path(dir / "a") / "records.csv") == slurp(fs::path(dir / "b") / "records.csv"));
}

TEST_CASE("grad-check exit codes") {
    CHECK(run("grad-check --classes 3 --vocab-size 32 --embed-dim 8 --joint-dim 8") == 0);
    CHECK(run("grad-check --classes 3 --vocab-size 32 --embed-dim 8 --joint-dim 8 "
              "--threshold 0") == 1);
}

TEST_CASE("sweep produces one row per config x seed; report summarizes it") {
    TempDir dir("plpp_cli_sweep");
    std::string task = dir / "t.task";
    REQUIRE(run("gen-data --classes 4 --shots 2 --test-per-class 2 --seed 4 --out " + task) == 0);
    std::string csv = dir / "sweep.csv";
    CHECK(run("sweep --task " + task + " --lambdas 0,10 --seeds 1,2,3,4,5 --epochs 2 "
              "--vocab-size 32 --embed-dim 8 --out " + csv) == 0);
    std::string contents = slurp(csv);
    std::size_t rows = 0;
    for (char c : contents) rows += c == '\n';
    CHECK(rows == 11);  // header + 2 lambdas x 5 seeds

    // parallel run produces identical bytes
    std::string csv2 = dir / "sweep2.csv";
    CHECK(run("sweep --task " + task + " --lambdas 0,10 --seeds 1,2,3,4,5 --epochs 2 "
              "--vocab-size 32 --embed-dim 8 --jobs 4 --out " + csv2) == 0);
    CHECK(slurp(csv) == slurp(csv2));

    std::string md = dir / "report.md";
    CHECK(run("report --sweep " + csv + " --out " + md) == 0);
    std::string report = slurp(md);
    CHECK(report.find("lambda=0") != std::string::npos);
    CHECK(report.find("lambda=10") != std::string::npos);

    CHECK(run("sweep --task " + task + " --lambdas \"\" --out " + csv) == 2);
    CHECK(run("report --sweep " + (dir / "missing.csv")) == 3);
}
