#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string cli_bin() {
    const char* p = std::getenv("MEF_CLI_BIN");
    REQUIRE(p != nullptr);
    return p;
}

fs::path work_dir() {
    const char* p = std::getenv("MEF_TEST_TMP");
    fs::path dir = p ? fs::path(p) : fs::temp_directory_path() / "mef_cli_test";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    std::string cmd = "cd " + work_dir().string() + " && " + cli_bin() + " " + args +
                      " >> cli_stdout.log 2>> cli_stderr.log";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string strip_timestamp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("generated_at") == std::string::npos) out << line << '\n';
    return out.str();
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("verify --theorem c1 --q 4 --a 2 --x 100.5 --T 30") == 2);
    CHECK(run("verify --theorem nope --char 4.1 --x 10.5 --T 30") == 2);
    CHECK(run("zeros") == 2);
    CHECK(run("sieve") == 2);
}

TEST_CASE("cache builds are idempotent and reports deterministic modulo timestamp") {
    auto dir = work_dir();
    CHECK(run("sieve --limit 2000") == 0);
    auto mob = dir / "caches" / "mobius" / "mobius_2000.mbt";
    REQUIRE(fs::exists(mob));
    auto t0 = fs::last_write_time(mob);
    auto size0 = fs::file_size(mob);
    CHECK(run("sieve --limit 2000") == 0);
    CHECK(fs::last_write_time(mob) == t0);  // warm cache untouched
    CHECK(fs::file_size(mob) == size0);

    CHECK(run("verify --theorem c1 --q 4 --a 3 --x 100.5 --T 30 --out r1.json") == 0);
    CHECK(run("verify --theorem c1 --q 4 --a 3 --x 100.5 --T 30 --out r2.json") == 0);
    CHECK(strip_timestamp(dir / "r1.json") == strip_timestamp(dir / "r2.json"));
    CHECK(!strip_timestamp(dir / "r1.json").empty());

    // the zero caches landed in the layout caches/zeros/<label>/
    CHECK(fs::exists(dir / "caches" / "zeros" / "1"));
    CHECK(fs::exists(dir / "caches" / "zeros" / "4.1"));
}

TEST_CASE("theorem sweeps, derivative sums and product diagnostics run clean") {
    auto dir = work_dir();
    CHECK(run("verify --theorem 1 --char 4.1 --x 50.5,100.5 --T 30 --out t1.json") == 0);
    CHECK(run("verify --theorem 2 --char 6.1 --x 50.5 --T 30 --out t2.json") == 0);
    CHECK(run("verify --theorem 3 --field 4:4.1 --x 50.5 --T 30 --out t3.json") == 0);
    CHECK(run("derivsum --char 4.1 --T 20 --out ds.csv") == 0);
    {
        std::ifstream in(dir / "ds.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "gamma,partial_re,partial_im,gamma_over_2pi");
        std::string row;
        CHECK(std::getline(in, row).good());  // at least one zero below T_nu
    }
    CHECK(run("fproduct --char 6.1 --T 40 --window-h 0.5 --out lattice.csv") == 0);
    {
        std::ifstream in(dir / "lattice.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "eta,source_prime,multiplicity");
    }
    CHECK(run("chars --q 12") == 0);
    CHECK(run("chars --q 12 --char 12.1_1 --limit 24 --out table.csv") == 0);
    {
        std::ifstream in(dir / "table.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "n,re,im");
    }
    CHECK(run("sieve --field 4:4.1 --limit 500") == 0);
    CHECK(fs::exists(dir / "caches" / "fields"));
}

TEST_CASE("all-primitive scans and csv report format") {
    auto dir = work_dir();
    CHECK(run("zeros --q 5 --all-primitive --T 12") == 0);
    int labels = 0;
    for (const auto& e : fs::directory_iterator(dir / "caches" / "zeros"))
        labels += e.path().filename().string().rfind("5.", 0) == 0;
    CHECK(labels == 3);  // three primitive characters mod 5

    CHECK(run("verify --theorem 1 --char 4.1 --x 50.5 --T 30 --format csv --out t1.csv") == 0);
    std::ifstream in(dir / "t1.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "target,x,T_nu,residual_re,residual_im,abs_residual,budget_total");
    std::string row;
    CHECK(std::getline(in, row).good());
}

TEST_CASE("config file fills defaults and explicit flags override it") {
    auto dir = work_dir();
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"character":"6.1","theorem":"2","T":30,"x":[50.5]})";
    }
    CHECK(run("verify --config cfg.json --x 20.5 --out cfgrun.json") == 0);
    std::ifstream in(dir / "cfgrun.json");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("\"x\": [\n      20.5\n    ]") != std::string::npos);
    CHECK(ss.str().find("\"character\": \"6.1\"") != std::string::npos);
}
