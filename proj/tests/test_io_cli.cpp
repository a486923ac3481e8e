#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <doctest.h>

#include "chieb/errors.hpp"
#include "chieb/io.hpp"

using namespace chieb;
using doctest::Approx;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "chieb-io-tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path p = scratch_dir() / name;
    write_text(p.string(), content);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CHIEB_CLI_PATH) + " " + args + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("ingest basic csv with truth columns") {
    const auto p = write_file("basic.csv",
                              "id,x,k,is_null,lambda\n"
                              "a,12.5,7,0,20.0\n"
                              "b,3.25,5,1,\n");
    const Battery b = ingest_csv(p.string());
    REQUIRE(b.size() == 2);
    CHECK(b.records[0].id == "a");
    CHECK(b.records[0].x == Approx(12.5));
    CHECK(b.records[0].k == Approx(7.0));
    REQUIRE(b.records[0].is_null.has_value());
    CHECK_FALSE(*b.records[0].is_null);
    CHECK(*b.records[0].lambda == Approx(20.0));
    REQUIRE(b.records[1].is_null.has_value());
    CHECK(*b.records[1].is_null);
    CHECK_FALSE(b.records[1].lambda.has_value());
}

TEST_CASE("ingest default df and unknown columns") {
    const auto p = write_file("extras.csv",
                              "id,x,score,notes\n"
                              "a,12.5,9,keep\n"
                              "b,3.25,1,drop\n");
    const Battery b = ingest_csv(p.string(), 7.0);
    REQUIRE(b.size() == 2);
    CHECK(b.records[1].k == Approx(7.0));
}

TEST_CASE("ingest error cases") {
    CHECK_THROWS_AS(ingest_csv((scratch_dir() / "missing.csv").string()), data_error);
    const auto empty = write_file("empty.csv", "");
    CHECK_THROWS_AS(ingest_csv(empty.string()), data_error);
    const auto nohdr = write_file("nohdr.csv", "foo,bar\n1,2\n");
    CHECK_THROWS_AS(ingest_csv(nohdr.string()), data_error);
    const auto nok = write_file("nok.csv", "id,x\na,5.0\n");
    CHECK_THROWS_AS(ingest_csv(nok.string()), config_error);
    const auto badnum = write_file("badnum.csv", "id,x,k\na,oops,7\n");
    CHECK_THROWS_WITH_AS(ingest_csv(badnum.string()), doctest::Contains("row 2"),
                         data_error);
    const auto negx = write_file("negx.csv", "id,x,k\na,-1.0,7\n");
    CHECK_THROWS_AS(ingest_csv(negx.string()), data_error);
    const auto dup = write_file("dup.csv", "id,x,k\na,5.0,7\na,6.0,7\n");
    CHECK_THROWS_AS(ingest_csv(dup.string()), data_error);
    const auto shortrow = write_file("short.csv", "id,x,k\na,5.0\n");
    CHECK_THROWS_AS(ingest_csv(shortrow.string()), data_error);
}

TEST_CASE("format_double round trips") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 19.7273, 1e-12, 3.141592653589793, 1e18}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("estimate csv header and re-ingestability") {
    std::vector<EstimateRow> rows(1);
    rows[0].id = "a";
    rows[0].summary.x = 20.0;
    rows[0].summary.k = 7.0;
    rows[0].summary.mean = 15.1;
    rows[0].summary.variance = 47.5;
    rows[0].summary.interval_lo = 3.7;
    rows[0].summary.interval_hi = 26.4;
    rows[0].summary.fdr = 0.43;
    rows[0].significant = true;
    const fs::path p = scratch_dir() / "est.csv";
    write_estimates_csv(p.string(), rows);
    const std::string text = slurp(p);
    CHECK(text.rfind("id,x,k,mean,var,lo,hi,fdr,significant,flags\n", 0) == 0);
    const Battery back = ingest_csv(p.string());
    REQUIRE(back.size() == 1);
    CHECK(back.records[0].x == Approx(20.0));
    CHECK(back.records[0].k == Approx(7.0));
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("estimate runs end to end and is deterministic") {
    // null chi-squared battery large enough for the default spline fit
    std::mt19937_64 rng(3);
    std::chi_squared_distribution<double> chi(7.0);
    std::ostringstream csv;
    csv << "id,x,k\n";
    for (int i = 0; i < 1000; ++i) csv << "c" << i << ',' << chi(rng) << ",7\n";
    const auto in = write_file("battery.csv", csv.str());
    const fs::path out1 = scratch_dir() / "out1.csv";
    const fs::path out2 = scratch_dir() / "out2.csv";

    const std::string common = "estimate -i " + in.string() + " --seed 9 --pi0 0.9";
    CHECK(run_cli(common + " -o " + out1.string()) == 0);
    CHECK(run_cli(common + " -o " + out2.string()) == 0);
    const std::string a = slurp(out1), b = slurp(out2);
    CHECK(a == b);
    CHECK(a.rfind("id,x,k,mean,var,lo,hi,fdr,significant,flags\n", 0) == 0);
    CHECK(slurp(out1.string() + ".meta.json").find("\"version\"") != std::string::npos);
    // output re-ingests: one summary row per input case
    CHECK(ingest_csv(out1.string()).size() == 1000);
}

TEST_CASE("estimate with the exact method and a prior file") {
    const auto prior = write_file("prior.json",
                                  "{\"kind\":\"gamma\",\"shape\":2.0,\"scale\":10.0}");
    const auto in = write_file("small.csv", "id,x,k\na,20.0,7\nb,8.0,7\n");
    const fs::path out = scratch_dir() / "exact.csv";
    CHECK(run_cli("estimate -i " + in.string() + " -o " + out.string() +
                  " --method exact --prior " + prior.string()) == 0);
    const std::string text = slurp(out);
    // frozen golden: posterior mean at x = 20 under the Gamma(2, 10) prior
    CHECK(text.find("a,20,7,15.0861353992") != std::string::npos);
}

TEST_CASE("bh report") {
    const auto in = write_file("bh.csv",
                               "id,x,k,is_null\n"
                               "a,30.0,7,0\nb,45.0,7,0\nc,2.0,7,1\nd,3.0,7,1\n");
    const fs::path out = scratch_dir() / "bh.json";
    CHECK(run_cli("bh -i " + in.string() + " -o " + out.string() + " --alpha 0.05") == 0);
    const std::string text = slurp(out);
    CHECK(text.find("\"selected\": 2") != std::string::npos);
    CHECK(text.find("\"empirical_fdr\": 0.0") != std::string::npos);
}

TEST_CASE("exit codes map the error taxonomy") {
    const fs::path out = scratch_dir() / "never.csv";
    // missing input file -> data error
    CHECK(run_cli("estimate -i " + (scratch_dir() / "absent.csv").string() + " -o " +
                  out.string()) == 3);
    const auto in = write_file("tiny.csv", "id,x,k\na,20.0,7\n");
    // unknown method -> config error
    CHECK(run_cli("estimate -i " + in.string() + " -o " + out.string() +
                  " --method bogus") == 2);
    // exact without --prior -> config error
    CHECK(run_cli("estimate -i " + in.string() + " -o " + out.string() +
                  " --method exact") == 2);
    // too little data for a spline fit -> data error
    CHECK(run_cli("estimate -i " + in.string() + " -o " + out.string()) == 3);
    CHECK(run_cli("curves -o " + out.string()) == 2);
}

TEST_CASE("curves table") {
    const auto prior = write_file("prior2.json",
                                  "{\"kind\":\"exponential\",\"rate\":0.25}");
    const fs::path out = scratch_dir() / "curves.csv";
    CHECK(run_cli("curves -o " + out.string() + " --prior " + prior.string() +
                  " --k 7 --x-min 1 --x-max 40 --points 40") == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("x,one_plus_2l,two_layer,u,v,w\n", 0) == 0);
    // header + 40 grid rows
    CHECK(std::count(text.begin(), text.end(), '\n') == 41);
}

}  // TEST_SUITE
