#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpsn/cli.hpp"
#include "qpsn/run_config.hpp"

using namespace qpsn::cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

}  // namespace

TEST_CASE("frame encode and decode")
{
    const auto enc = call({"frame", "encode", "--guard", "500000", "--cutoff", "1000000"});
    REQUIRE(enc.code == 0);
    const std::string hex = lines(enc.out).at(0);
    CHECK(hex.size() == 208);
    const auto dec = call({"frame", "decode", hex});
    REQUIRE(dec.code == 0);
    CHECK(dec.out.find("guard=500000\n") != std::string::npos);
    CHECK(dec.out.find("cutoff=1000000\n") != std::string::npos);
    CHECK(dec.out.find("payload_len=10\n") != std::string::npos);

    const auto trl = call({"frame", "encode", "--role", "trailer"});
    REQUIRE(trl.code == 0);
    const std::string thex = lines(trl.out).at(0);
    CHECK(thex.size() == 46);
    CHECK(thex.substr(40, 2) == "01");
    CHECK(call({"frame", "decode", thex}).out.find("role=trailer") != std::string::npos);
}

TEST_CASE("truncated frame is a usage error naming the offset")
{
    const std::string hex = lines(call({"frame", "encode"}).out).at(0);
    const auto r = call({"frame", "decode", hex.substr(0, 60)});
    CHECK(r.code == 2);
    CHECK(r.err.find("Truncated at offset 23") != std::string::npos);
    CHECK(call({"frame", "decode", "zz"}).code == 2);
    CHECK(call({"frame", "encode", "--payload-len", "70000"}).code == 2);
}

TEST_CASE("qkd sweep defaults")
{
    const auto r = call({"qkd-sweep"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    CHECK(ls.at(0) == "L_km,n,Q,e,K,R");
    CHECK(ls.size() == 1 + 4 * 21);
    CHECK(ls.at(1).rfind("0,0,", 0) == 0);
    for (std::size_t i = 1; i <= 21; ++i) {
        std::vector<std::string> f;
        std::istringstream in(ls[i]);
        for (std::string x; std::getline(in, x, ',');) f.push_back(x);
        CHECK(f.at(1) == "0");
        CHECK(f.at(4) == "1");
    }
    CHECK(ls.back().rfind("200,3,", 0) == 0);
    CHECK(call({"qkd-sweep"}).out == r.out);
}

TEST_CASE("mc-k")
{
    const auto r = call({"mc-k", "--availability", "0.5", "--switches", "2", "--trials", "1000", "--seed", "7"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    CHECK(ls.at(0) == "P,n,tq_over_tp,trials,seed,K_mc,K");
    CHECK(ls.at(1).rfind("0.5,2,100,1000,7,", 0) == 0);
    CHECK(ls.at(1).substr(ls.at(1).size() - 6) == ",0.245");
    CHECK(call({"mc-k", "--availability", "0.5", "--switches", "2", "--trials", "1000", "--seed", "7"}).out == r.out);
}

TEST_CASE("entdist")
{
    const auto off = call({"entdist", "--sweep", "length-hops", "--noise", "off", "--lengths", "0,100,300"});
    REQUIRE(off.code == 0);
    const auto ls = lines(off.out);
    CHECK(ls.at(0) == "scenario,total_length_km,hops,T1_ns,T2_ns,proc_ns,pair_index,fidelity");
    CHECK(ls.size() == 1 + 4 * 3 * 10);
    for (std::size_t i = 1; i < ls.size(); ++i) CHECK(ls[i].substr(ls[i].size() - 2) == ",1");

    const auto single = call({"entdist", "--sweep", "single", "--scenario", "sender", "--total-length", "50", "--hops", "2"});
    REQUIRE(single.code == 0);
    CHECK(lines(single.out).size() == 11);
    CHECK(lines(single.out).at(1).rfind("sender,50,2,500000,500000,125000,0,", 0) == 0);

    const auto cmp = call({"entdist", "--sweep", "compare", "--lengths", "0:200:10"});
    REQUIRE(cmp.code == 0);
    CHECK(cmp.err.find("crossing_central_km=") != std::string::npos);
    CHECK(cmp.err.find("crossing_sender_km=") != std::string::npos);

    CHECK(call({"entdist"}).code == 2);
    CHECK(call({"entdist", "--sweep", "bogus"}).code == 2);
    CHECK(call({"entdist", "--sweep", "single", "--t2-ns", "5e6"}).code == 2);
    CHECK(call({}).code == 2);
    CHECK(call({"--help"}).code == 0);
}

TEST_CASE("config file with flag override")
{
    const auto dir = std::filesystem::temp_directory_path() / "qpsn_cli_test";
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "# test config\nqkd_lengths = 0:20:10\nn_list = 1\navailability = 0.25\n";
    }
    const auto r = call({"--config", cfg.string(), "qkd-sweep", "--n-list", "2"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 4);
    CHECK(ls[1].rfind("0,2,", 0) == 0);
    CHECK(ls[1].find(",0.06125,") != std::string::npos);

    const auto csv = dir / "out.csv";
    const auto w = call({"--config", cfg.string(), "qkd-sweep", "--out", csv.string()});
    REQUIRE(w.code == 0);
    CHECK(w.out.empty());
    std::ifstream in(csv);
    std::stringstream body;
    body << in.rdbuf();
    CHECK(lines(body.str()).size() == 4);

    {
        std::ofstream f(cfg);
        f << "qkd_lengths = 0:20:10\nbogus = 1\n";
    }
    const auto bad = call({"--config", cfg.string(), "qkd-sweep"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find(":2:") != std::string::npos);
    CHECK(call({"--config", (dir / "missing.cfg").string(), "qkd-sweep"}).code == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("list parsing")
{
    CHECK(parse_double_list("0:30:10") == std::vector<double>{0, 10, 20, 30});
    CHECK(parse_double_list("1, 2.5") == std::vector<double>{1, 2.5});
    CHECK(parse_int_list("1e5") == std::vector<std::int64_t>{100000});
    CHECK_THROWS_AS(parse_double_list(""), ConfigError);
    CHECK_THROWS_AS(parse_double_list("0:10:0"), ConfigError);
    CHECK_THROWS_AS(parse_int_list("1.5"), ConfigError);
    CHECK(flag_for("eta_det") == "--eta-det");
    RunConfig c;
    apply_setting(c, "t1_ns", "inf");
    CHECK(std::isinf(c.ent.T1_ns));
    CHECK(format_number(c.ent.T1_ns) == "inf");
}
