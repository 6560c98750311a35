#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args)
{
    std::string cmd = std::string(HOLOCYC_CLI) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const std::string data = HOLOCYC_DATA_DIR;

fs::path scratch()
{
    fs::path d = fs::temp_directory_path() / "holocyc_cli_test";
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

} // namespace

TEST_CASE("lyapunov of the global center")
{
    auto r = run("lyapunov --system " + data + "/center.json");
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["command"] == "lyapunov");
    CHECK(j["status"] == "ok");
    CHECK(j["results"]["first_nonzero"].is_null());
    for (double v : j["results"]["V"]) CHECK(std::abs(v) < 1e-12);
    CHECK(j["timing"]["seconds"].get<double>() >= 0);
}

TEST_CASE("cycles of the three-cycle system")
{
    fs::path csv = scratch() / "csv";
    auto r = run("cycles --system " + data + "/paper52.json --csv " + csv.string());
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["results"]["count"] == 3);
    CHECK(j["results"]["cycles"][2]["section_point"].get<double>() == doctest::Approx(5.190834).epsilon(1e-5));
    CHECK(fs::exists(csv / "displacement.csv"));
    CHECK(fs::exists(csv / "cycle_1.csv"));
}

TEST_CASE("verify then reverify")
{
    fs::path report = scratch() / "verify.json";
    auto r = run("verify --system " + data + "/paper52.json --boxes " + data + "/paper52_boxes.json --out " +
                 report.string());
    REQUIRE(r.code == 0);
    std::ifstream in(report);
    auto j = json::parse(in);
    CHECK(j["results"]["certified_boxes"] == 3);
    CHECK(j["results"]["newton"].size() == 3);

    auto back = run("reverify " + report.string());
    CHECK(back.code == 0);
    CHECK(json::parse(back.out)["results"]["ok"] == true);

    // a bare certificate replays too; a tampered one does not
    fs::path cert = scratch() / "cert.json";
    write(cert, j["results"]["certificate"].dump());
    CHECK(run("reverify " + cert.string()).code == 0);
    auto bad = j["results"]["certificate"];
    bad["boxes"][2]["faces"][1]["M"] = "1/1000";
    write(cert, bad.dump());
    auto t = run("reverify " + cert.string());
    CHECK(t.code == 1);
    CHECK(json::parse(t.out)["status"] == "failed");
}

TEST_CASE("averaging from the command line")
{
    fs::path p = scratch() / "pert.json";
    write(p, R"({"upper": [[0, -1], [1, 0]], "lower": [[0, 0], [0, 0]]})");
    auto r = run("average --system " + p.string() + " --order 1");
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    REQUIRE(j["results"]["zeros"].size() == 1);
    CHECK(j["results"]["zeros"][0]["r"].get<double>() == doctest::Approx(2 / M_PI));
    CHECK(run("average --system " + p.string() + " --order 2").code == 1);
}

TEST_CASE("invert and simulate")
{
    auto r = run("invert --system " + data + "/center.json");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["results"]["inverted"]["upper"][1][1] == "-1");
    auto s = run("simulate --system " + data + "/paper52.json --x 1.5");
    CHECK(s.code == 0);
}

TEST_CASE("usage and input errors exit with 2")
{
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("lyapunov").code == 2);
    CHECK(run("lyapunov --system /nonexistent/system.json").code == 2);
    fs::path bad = scratch() / "bad.json";
    write(bad, R"({"upper": [["1/0", "1"]], "lower": [["0", "1"]]})");
    auto r = run("lyapunov --system " + bad.string());
    CHECK(r.code == 2);
    CHECK(json::parse(r.out)["results"]["error"]["type"] == "input");
    CHECK(run("cycles --system " + data + "/paper52.json --range 5:1").code == 2);
    CHECK(run("verify --system " + data + "/paper52.json --boxes " + data + "/paper52_boxes.json --precision-bits 3")
              .code == 2);
}
