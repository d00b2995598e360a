#include "amlab/lab/experiment.hpp"
#include "amlab/errors.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace amlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("amlab_test_lab_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json one_hole_config() {
    return json::parse(R"({
        "experiment": "one-hole-rigidity",
        "cf": {"partial_quotients": [1], "depth": 80},
        "seed": 5,
        "spread": {"m_max": 2000, "grid": 20},
        "scan": {"N_schedule": [1000, 10000], "x_samples": 2}
    })");
}

json two_hole_config() {
    return json::parse(R"({
        "experiment": "two-hole-weak-mixing",
        "cf": {"partial_quotients": [1], "depth": 80},
        "beta": "1/2",
        "epsilon": "1/pi"
    })");
}

bool has_code(const std::vector<lab::Diagnostic>& d, const std::string& level, const std::string& code) {
    for (const auto& x : d) {
        if (x.level == level && x.code == code) return true;
    }
    return false;
}

} // namespace

TEST_CASE("validate: well-formed configs produce no diagnostics") {
    CHECK(lab::validate_config(one_hole_config()).empty());
    CHECK(lab::validate_config(two_hole_config()).empty());
}

TEST_CASE("validate: beta = alpha warns about general position") {
    json c = two_hole_config();
    c["beta"] = "alpha";
    CHECK(has_code(lab::validate_config(c), "warning", "general-position"));
}

TEST_CASE("validate: shallow expansion flags insufficient depth") {
    json c = one_hole_config();
    c["cf"]["depth"] = 12;
    CHECK(has_code(lab::validate_config(c), "error", "insufficient-depth"));
}

TEST_CASE("validate: bad epsilon and unknown experiment") {
    json c = two_hole_config();
    c["epsilon"] = 2;
    CHECK(has_code(lab::validate_config(c), "error", "invalid-input"));
    CHECK(has_code(lab::validate_config(json{{"experiment", "nope"}}), "error", "invalid-input"));
    CHECK(has_code(lab::validate_config(json::array()), "error", "invalid-input"));
}

TEST_CASE("run: invalid config raises before any output") {
    json c = two_hole_config();
    c["epsilon"] = 2;
    const fs::path dir = scratch("invalid");
    CHECK_THROWS_AS(lab::run_experiment(c, {dir.string(), 1}), LabError);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("run: one-hole verdict, manifest and byte-identical reruns") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const auto ra = lab::run_experiment(one_hole_config(), {a.string(), 77});
    const auto rb = lab::run_experiment(one_hole_config(), {b.string(), 77});
    CHECK(ra.verdicts["verdict"] == "bounded-spread + eigenvalue-evidence");
    for (const auto& f : ra.files) {
        if (f == "manifest.json") continue;
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
    const json manifest = json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["seed"] == 77);
    CHECK(manifest["config"] == one_hole_config());
    CHECK(manifest.contains("wall_time_s"));
    CHECK(manifest["versions"].contains("compiler"));
    const auto ops = manifest["operations"].get<std::vector<std::string>>();
    for (const char* op : {"birkhoff_spread", "transfer_function", "eigenvalue_scan"}) {
        CHECK(std::find(ops.begin(), ops.end(), op) != ops.end());
    }
    CHECK(slurp(a / "spread.csv").rfind("m,spread_m,bound\n", 0) == 0);
    CHECK(slurp(a / "weyl_scan.csv").rfind("lambda,N,x_index,magnitude\n", 0) == 0);

    const fs::path c = scratch("det_c");
    lab::run_experiment(one_hole_config(), {c.string(), 78});
    CHECK(slurp(a / "weyl_scan.csv") != slurp(c / "weyl_scan.csv"));
}

TEST_CASE("run: half-cover corollary") {
    const fs::path d = scratch("half");
    const auto r = lab::run_experiment(
        json::parse(R"({"experiment": "half-cover-corollary", "cf": {"partial_quotients": [1, 2], "depth": 60}})"),
        {d.string(), std::nullopt});
    CHECK(r.verdicts["verdict"] == "corollary-evidence");
    CHECK(r.verdicts["beta_half"] == "evidence-holds");
    CHECK(r.verdicts["beta_alpha"] == "evidence-fails");
}

TEST_CASE("cli: run, validate and structured errors") {
    const char* bin = std::getenv("AMLAB_LAB_BINARY");
    if (bin == nullptr) {
        MESSAGE("AMLAB_LAB_BINARY not set; skipping CLI checks");
        return;
    }
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    json bad = two_hole_config();
    bad["epsilon"] = 2;
    std::ofstream(dir / "bad.json") << bad.dump();
    std::ofstream(dir / "good.json") << json::parse(
        R"({"experiment": "half-cover-corollary", "cf": {"depth": 40}})").dump();

    const std::string b = std::string("\"") + bin + "\"";
    const std::string err = (dir / "err.txt").string();
    const int rc_bad = std::system((b + " run --config " + (dir / "bad.json").string() + " 2> " + err).c_str());
    CHECK(rc_bad != 0);
    const json e = json::parse(slurp(err));
    CHECK(e["status"] == "error");
    CHECK(e["code"] == "invalid-input");
    CHECK(e["message"].get<std::string>().find("epsilon") != std::string::npos);

    CHECK(std::system((b + " validate --config " + (dir / "bad.json").string() + " > /dev/null").c_str()) != 0);
    CHECK(std::system((b + " validate --config " + (dir / "good.json").string() + " > /dev/null").c_str()) == 0);
    const fs::path out = dir / "out";
    CHECK(std::system((b + " run --config " + (dir / "good.json").string() + " --out-dir " + out.string() +
                       " --seed 3 > /dev/null")
                          .c_str()) == 0);
    CHECK(fs::exists(out / "verdicts.json"));
    CHECK(json::parse(slurp(out / "manifest.json"))["seed"] == 3);
    CHECK(std::system((b + " run --config " + (dir / "missing.json").string() + " 2> /dev/null").c_str()) != 0);
}
