#include "psrlab/bench.hpp"
#include "psrlab/model_class.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace psrlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("psrlab-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

fs::path write_class(const fs::path& dir) {
    const fs::path p = dir / "class.json";
    std::ofstream(p) << class_to_json(noisy_class()).dump();
    return p;
}

}  // namespace

TEST_CASE("config round trip and hash") {
    ExperimentConfig c;
    c.command = "learn";
    c.class_path = "a.json";
    c.algorithm = "mops";
    c.T = 17;
    c.seeds = {3, 4};
    const ExperimentConfig d = ExperimentConfig::from_json(c.to_json());
    CHECK(d.to_json() == c.to_json());
    CHECK(d.hash() == c.hash());
    ExperimentConfig e = c;
    e.out_dir = "elsewhere";
    CHECK(e.hash() == c.hash());
    e.seeds = {3};
    CHECK(e.hash() != c.hash());
    CHECK(default_eta("e2d") == doctest::Approx(1.0 / 3.0));
    CHECK(default_eta("mops") == doctest::Approx(1.0 / 6.0));
    CHECK(default_eta("rfe2d") == doctest::Approx(0.5));
}

TEST_CASE("missing input files are reported by name") {
    ExperimentConfig c;
    c.command = "certify";
    c.model_path = "/nonexistent/model.json";
    try {
        c.validate();
        FAIL("expected an error");
    } catch (const std::exception& e) {
        const nlohmann::json j = error_json(e);
        CHECK(j.at("status") == "error");
        CHECK(j.at("error").at("kind") == "missing_file");
        CHECK(j.at("error").at("file") == "/nonexistent/model.json");
    }
    CHECK_THROWS(load_config("/nonexistent/config.json"));
}

TEST_CASE("certify the identity fixture") {
    const fs::path dir = scratch("certify");
    save_model(fix_id(), (dir / "id.json").string());
    ExperimentConfig c;
    c.command = "certify";
    c.model_path = (dir / "id.json").string();
    c.construct = "decodable";
    c.m = 1;
    c.out_dir = (dir / "runs").string();
    const ExperimentOutcome out = run_experiment(c);
    CHECK(out.exit_code == 0);
    CHECK(out.summary.at("lambda_hi_mean").get<double>() == 1.0);
    CHECK(out.summary.at("exact").get<bool>());
    const nlohmann::json cert = nlohmann::json::parse(slurp(out.directory / "certificate-0.json"));
    CHECK(cert.at("validate_residual").get<double>() <= 1e-9);
    CHECK(fs::exists(out.directory / "manifest.json"));
    CHECK_FALSE(fs::exists(out.directory.string() + ".staging"));
}

TEST_CASE("learn writes per-seed logs and a deterministic aggregate") {
    const fs::path dir = scratch("learn");
    ExperimentConfig c;
    c.command = "learn";
    c.class_path = write_class(dir).string();
    c.algorithm = "omle";
    c.T = 20;
    c.seeds.clear();
    for (std::uint64_t s = 0; s < 20; ++s) c.seeds.push_back(s);
    c.out_dir = (dir / "a").string();
    const ExperimentOutcome a = run_experiment(c);
    CHECK(a.exit_code == 0);
    int logs = 0;
    for (const auto& e : fs::directory_iterator(a.directory))
        if (e.is_directory() && fs::exists(e.path() / "log.csv")) {
            ++logs;
            CHECK(count_lines(slurp(e.path() / "log.csv")) == 21);
        }
    CHECK(logs == 20);
    CHECK(count_lines(slurp(a.directory / "curve.csv")) == 21);
    CHECK(a.summary.at("seeds") == c.seeds);
    CHECK(a.summary.at("beta").get<double>() == doctest::Approx(2.0 * std::log(800.0)));

    const auto first = tree_contents(a.directory);
    const ExperimentOutcome again = run_experiment(c);
    CHECK(tree_contents(again.directory) == first);
    c.out_dir = (dir / "b").string();
    const ExperimentOutcome b = run_experiment(c);
    auto moved = tree_contents(b.directory);
    auto expected = first;
    moved.erase("manifest.json");
    expected.erase("manifest.json");
    CHECK(moved == expected);
}

TEST_CASE("verify suites through the runner") {
    const fs::path dir = scratch("verify");
    for (const std::string suite : {"brep", "stability", "eluder"}) {
        ExperimentConfig c;
        c.command = "verify";
        c.suite = suite;
        c.instances = 20;
        c.out_dir = dir.string();
        const ExperimentOutcome out = run_experiment(c);
        CHECK(out.exit_code == 0);
        CHECK(out.summary.at("passed").get<bool>());
        CHECK(fs::exists(out.directory / "suite.csv"));
    }
}

TEST_CASE("EDEC bound coefficient") {
    const ModelClass cls = noisy_class();
    const EdecBound b = edec_bound(cls);
    const double H = cls.truth().H;
    const double A = cls.truth().A;
    CHECK(b.d > 0);
    CHECK(b.u_a >= 1);
    CHECK(b.lambda_hi >= 1.0);
    CHECK(b.coefficient == doctest::Approx(9.0 * b.d * A * b.u_a * b.lambda_hi * b.lambda_hi * H * H));
}

TEST_CASE("summary statistics") {
    CHECK(mean({1.0, 2.0, 3.0}) == doctest::Approx(2.0));
    CHECK(standard_error({1.0, 2.0, 3.0}) == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(standard_error({4.0}) == 0.0);
}

#ifdef PSRLAB_CLI
TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("cli");
    const std::string cli = PSRLAB_CLI;
    auto run = [&](const std::string& args) {
        const int rc = std::system((cli + " " + args + " > " + (dir / "out.json").string() + " 2>&1").c_str());
        return WEXITSTATUS(rc);
    };
    CHECK(run("certify --model /nonexistent/model.json") == 2);
    const nlohmann::json err = nlohmann::json::parse(slurp(dir / "out.json"));
    CHECK(err.at("error").at("file") == "/nonexistent/model.json");
    CHECK(run("run --config /nonexistent/config.json") == 2);
    CHECK(run("fixture FIX-ID -o " + (dir / "id.json").string()) == 0);
    CHECK(run("certify --model " + (dir / "id.json").string() + " --construct decodable --out " +
              (dir / "runs").string()) == 0);
    CHECK(run("learn --class " + (dir / "id.json").string() + " --out " + (dir / "runs").string()) != 0);
}
#endif
