#include "psrlab/bench.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace psrlab;

namespace {

// "0,3,5" and "0..19" forms, mixed freely.
std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> out;
    for (const auto& item : items) {
        const auto dots = item.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoull(item));
            } else {
                const std::uint64_t a = std::stoull(item.substr(0, dots));
                const std::uint64_t b = std::stoull(item.substr(dots + 2));
                if (b < a) throw ValidationError("empty seed range " + item);
                for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
            }
        } catch (const std::logic_error&) {
            throw ValidationError("bad seed: " + item);
        }
    }
    return out;
}

int exit_code_for(const nlohmann::json& err) {
    const std::string kind = err.at("error").at("kind");
    if (kind == "missing_file") return 2;
    if (kind == "validation") return 3;
    return 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"psrlab: B-stable PSR laboratory"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::vector<std::string> seeds{"0"};
    std::string config_path;
    std::string fixture_name;
    std::string fixture_params = "{}";
    std::string fixture_out;
    std::uint64_t fixture_seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seeds", seeds, "seed list, e.g. 0,1,2 or 0..19")->delimiter(',');
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--cap", cfg.cap, "enumeration cap (overrides PSRLAB_CAP)");
    };

    auto* certify = app.add_subcommand("certify", "build a B-representation and certify its stability");
    certify->add_option("--model", cfg.model_path)->required();
    certify->add_option("--construct", cfg.construct)
        ->check(CLI::IsMember({"revealing", "decodable", "future-suff", "regular"}));
    certify->add_option("--m", cfg.m);
    add_common(certify);

    auto* learn = app.add_subcommand("learn", "run a learner over seeds");
    learn->add_option("--class", cfg.class_path)->required();
    learn->add_option("--alg", cfg.algorithm)->check(CLI::IsMember({"omle", "e2d", "mops", "rfe2d"}));
    learn->add_option("--T,--K", cfg.T);
    learn->add_option("--gamma", cfg.gamma);
    learn->add_option("--beta", cfg.beta, "confidence radius; default 2 log(|Theta|/0.01)");
    learn->add_option("--eta", cfg.eta);
    add_common(learn);

    auto* verify = app.add_subcommand("verify", "run a falsification suite");
    verify->add_option("--suite", cfg.suite)
        ->required()
        ->check(CLI::IsMember({"brep", "stability", "decomp", "hellinger", "eluder"}));
    verify->add_option("--instances", cfg.instances);
    add_common(verify);

    auto* eluder = app.add_subcommand("eluder-suite", "eluder check on OMLE trajectories");
    eluder->add_option("--class", cfg.class_path)->required();
    eluder->add_option("--T,--K", cfg.T);
    eluder->add_option("--beta", cfg.beta);
    add_common(eluder);

    auto* fixture = app.add_subcommand("fixture", "write a fixture model or class as JSON");
    fixture->add_option("name", fixture_name)->required();
    fixture->add_option("--params", fixture_params, "JSON object of generator parameters");
    fixture->add_option("--seed", fixture_seed);
    fixture->add_option("-o,--output", fixture_out);

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("--config", config_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fixture->parsed()) {
            const nlohmann::json j = generate_fixture(fixture_name, nlohmann::json::parse(fixture_params), fixture_seed);
            if (fixture_out.empty()) {
                std::cout << j.dump(2) << "\n";
            } else {
                std::ofstream out(fixture_out);
                out << j.dump(2) << "\n";
                if (!out) throw Error("io", "cannot write " + fixture_out);
            }
            return 0;
        }
        if (run->parsed()) {
            cfg = load_config(config_path);
        } else {
            cfg.command = app.get_subcommands().front()->get_name();
            cfg.seeds = parse_seeds(seeds);
        }
        const ExperimentOutcome out = run_experiment(cfg);
        nlohmann::json j = out.summary;
        j["directory"] = out.directory.string();
        std::cout << j.dump(2) << "\n";
        return out.exit_code;
    } catch (const nlohmann::json::exception& e) {
        const nlohmann::json err{{"status", "error"}, {"error", {{"kind", "validation"}, {"message", e.what()}}}};
        std::cout << err.dump(2) << "\n";
        return 3;
    } catch (const std::exception& e) {
        const nlohmann::json err = error_json(e);
        std::cout << err.dump(2) << "\n";
        return exit_code_for(err);
    }
}
