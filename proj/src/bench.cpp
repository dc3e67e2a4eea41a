#include "psrlab/bench.hpp"

#include "psrlab/distribution.hpp"
#include "psrlab/predictive.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace psrlab {

namespace fs = std::filesystem;

nlohmann::json SuiteResult::to_json() const {
    return {{"suite", name},
            {"instances", instances},
            {"failures", failures},
            {"worst_slack", worst_slack},
            {"passed", passed()},
            {"details", details}};
}

namespace {

constexpr double kSlackTol = 1e-9;

struct Constructor {
    std::string name;
    int m;
};

BRep construct(const std::string& name, const PomdpModel& model, int m) {
    if (name == "revealing") return brep_revealing(model, m);
    if (name == "decodable") return brep_decodable(model, derive_decoder(model, m), m);
    if (name == "future-suff") return brep_future_sufficient(model, m);
    if (name == "regular") return brep_regular_psr(model, default_core_tests(model, m)).brep;
    throw ValidationError("unknown construction: " + name);
}

bool is_precondition(const Error& e) {
    return e.kind() == "rank_deficiency" || e.kind() == "constraint_violation" || e.kind() == "decoder_inconsistent";
}

void track(SuiteResult& r, double slack) {
    if (r.instances == 0 || slack < r.worst_slack) r.worst_slack = slack;
    ++r.instances;
    if (slack < -kSlackTol) ++r.failures;
}

}  // namespace

SuiteResult suite_brep(double tol) {
    SuiteResult r;
    r.name = "brep";
    const std::vector<std::string> fixtures{"FIX-ID", "FIX-NOISY", "FIX-DEC2", "FIX-LMDP"};
    const std::vector<Constructor> ctors{{"revealing", 1},   {"revealing", 2},   {"decodable", 1}, {"decodable", 2},
                                         {"future-suff", 1}, {"future-suff", 2}, {"regular", 1},   {"regular", 2}};
    std::map<std::string, int> built_per_fixture;
    std::map<std::string, int> built_per_ctor;
    nlohmann::json cells = nlohmann::json::array();
    double worst_residual = 0.0;
    for (const auto& f : fixtures) {
        const PomdpModel model = fixture_model(f);
        for (const auto& c : ctors) {
            nlohmann::json cell{{"fixture", f}, {"construct", c.name}, {"m", c.m}};
            ++r.instances;
            try {
                const BRep b = construct(c.name, model, c.m);
                const double res = validate_brep(b, model);
                cell["status"] = res <= tol ? "ok" : "residual";
                cell["residual"] = res;
                worst_residual = std::max(worst_residual, res);
                if (res > tol) ++r.failures;
                ++built_per_fixture[f];
                ++built_per_ctor[c.name];
            } catch (const Error& e) {
                cell["status"] = is_precondition(e) ? "not_applicable" : "error";
                cell["error"] = {{"kind", e.kind()}, {"message", e.what()}};
                if (!is_precondition(e)) ++r.failures;
            }
            cells.push_back(cell);
        }
    }
    for (const auto& f : fixtures)
        if (built_per_fixture[f] == 0) ++r.failures;
    for (const auto& c : ctors)
        if (built_per_ctor[c.name] == 0) ++r.failures;
    r.worst_slack = tol - worst_residual;
    r.details["cells"] = cells;
    r.details["worst_residual"] = worst_residual;
    return r;
}

SuiteResult suite_pi_norm(std::uint64_t seed, int n) {
    SuiteResult r;
    r.name = "pi_norm";
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {11, static_cast<std::uint64_t>(i)}));
        const int len = 1 + rng.uniform_int(2);
        const int size = static_cast<int>(ipow(4, len));
        VectorXd b(size);
        for (int t = 0; t < size; ++t) b(t) = rng.normal();
        const double dp = pi_norm(b, 2, 2);
        // all deterministic maps from reachable observation prefixes to actions
        const int slots = len == 1 ? 2 : 6;
        double best = 0.0;
        for (int mask = 0; mask < (1 << slots); ++mask) {
            double s = 0.0;
            for (int t = 0; t < size; ++t) {
                const Trajectory tau = trajectory_from_index(static_cast<std::uint64_t>(t), len, 2, 2);
                bool follows = ((mask >> tau.obs[0]) & 1) == tau.act[0];
                if (len == 2) {
                    const int slot = 2 + tau.obs[0] * 2 + tau.obs[1];
                    follows = follows && ((mask >> slot) & 1) == tau.act[1];
                }
                if (follows) s += std::abs(b(t));
            }
            best = std::max(best, s);
        }
        const double diff = std::abs(dp - best);
        worst = std::max(worst, diff);
        if (r.instances == 0 || 1e-12 - diff < r.worst_slack) r.worst_slack = 1e-12 - diff;
        ++r.instances;
        if (diff > 1e-12) ++r.failures;
    }
    r.details["max_abs_difference"] = worst;
    return r;
}

SuiteResult suite_stability(std::uint64_t seed) {
    SuiteResult r;
    r.name = "stability";
    nlohmann::json cases = nlohmann::json::array();
    auto add = [&](const std::string& label, const BRep& b, double target, bool exact_target) {
        const StabilityReport rep = certify_stability(b, 200, seed);
        double slack = target - rep.lambda_hi;
        if (exact_target && rep.exact) slack = 1e-10 - std::abs(rep.lambda_hi - target);
        for (const auto& bc : rep.bounds)
            if (!bc.consistent) slack = std::min(slack, bc.value - rep.lambda_lo);
        if (rep.weak_violations > 0) slack = std::min(slack, -1.0);
        track(r, slack);
        nlohmann::json j = report_to_json(rep);
        j["label"] = label;
        j["target"] = target;
        j["slack"] = slack;
        cases.push_back(j);
    };
    const PomdpModel id = fix_id();
    const BRep id_dec = brep_decodable(id, derive_decoder(id, 1), 1);
    add("FIX-ID decodable m=1", id_dec, 1.0, true);
    const BRep dec2 = brep_decodable(fix_dec2(), fix_dec2_decoder(), 2);
    add("FIX-DEC2 decodable m=2", dec2, std::sqrt(static_cast<double>(dec2.core.max_action_seqs())), true);
    add("FIX-NOISY revealing m=1", brep_revealing(fix_noisy(), 1), std::sqrt(2.0) / 0.6 + 1e-9, false);
    r.details["cases"] = cases;
    return r;
}

Triple random_triple(std::uint64_t seed) {
    const int H = 2;
    const int O = 2;
    const int A = 2;
    Triple t{random_revealing(2, O, A, H, 0.3, derive_seed(seed, {21, 1})),
             random_revealing(2, O, A, H, 0.3, derive_seed(seed, {21, 2})), Policy::uniform(H, O, A)};
    Rng rng(derive_seed(seed, {21, 3}));
    std::vector<std::vector<std::vector<double>>> table(H);
    for (int h = 1; h <= H; ++h) {
        const std::uint64_t n = ipow(static_cast<std::uint64_t>(O) * A, h - 1) * O;
        for (std::uint64_t i = 0; i < n; ++i) {
            const VectorXd p = rng.dirichlet(A);
            table[h - 1].emplace_back(p.data(), p.data() + A);
            double s = 0.0;
            for (double x : table[h - 1].back()) s += x;
            table[h - 1].back().back() += 1.0 - s;
        }
    }
    t.policy = Policy::stochastic(H, O, A, table);
    return t;
}

SuiteResult suite_decomposition(std::uint64_t seed, int n) {
    SuiteResult r;
    r.name = "decomp";
    for (int i = 0; i < n; ++i) {
        const Triple t = random_triple(derive_seed(seed, {31, static_cast<std::uint64_t>(i)}));
        const BRep theta = brep_revealing(t.theta, 1);
        const BRep bar = brep_revealing(t.bar, 1);
        const BErrorReport e = b_errors(theta, bar, t.bar, t.policy);
        const double tv = tv_distance(trajectory_distribution(t.theta, t.policy), trajectory_distribution(t.bar, t.policy));
        track(r, e.total() - tv);
    }
    return r;
}

SuiteResult suite_hellinger(std::uint64_t seed, int n) {
    SuiteResult r;
    r.name = "hellinger";
    int per_h_checks = 0;
    for (int i = 0; i < n; ++i) {
        const Triple t = random_triple(derive_seed(seed, {31, static_cast<std::uint64_t>(i)}));
        const BRep theta = brep_revealing(t.theta, 1);
        const BRep bar = brep_revealing(t.bar, 1);
        const double lambda = certify_stability(theta, 50, seed).lambda_hi;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& s : hellinger_domination_check(theta, bar, t.bar, t.policy, lambda)) {
            worst = std::min(worst, s.slack);
            ++per_h_checks;
        }
        track(r, worst);
    }
    r.details["per_step_checks"] = per_h_checks;
    return r;
}

SuiteResult suite_eluder(std::uint64_t seed, int n) {
    SuiteResult r;
    r.name = "eluder";
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {41, static_cast<std::uint64_t>(i)}));
        const EluderInstance inst = random_eluder_instance(rng);
        const double M = 0.1 + 2.0 * rng.uniform();
        track(r, eluder_l2_check(inst, M).slack);
    }
    return r;
}

SuiteResult suite_elliptical(std::uint64_t seed, int n) {
    SuiteResult r;
    r.name = "elliptical";
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {42, static_cast<std::uint64_t>(i)}));
        const auto phis = random_psd_sequence(rng);
        const double lambda0 = 0.1 + 2.0 * rng.uniform();
        track(r, elliptical_potential_check(phis, lambda0).slack);
    }
    return r;
}

SuiteResult suite_decoupling(std::uint64_t seed, int n) {
    SuiteResult r;
    r.name = "decoupling";
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {43, static_cast<std::uint64_t>(i)}));
        track(r, decoupling_check(random_decoupling_instance(rng)).slack);
    }
    return r;
}

SuiteResult suite_spanner(std::uint64_t seed, int n) {
    SuiteResult r;
    r.name = "spanner";
    double worst_res = 0.0;
    double worst_coef = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {44, static_cast<std::uint64_t>(i)}));
        const int dim = 1 + rng.uniform_int(6);
        const int rank = 1 + rng.uniform_int(dim);
        const int count = 1 + rng.uniform_int(30);
        MatrixXd basis(dim, rank);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < rank; ++b) basis(a, b) = rng.normal();
        std::vector<VectorXd> xs;
        double max_l1 = 0.0;
        for (int k = 0; k < count; ++k) {
            VectorXd c(rank);
            for (int b = 0; b < rank; ++b) c(b) = rng.normal();
            xs.push_back(basis * c);
            max_l1 = std::max(max_l1, xs.back().lpNorm<1>());
        }
        const Spanner sp = barycentric_spanner(xs, rank + rng.uniform_int(3));
        worst_res = std::max(worst_res, sp.residual);
        worst_coef = std::max(worst_coef, sp.max_coef);
        const double slack = std::min({1e-9 - sp.residual, 2.0 - sp.max_coef, max_l1 + 1e-12 - norm_1to1(sp.F)});
        track(r, slack + kSlackTol);
    }
    r.details["max_residual"] = worst_res;
    r.details["max_coefficient"] = worst_coef;
    return r;
}

EdecBound edec_bound(const ModelClass& cls) {
    EdecBound e;
    const CoreTestSet core = cls.core();
    e.u_a = core.max_action_seqs();
    for (const auto& m : cls.members) {
        e.d = std::max(e.d, psr_rank(m, core));
        const StabilityReport rep = certify_stability(brep_revealing(m, cls.window), 50, 1);
        e.lambda_hi = std::max(e.lambda_hi, rep.lambda_hi);
    }
    const PomdpModel& t = cls.truth();
    e.coefficient = 9.0 * e.d * t.A * e.u_a * e.lambda_hi * e.lambda_hi * t.H * t.H;
    return e;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double default_eta(const std::string& algorithm) {
    if (algorithm == "e2d") return 1.0 / 3.0;
    if (algorithm == "mops") return 1.0 / 6.0;
    if (algorithm == "rfe2d") return 0.5;
    return 0.0;
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"command", command},   {"model", model_path}, {"class", class_path},   {"construct", construct},
            {"m", m},               {"alg", algorithm},    {"T", T},                {"gamma", gamma},
            {"beta", beta},         {"eta", eta},          {"suite", suite},        {"instances", instances},
            {"seeds", seeds},       {"out", out_dir},      {"cap", cap}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.command = j.value("command", c.command);
    c.model_path = j.value("model", c.model_path);
    c.class_path = j.value("class", c.class_path);
    c.construct = j.value("construct", c.construct);
    c.m = j.value("m", c.m);
    c.algorithm = j.value("alg", c.algorithm);
    c.T = j.value("T", c.T);
    c.gamma = j.value("gamma", c.gamma);
    c.beta = j.value("beta", c.beta);
    c.eta = j.value("eta", c.eta);
    c.suite = j.value("suite", c.suite);
    c.instances = j.value("instances", c.instances);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.out_dir = j.value("out", c.out_dir);
    c.cap = j.value("cap", c.cap);
    return c;
}

namespace {

struct MissingFile : Error {
    MissingFile(const std::string& what, const std::string& path)
        : Error("missing_file", what + " not found: " + path), path(path) {}
    std::string path;
};

void require_file(const std::string& what, const std::string& path) {
    if (path.empty()) throw ValidationError(what + " path is required");
    if (!fs::is_regular_file(path)) throw MissingFile(what, path);
}

}  // namespace

void ExperimentConfig::validate() const {
    static const std::set<std::string> commands{"certify", "learn", "verify", "eluder-suite"};
    if (!commands.count(command)) throw ValidationError("unknown command: " + command);
    if (command == "certify") require_file("model file", model_path);
    if (command == "learn" || command == "eluder-suite") require_file("class file", class_path);
    if (seeds.empty()) throw ValidationError("seed list is empty");
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) throw ValidationError("seeds must be distinct");
    if (command == "learn") {
        static const std::set<std::string> algs{"omle", "e2d", "mops", "rfe2d"};
        if (!algs.count(algorithm)) throw ValidationError("unknown algorithm: " + algorithm);
        if (T <= 0) throw ValidationError("T must be positive");
        if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    }
    if (command == "verify") {
        static const std::set<std::string> suites{"brep", "stability", "decomp", "hellinger", "eluder"};
        if (!suites.count(suite)) throw ValidationError("unknown suite: " + suite);
    }
    if (command == "certify" && m < 1) throw ValidationError("m must be at least 1");
    if (cap > 0 && cap < 16) throw ValidationError("cap below the smallest instance requirement");
}

std::string ExperimentConfig::hash() const {
    nlohmann::json j = to_json();
    j.erase("out");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(j.dump())));
    return buf;
}

ExperimentConfig load_config(const std::string& path) {
    if (!fs::is_regular_file(path)) throw MissingFile("config file", path);
    std::ifstream in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("cannot parse " + path + ": " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

nlohmann::json error_json(const std::exception& e) {
    nlohmann::json j;
    j["status"] = "error";
    if (const auto* m = dynamic_cast<const MissingFile*>(&e)) {
        j["error"] = {{"kind", m->kind()}, {"message", m->what()}, {"file", m->path}};
    } else if (const auto* pe = dynamic_cast<const Error*>(&e)) {
        j["error"] = {{"kind", pe->kind()}, {"message", pe->what()}};
        if (const auto* rd = dynamic_cast<const RankDeficiencyError*>(&e)) j["error"]["sigma_min"] = rd->sigma_min;
        if (const auto* ce = dynamic_cast<const ConstraintError*>(&e)) j["error"]["residual"] = ce->residual;
    } else {
        j["error"] = {{"kind", "internal"}, {"message", e.what()}};
    }
    return j;
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw Error("io", "cannot write " + p.string());
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

nlohmann::json versions() {
    return {{"psrlab", "1.0.0"},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

nlohmann::json run_certify(const ExperimentConfig& c, const fs::path& dir) {
    const PomdpModel model = load_model(c.model_path);
    nlohmann::json runs = nlohmann::json::array();
    for (std::uint64_t seed : c.seeds) {
        const BRep b = construct(c.construct, model, c.m);
        const StabilityReport rep = certify_stability(b, 200, seed);
        nlohmann::json j = report_to_json(rep);
        j["seed"] = seed;
        j["construct"] = c.construct;
        j["m"] = c.m;
        j["validate_residual"] = validate_brep(b, model);
        j["diagnostics"] = b.diagnostics;
        j["provenance"] = b.provenance;
        write_json(dir / ("certificate-" + std::to_string(seed) + ".json"), j);
        runs.push_back(j);
    }
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& j : runs) {
        lo.push_back(j.at("lambda_lo").get<double>());
        hi.push_back(j.at("lambda_hi").get<double>());
    }
    return {{"lambda_lo_mean", mean(lo)},       {"lambda_lo_stderr", standard_error(lo)},
            {"lambda_hi_mean", mean(hi)},       {"lambda_hi_stderr", standard_error(hi)},
            {"exact", runs[0].at("exact")},     {"bounds", runs[0].at("bounds")}};
}

nlohmann::json run_learn(const ExperimentConfig& c, const fs::path& dir) {
    const ModelClass cls = load_class(c.class_path);
    const double beta = c.beta >= 0.0 ? c.beta : default_beta(cls.size());
    const double eta = c.eta >= 0.0 ? c.eta : default_eta(c.algorithm);
    std::vector<double> finals;
    std::vector<std::vector<double>> curves;
    int within = 0;
    for (std::uint64_t seed : c.seeds) {
        RunLog log;
        double final_value = 0.0;
        if (c.algorithm == "rfe2d") {
            RfResult r = rf_e2d(cls, c.T, c.gamma, eta, seed);
            final_value = r.estimation_error;
            within += r.estimation_error <= 0.1;
            log = std::move(r.log);
        } else {
            LearnResult r = c.algorithm == "omle" ? omle(cls, c.T, beta, seed)
                            : c.algorithm == "e2d" ? explorative_e2d(cls, c.T, c.gamma, eta, seed)
                                                   : mops(cls, c.T, c.gamma, eta, seed);
            final_value = r.output_suboptimality;
            log = std::move(r.log);
        }
        const fs::path sd = dir / ("seed-" + std::to_string(seed));
        fs::create_directories(sd);
        std::ostringstream csv;
        log.write_csv(csv);
        write_text(sd / "log.csv", csv.str());
        nlohmann::json s = log.to_json();
        s["config_hash"] = c.hash();
        write_json(sd / "summary.json", s);
        finals.push_back(final_value);
        std::vector<double> curve;
        for (const auto& rec : log.records)
            curve.push_back(c.algorithm == "rfe2d" ? rec.suboptimality : rec.running_mean);
        curves.push_back(std::move(curve));
    }
    std::ostringstream agg;
    agg << "iteration,mean,stderr\n";
    const std::size_t len = curves.front().size();
    for (std::size_t k = 0; k < len; ++k) {
        std::vector<double> col;
        for (const auto& cv : curves) col.push_back(cv[k]);
        agg << k + 1 << ',' << format_double(mean(col)) << ',' << format_double(standard_error(col)) << '\n';
    }
    write_text(dir / "curve.csv", agg.str());
    const std::string metric = c.algorithm == "rfe2d" ? "estimation_error" : "output_suboptimality";
    nlohmann::json out{{"metric", metric},
                       {"mean", mean(finals)},
                       {"stderr", standard_error(finals)},
                       {"seeds", c.seeds.size()},
                       {"beta", beta},
                       {"eta", eta}};
    if (c.algorithm == "rfe2d") out["within_0.1"] = within;
    return out;
}

nlohmann::json run_verify(const ExperimentConfig& c, const fs::path& dir) {
    std::ostringstream csv;
    csv << "seed,suite,instances,failures,worst_slack\n";
    std::vector<double> worst;
    int failures = 0;
    for (std::uint64_t seed : c.seeds) {
        std::vector<SuiteResult> results;
        if (c.suite == "brep") results.push_back(suite_brep());
        if (c.suite == "stability") {
            results.push_back(suite_stability(seed));
            results.push_back(suite_pi_norm(seed, c.instances > 0 ? c.instances : 200));
        }
        if (c.suite == "decomp") results.push_back(suite_decomposition(seed, c.instances > 0 ? c.instances : 100));
        if (c.suite == "hellinger") results.push_back(suite_hellinger(seed, c.instances > 0 ? c.instances : 100));
        if (c.suite == "eluder") {
            const int n = c.instances > 0 ? c.instances : 200;
            results.push_back(suite_eluder(seed, n));
            results.push_back(suite_elliptical(seed, n));
            results.push_back(suite_decoupling(seed, n));
            results.push_back(suite_spanner(seed, n));
        }
        nlohmann::json js = nlohmann::json::array();
        double w = std::numeric_limits<double>::infinity();
        for (const auto& r : results) {
            csv << seed << ',' << r.name << ',' << r.instances << ',' << r.failures << ','
                << format_double(r.worst_slack) << '\n';
            js.push_back(r.to_json());
            failures += r.failures;
            w = std::min(w, r.worst_slack);
        }
        worst.push_back(w);
        write_json(dir / ("suite-" + std::to_string(seed) + ".json"), js);
    }
    write_text(dir / "suite.csv", csv.str());
    return {{"suite", c.suite},
            {"passed", failures == 0},
            {"failures", failures},
            {"worst_slack", *std::min_element(worst.begin(), worst.end())},
            {"worst_slack_mean", mean(worst)},
            {"worst_slack_stderr", standard_error(worst)}};
}

nlohmann::json run_eluder_suite(const ExperimentConfig& c, const fs::path& dir) {
    const ModelClass cls = load_class(c.class_path);
    const double beta = c.beta >= 0.0 ? c.beta : default_beta(cls.size());
    std::ostringstream csv;
    csv << "seed,h,lhs,rhs,slack\n";
    std::vector<double> slacks;
    for (std::uint64_t seed : c.seeds) {
        const LearnResult r = omle(cls, c.T, beta, seed);
        double worst = std::numeric_limits<double>::infinity();
        for (int h = 1; h <= cls.truth().H; ++h) {
            const CheckResult cr = eluder_l2_check(eluder_from_omle(cls, r.log, h), 1.0);
            csv << seed << ',' << h << ',' << format_double(cr.lhs) << ',' << format_double(cr.rhs) << ','
                << format_double(cr.slack) << '\n';
            worst = std::min(worst, cr.slack);
        }
        slacks.push_back(worst);
    }
    write_text(dir / "eluder.csv", csv.str());
    return {{"worst_slack", *std::min_element(slacks.begin(), slacks.end())},
            {"worst_slack_mean", mean(slacks)},
            {"worst_slack_stderr", standard_error(slacks)},
            {"passed", *std::min_element(slacks.begin(), slacks.end()) >= -kSlackTol}};
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    config.validate();
    if (config.cap > 0) setenv("PSRLAB_CAP", std::to_string(config.cap).c_str(), 1);
    std::string tag = config.command;
    if (config.command == "learn") tag += "-" + config.algorithm;
    if (config.command == "verify") tag += "-" + config.suite;
    if (config.command == "certify") tag += "-" + config.construct;
    ExperimentOutcome out;
    out.directory = fs::path(config.out_dir) / (tag + "-" + config.hash());
    const fs::path staging = out.directory.string() + ".staging";
    fs::remove_all(staging);
    fs::create_directories(staging);
    try {
        if (config.command == "certify") out.summary = run_certify(config, staging);
        if (config.command == "learn") out.summary = run_learn(config, staging);
        if (config.command == "verify") out.summary = run_verify(config, staging);
        if (config.command == "eluder-suite") out.summary = run_eluder_suite(config, staging);
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }
    out.summary["status"] = "ok";
    out.summary["config_hash"] = config.hash();
    out.summary["seeds"] = config.seeds;
    write_json(staging / "summary.json", out.summary);
    write_json(staging / "manifest.json", {{"config", config.to_json()},
                                           {"config_hash", config.hash()},
                                           {"seeds", config.seeds},
                                           {"versions", versions()}});
    fs::remove_all(out.directory);
    fs::rename(staging, out.directory);
    if (out.summary.contains("passed") && !out.summary.at("passed").get<bool>()) out.exit_code = 1;
    return out;
}

}  // namespace psrlab
