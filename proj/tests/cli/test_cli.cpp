#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace ltforge::cli;
using nlohmann::json;

namespace {

struct Invocation {
    int code = 0;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "lt-forge");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    std::ostringstream out, err;
    Invocation r;
    r.code = main_entry(static_cast<int>(args.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

json invoke_json(const std::vector<std::string>& args) {
    auto r = invoke(args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return json::parse(r.out);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    auto p = std::filesystem::temp_directory_path() / ("ltforge_" + name);
    std::ofstream(p) << content;
    return p;
}

} // namespace

TEST_CASE("worked examples") {
    auto t = invoke_json({"tower", "--height", "1", "--level", "2", "--p", "2"});
    CHECK(t["rank"] == "4");
    CHECK(t["components"] == json::array({1, 1, 2}));

    auto z = invoke_json({"zeta", "--profile", R"({"0":1})", "--special-k", "2"});
    CHECK(z["value"] == "-1/12");

    auto l = invoke_json({"ledger", "--height", "2"});
    REQUIRE(l["ledger"]["rows"].size() == 2);
    CHECK(l["ledger"]["rows"][0]["s"] == 1);
    CHECK(l["ledger"]["rows"][0]["w"] == 0);
    CHECK(l["ledger"]["rows"][1]["s"] == 2);
    CHECK(l["ledger"]["rows"][1]["w"] == 0);
}

TEST_CASE("exit statuses") {
    CHECK(invoke({"selftest"}).code == kExitOk);
    CHECK(invoke({"selftest", "--inject-fault", "bernoulli"}).code == kExitInvariant);
    CHECK(invoke({"--guard", "0", "selftest"}).code == kExitGuard);
    CHECK(invoke({"selftest", "--guard", "0"}).code == kExitGuard);
    CHECK(invoke({"--max-degree", "0", "tower"}).code == kExitGuard);
    CHECK(invoke({"--guard", "10", "strata", "--n", "4", "--p", "3"}).code == kExitGuard);
    CHECK(invoke({"--max-degree", "8", "tower", "--height", "2", "--level", "2"}).code == kExitGuard);
    CHECK(invoke({"tower", "--p", "4"}).code == kExitDomain);
    CHECK(invoke({"tower", "--bogus", "1"}).code == kExitDomain);
    CHECK(invoke({"nonsense"}).code == kExitDomain);
    CHECK(invoke({"zeta", "--profile", R"({"1":1})"}).code == kExitDomain);
    CHECK(invoke({"zeta", "--profile", R"({"0":1,"2":1})", "--special-k", "1"}).code == kExitDomain);
    CHECK(invoke({"ledger", "--page", "[{\"s\":0,\"t\":1}]"}).code == kExitDomain);
    CHECK(invoke({"level", "--mode", "partial", "--domain", "<(1)>", "--p", "2", "--ring", "ZpN", "--m", "2"}).code ==
          kExitDomain);
    CHECK(invoke({"--help"}).code == kExitOk);

    auto err = invoke({"tower", "--p", "4"});
    auto j = json::parse(err.out);
    CHECK(j["error"]["kind"] == "domain");
    CHECK_FALSE(err.err.empty());
}

TEST_CASE("selftest injection does not leak into later runs") {
    CHECK(invoke({"selftest", "--inject-fault", "bernoulli"}).code == kExitInvariant);
    CHECK(invoke_json({"zeta", "--special-k", "2"})["value"] == "-1/12");
    CHECK(invoke({"selftest"}).code == kExitOk);
}

TEST_CASE("config files") {
    auto cfg = temp_file("tower.json", R"({"command":"tower","parameters":{"height":1,"level":2,"p":2},"seed":7})");
    auto a = invoke({"--config", cfg.string()});
    auto b = invoke({"tower", "--height", "1", "--level", "2", "--p", "2"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    // flags override config parameters
    auto c = invoke({"--config", cfg.string(), "tower", "--level", "3"});
    CHECK(json::parse(c.out)["rank"] == "8");

    auto conflict = invoke({"--config", cfg.string(), "zeta"});
    CHECK(conflict.code == kExitDomain);

    auto unknown = temp_file("unknown.json", R"({"command":"tower","colour":"red"})");
    CHECK(invoke({"--config", unknown.string()}).code == kExitDomain);
    auto bad_param = temp_file("badparam.json", R"({"command":"tower","parameters":{"hieght":1}})");
    CHECK(invoke({"--config", bad_param.string()}).code == kExitDomain);
    auto zero_guard = temp_file("zeroguard.json", R"({"command":"selftest","guards":{"enumeration":0}})");
    CHECK(invoke({"--config", zero_guard.string()}).code == kExitGuard);
    auto bad_guard = temp_file("badguard.json", R"({"command":"selftest","guards":{"colour":3}})");
    CHECK(invoke({"--config", bad_guard.string()}).code == kExitDomain);
    auto broken = temp_file("broken.json", "{not json");
    CHECK(invoke({"--config", broken.string()}).code == kExitDomain);
    CHECK(invoke({"--config", "/nonexistent/ltforge.json"}).code == kExitDomain);

    RunConfig rc = RunConfig::from_json(json::parse(R"({"command":"zeta","parameters":{"specialK":6}})"));
    auto r = run(rc);
    CHECK(r.exit_code == 0);
    CHECK(json::parse(r.output)["value"] == "-1/252");
}

TEST_CASE("determinism") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"selftest"},
             {"--seed", "99", "selftest"},
             {"level", "--p", "3", "--ring", "eps"},
             {"ledger", "--height", "4", "--text"}}) {
        auto a = invoke(args), b = invoke(args);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
    auto s1 = invoke_json({"--seed", "1", "selftest"});
    CHECK(s1["seed"] == 1);
    CHECK(s1["passed"] == true);
    // threads change the schedule, never the output
    auto one = invoke({"--threads", "1", "level", "--p", "2", "--n", "2", "--ring", "eps", "--K", "3"});
    auto four = invoke({"--threads", "4", "level", "--p", "2", "--n", "2", "--ring", "eps", "--K", "3"});
    CHECK(one.code == 0);
    CHECK(one.out == four.out);
}

TEST_CASE("every module operation is reachable from the CLI") {
    const std::vector<std::string> expected{
        "series_add", "series_mul", "series_compose", "monic_divides", "weierstrass_degree", "fgl_additive",
        "fgl_multiplicative", "fgl_from_log", "ptypical_universal", "honda_law", "universal_deformation",
        "a_series", "a_height", "formal_sum", "eval_level_map", "drinfeld_check", "degenerating_check",
        "partial_drinfeld_check", "enumerate_level_maps", "enumerate_drinfeld", "drinfeld_quotient_tower",
        "degen_ring_presentation", "ht1_cyclotomic_decomposition", "ht1_tower_map", "strata_level1",
        "gaussian_binomial", "ht2_level1_report", "ht1_h0_dimensions", "differential_target", "vanishing_window",
        "parity_collapse_check", "strong_convergence_check", "jl_filtration_ledger", "two_copy_page",
        "ht1_component_multiplicity", "bernoulli", "zeta_negative", "local_l_factor", "global_l", "special_value",
        "image_of_j_denominator", "predicted_homotopy_order", "run", "selftest"};
    REQUIRE(expected.size() == 44);

    const std::vector<std::vector<std::string>> sessions{
        {"fgl", "--law", "multiplicative", "--ring", "eps", "--K", "3", "--a", "3", "--b", "2", "--closed-form",
         "--x", "e", "--y", "e", "--height-check"},
        {"fgl", "--law", "additive", "--ring", "Fp", "--p", "3", "--closed-form"},
        {"fgl", "--law", "from-log", "--closed-form"},
        {"fgl", "--law", "ptypical", "--ring", "Q", "--height", "1", "--v", R"(["1"])"},
        {"fgl", "--law", "honda", "--p", "2", "--height", "2", "--height-check", "--m", "1"},
        {"fgl", "--law", "universal", "--p", "2", "--height", "2", "--K", "2", "--D", "5"},
        {"level", "--p", "2", "--at", "(1)"},
        {"level", "--p", "2", "--n", "2", "--mode", "degenerating", "--S", "empty"},
        {"level", "--p", "2", "--n", "2", "--mode", "partial", "--domain", "<(1,0)>"},
        {"tower", "--height", "1", "--level", "2"},
        {"tower", "--height", "2", "--level", "1", "--quotient"},
        {"strata", "--n", "2", "--p", "2"},
        {"ledger", "--height", "1", "--multiplicity", "2"},
        {"zeta", "--prime", "3", "--s", "2", "--special-k", "2", "--compare-oracle", "--bernoulli", "4",
         "--zeta-negative", "3", "--image-of-j", "4"},
        {"selftest"}};
    std::set<std::string> seen;
    for (auto args : sessions) {
        args.insert(args.begin(), "--trace");
        auto j = invoke_json(args);
        for (const auto& op : j["operations"]) seen.insert(op.get<std::string>());
    }
    for (const auto& op : expected) {
        CAPTURE(op);
        CHECK(seen.count(op) == 1);
    }
}

TEST_CASE("golden outputs") {
    const std::filesystem::path dir = LTFORGE_GOLDEN_DIR;
    const bool regenerate = std::getenv("LTFORGE_REGENERATE_GOLDEN") != nullptr;
    auto cases = json::parse(read_file(dir / "cases.json"));
    REQUIRE(cases.size() > 0);
    for (const auto& c : cases) {
        const std::string name = c["name"];
        CAPTURE(name);
        auto r = invoke(c["args"].get<std::vector<std::string>>());
        CHECK(r.code == 0);
        const auto path = dir / (name + ".out");
        if (regenerate) {
            std::ofstream(path, std::ios::binary) << r.out;
            continue;
        }
        REQUIRE_MESSAGE(std::filesystem::exists(path), "missing golden file");
        CHECK(r.out == read_file(path));
    }
}
