#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ncps_cli.hpp"
#include "report_schema.hpp"

using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = ncps::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json parse_report(const Run& r) {
    const json j = json::parse(r.out);
    EXPECT_EQ(ncps::testing::report_problem(j), "") << r.out;
    return j;
}

const json* find_check(const json& report, const std::string& name) {
    for (const auto& c : report["checks"])
        if (c["name"] == name) return &c;
    return nullptr;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << contents;
    return p;
}

}  // namespace

TEST(CliVerify, MinusBranchPasses) {
    const auto r = run({"verify", "--theta", "0.5", "--eta", "0.5", "--branch", "minus"});
    EXPECT_EQ(r.code, 0);
    const auto j = parse_report(r);
    EXPECT_TRUE(j["overall"].get<bool>());
    for (const char* n : {"[X1,X2]", "[P1,P2]", "[X1,P1]", "[X2,P2]", "[X1,P2]", "[X2,P1]"}) {
        const json* c = find_check(j, n);
        ASSERT_NE(c, nullptr) << n;
        EXPECT_TRUE((*c)["pass"].get<bool>());
    }
    EXPECT_EQ(j["version"], ncps::cli::kVersion);
    EXPECT_EQ(j["config"]["theta"], 0.5);
    EXPECT_EQ(j["config"]["tol"], 1e-12);
}

TEST(CliVerify, DomainErrorExitsTwo) {
    const auto r = run({"verify", "--theta", "1.5", "--eta", "1.0"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("DomainError: theta*eta", 0), 0u) << r.err;
    EXPECT_TRUE(r.out.empty());
}

TEST(CliVerify, SimpleFamilyWrongDiagonalFails) {
    const auto r = run({"verify", "--family", "simple", "--theta", "0.5", "--eta", "0.5", "--expect-diag", "1.0"});
    EXPECT_EQ(r.code, 1);
    const auto j = parse_report(r);
    EXPECT_EQ((*find_check(j, "[X1,P1]"))["measured"], 1.0625);
    EXPECT_FALSE(j["overall"].get<bool>());
    // Default expectation for this family is h_eff.
    EXPECT_EQ(run({"verify", "--family", "simple", "--theta", "0.5", "--eta", "0.5"}).code, 0);
}

TEST(CliVerify, EpsilonFamilyAndLimit) {
    const auto r = run({"verify", "--family", "epsilon", "--theta", "0.5", "--eta", "0.5", "--limit"});
    EXPECT_EQ(r.code, 0) << r.out;
    const auto j = parse_report(r);
    EXPECT_NEAR(j["result"]["epsilon"].get<double>(), 0.965925826289068286749743199729, 1e-15);
    EXPECT_NE(find_check(j, "limit.minus.monotone"), nullptr);
}

TEST(CliVerify, MissingParametersExitTwo) {
    EXPECT_EQ(run({"verify", "--theta", "0.5"}).code, 2);
    EXPECT_EQ(run({"verify", "--theta", "0.5", "--eta", "x"}).code, 2);
    EXPECT_EQ(run({"verify", "--theta", "0.5", "--eta", "0.5", "--family", "other"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"verify", "--theta", "0.5", "--eta", "0.5", "--tol", "-1"}).code, 2);
}

TEST(CliVerify, BatchIsSeededByEnvironment) {
    ::setenv("NCPS_SEED", "7", 1);
    const auto a = run({"verify", "--batch", "200"});
    const auto b = run({"verify", "--batch", "200"});
    ::setenv("NCPS_SEED", "8", 1);
    const auto c = run({"verify", "--batch", "200"});
    ::unsetenv("NCPS_SEED");
    EXPECT_EQ(a.code, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    const auto j = parse_report(a);
    EXPECT_EQ(j["config"]["seed"], 7);
    EXPECT_EQ(j["checks"].size(), 4u);
}

TEST(CliRepr, TextJsonCsv) {
    const auto text = run({"repr", "--theta", "0.5", "--eta", "0.5"});
    EXPECT_EQ(text.code, 0);
    EXPECT_NE(text.out.find("0.9659258262890683"), std::string::npos) << text.out;

    const auto csv = run({"repr", "--theta", "0.5", "--eta", "0.5", "--format", "csv"});
    EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "form,x1,x2,p1,p2");

    const auto j = parse_report(run({"repr", "--family", "simple", "--theta", "0.4", "--eta", "0.2", "--format", "json"}));
    EXPECT_EQ(j["result"]["coefficients"]["X1"]["p2"], -0.2);
    EXPECT_TRUE(j["overall"].get<bool>());
}

TEST(CliCom, SharedConditions) {
    const auto r = run({"com", "--masses", "1,2", "--gamma", "0.3", "--alpha", "0.2"});
    EXPECT_EQ(r.code, 0);
    const auto j = parse_report(r);
    EXPECT_NEAR(j["result"]["theta_tilde"].get<double>(), 0.1, 1e-16);
    EXPECT_NEAR(j["result"]["eta_tilde"].get<double>(), 0.6, 2e-16);
    EXPECT_EQ(j["result"]["total_mass"], 3.0);
    EXPECT_TRUE(j["result"]["routes_equal"].get<bool>());
}

TEST(CliCom, ViolatedConditionsReportDistances) {
    const auto r = run({"com", "--masses", "1,2", "--thetas", "0.3,0.3", "--etas", "0.2,0.2"});
    EXPECT_EQ(r.code, 0);
    const auto j = parse_report(r);
    EXPECT_FALSE(j["result"]["routes_equal"].get<bool>());
    EXPECT_GT(j["result"]["max_distance"].get<double>(), 1e-6);
    EXPECT_TRUE(j["result"]["shared_conditions"].is_null());
    for (const char* f : {"X1", "X2", "P1", "P2"}) EXPECT_GT(j["result"]["distances"][f].get<double>(), 0.0);
}

TEST(CliCom, InvalidInput) {
    EXPECT_EQ(run({"com", "--masses", "", "--gamma", "0.3", "--alpha", "0.2"}).code, 2);
    EXPECT_EQ(run({"com", "--gamma", "0.3", "--alpha", "0.2"}).code, 2);
    EXPECT_EQ(run({"com", "--masses", "1,2"}).code, 2);
    EXPECT_EQ(run({"com", "--masses", "1,-2", "--gamma", "0.3", "--alpha", "0.2"}).code, 2);
    EXPECT_EQ(run({"com", "--masses", "1,2", "--thetas", "0.3", "--etas", "0.2,0.2"}).code, 2);
}

TEST(CliSimulate, FreeParticleCsv) {
    const auto r = run({"simulate", "--potential", "free", "--p1", "1", "--t-end", "1", "--dt", "0.1"});
    EXPECT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,x1,x2,p1,p2,X1,X2,P1,P2");
    std::vector<double> x1;
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string t, x;
        std::getline(cells, t, ',');
        std::getline(cells, x, ',');
        x1.push_back(std::stod(x));
    }
    ASSERT_EQ(x1.size(), 11u);
    for (std::size_t k = 1; k < x1.size(); ++k) EXPECT_GT(x1[k], x1[k - 1]);
}

TEST(CliSimulate, WepUnderConditions) {
    const auto r = run({"simulate", "--wep", "--gamma", "0.01", "--alpha", "0.01", "--potential", "gravity",
                        "--t-end", "10", "--dt", "0.01"});
    EXPECT_EQ(r.code, 0);
    const auto j = parse_report(r);
    EXPECT_LE(j["result"]["deviation_max"].get<double>(), 1e-9);
    EXPECT_TRUE(j["result"]["conditions_used"].get<bool>());
    EXPECT_EQ(j["result"]["masses"], json::array({1.0, 2.0}));
    EXPECT_TRUE(j["result"]["by_family"].contains("simple"));
    EXPECT_TRUE(j["result"]["by_family"].contains("branch"));

    const auto fixed = parse_report(run({"simulate", "--wep", "--theta", "0.01", "--eta", "0.01", "--potential",
                                         "gravity", "--t-end", "10", "--dt", "0.01"}));
    EXPECT_GE(fixed["result"]["deviation_max"].get<double>(), 1e-3);
    EXPECT_FALSE(fixed["result"]["conditions_used"].get<bool>());
}

TEST(CliSimulate, InvalidStepAndSingularMap) {
    EXPECT_EQ(run({"simulate", "--dt", "0"}).code, 2);
    EXPECT_EQ(run({"simulate", "--dt", "-0.5"}).code, 2);
    EXPECT_EQ(run({"simulate", "--t-end", "-1"}).code, 2);
    const auto sing = run({"simulate", "--wep", "--theta", "2", "--eta", "2", "--family", "simple"});
    EXPECT_EQ(sing.code, 1);
    EXPECT_EQ(sing.err.rfind("SingularMapError:", 0), 0u);
}

TEST(CliConfig, FileValuesAndFlagOverride) {
    const auto cfg = temp_file("ncps_cli_cfg.json",
                               R"({"theta": 0.5, "eta": 0.5, "family": "simple", "expect_diag": 1.0})");
    const auto base = run({"verify", "--config", cfg.string()});
    EXPECT_EQ(base.code, 1);
    EXPECT_EQ(parse_report(base)["config"]["family"], "simple");
    const auto over = run({"verify", "--config", cfg.string(), "--expect-diag", "1.0625"});
    EXPECT_EQ(over.code, 0);
    EXPECT_EQ(parse_report(over)["config"]["expect_diag"], 1.0625);

    const auto lists = temp_file("ncps_cli_cfg_com.json", R"({"masses": [1, 2], "gamma": 0.3, "alpha": 0.2})");
    EXPECT_EQ(run({"com", "--config", lists.string()}).code, 0);

    EXPECT_EQ(run({"verify", "--config", temp_file("ncps_bad.json", "{\"bogus\": 1}").string()}).code, 2);
    EXPECT_EQ(run({"verify", "--config", temp_file("ncps_bad2.json", "[1, 2]").string()}).code, 2);
    EXPECT_EQ(run({"verify", "--config", temp_file("ncps_bad3.json", "{oops").string()}).code, 2);
    EXPECT_EQ(run({"verify", "--config", "/nonexistent/ncps.json"}).code, 2);
}

TEST(CliReport, RoundTripsByteIdentically) {
    const std::vector<std::vector<std::string>> invocations{
        {"verify", "--theta", "0.5", "--eta", "0.5", "--limit"},
        {"verify", "--family", "simple", "--theta", "0.5", "--eta", "0.5", "--expect-diag", "1.0"},
        {"verify", "--batch", "50"},
        {"repr", "--theta", "0.3", "--eta", "-0.7", "--format", "json"},
        {"com", "--masses", "1,2,3.5", "--gamma", "0.3", "--alpha", "0.2"},
        {"com", "--masses", "1,2", "--thetas", "0.3,0.3", "--etas", "0.2,0.2", "--family", "simple"},
        {"simulate", "--format", "json", "--potential", "harmonic", "--theta", "0.2", "--eta", "0.1"},
        {"simulate", "--wep", "--gamma", "0.01", "--alpha", "0.01", "--potential", "gravity"}};
    for (const auto& args : invocations) {
        const auto r = run(args);
        ASSERT_FALSE(r.out.empty()) << args[0] << " " << r.err;
        const json j = json::parse(r.out);
        EXPECT_EQ(ncps::testing::report_problem(j), "") << args[0];
        EXPECT_EQ(j.dump(2) + "\n", r.out) << args[0];
    }
}

TEST(CliReport, OutputFileAndCsvChecks) {
    const auto path = std::filesystem::temp_directory_path() / "ncps_cli_out.json";
    std::filesystem::remove(path);
    const auto r = run({"verify", "--theta", "0.5", "--eta", "0.5", "--output", path.string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream f(path);
    const json j = json::parse(f);
    EXPECT_EQ(ncps::testing::report_problem(j), "");

    const auto csv = run({"verify", "--theta", "0.5", "--eta", "0.5", "--format", "csv"});
    EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "name,expected,measured,tol,pass");
}

TEST(CliReport, SchemaValidatorRejectsBrokenReports) {
    json good = json::parse(run({"verify", "--theta", "0.5", "--eta", "0.5"}).out);
    EXPECT_EQ(ncps::testing::report_problem(good), "");
    json unsorted = good;
    std::swap(unsorted["checks"][0], unsorted["checks"][1]);
    EXPECT_NE(ncps::testing::report_problem(unsorted), "");
    json lying = good;
    lying["overall"] = false;
    EXPECT_NE(ncps::testing::report_problem(lying), "");
    json missing = good;
    missing.erase("config");
    EXPECT_NE(ncps::testing::report_problem(missing), "");
}
