#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stickytail/report.hpp"

using namespace stickytail;
namespace fs = std::filesystem;

namespace {

const std::string kM0 = R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1]})";

ErrorCode code_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

std::string message_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

// Small end-to-end config: cheap main run and a tiny extremes run.
RunConfig tiny() {
    auto cfg = parse_config_text(kM0);
    cfg.sim.dt = 1e-2;
    cfg.sim.horizon = 2000;
    cfg.sim.burn_in = 10;
    cfg.sim.replications = 2;
    cfg.sim.seed = 7;
    cfg.theta_grid = {{-1, -1}, {-0.5, -1.5}};
    cfg.ev.blocks = 20;
    cfg.ev.block_size = 200;
    return cfg;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("stickytail_test_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("M0 config with defaults") {
    const auto cfg = parse_config_text(kM0);
    CHECK(cfg.model.mu == Vec2{-1, -1});
    CHECK(cfg.model.stick == Vec2{1, 1});
    CHECK(cfg.sim.dt == 1e-3);
    CHECK(cfg.sim.horizon == 1e4);
    CHECK(cfg.sim.burn_in == 1e2);
    CHECK(cfg.theta_grid.size() == 25);
    for (const auto& t : cfg.theta_grid) CHECK((t[0] < 0 && t[1] < 0));
    CHECK(cfg.directions.size() == 1);
    CHECK(cfg.output.format == "json");
}

TEST_CASE("strict parsing errors") {
    SUBCASE("missing u names the key") {
        const std::string t = R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]]})";
        CHECK(code_of(t) == ErrorCode::ParseError);
        CHECK(message_of(t).find("\"u\"") != std::string::npos);
    }
    SUBCASE("unknown key gives a pointer") {
        const std::string t = R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1],"sim":{"dtt":0.1}})";
        CHECK(code_of(t) == ErrorCode::ParseError);
        CHECK(message_of(t).find("/sim/dtt") != std::string::npos);
    }
    SUBCASE("syntax error gives line and column") {
        const std::string t = "{\"mu\":[-1,-1],\n \"sigma\": [[1,0],[0,1]]\n \"R\":1}";
        CHECK(code_of(t) == ErrorCode::ParseError);
        CHECK(message_of(t).find("line 3") != std::string::npos);
    }
    SUBCASE("wrong shapes") {
        CHECK(code_of(R"({"mu":[-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1]})") == ErrorCode::ParseError);
        CHECK(code_of(R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,"a"]})") ==
              ErrorCode::ParseError);
        CHECK(code_of(R"([1,2])") == ErrorCode::ParseError);
    }
    SUBCASE("rho = 1 is a validation error") {
        const std::string t = R"({"mu":[-1,-1],"sigma":[[1,1],[1,1]],"R":[[1,0],[0,1]],"u":[1,1]})";
        CHECK(code_of(t) == ErrorCode::ValidationError);
        CHECK(message_of(t).find("DegenerateCorrelation") != std::string::npos);
    }
    SUBCASE("directions and thetas") {
        CHECK(code_of(R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1],"directions":[[0,0]]})") ==
              ErrorCode::ValidationError);
        CHECK(code_of(R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1],"directions":[[-1,1]]})") ==
              ErrorCode::ValidationError);
        CHECK(code_of(R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1],"theta_grid":[[0,-1]]})") ==
              ErrorCode::ValidationError);
        CHECK(code_of(R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1],"output":{"format":"xml"}})") ==
              ErrorCode::ValidationError);
    }
    SUBCASE("missing file") {
        try {
            parse_config("/nonexistent/config.json");
            FAIL("expected IoError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IoError);
        }
    }
}

TEST_CASE("burn-in follows a short horizon unless given") {
    const auto cfg =
        parse_config_text(R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1],"sim":{"horizon":10}})");
    CHECK(cfg.sim.burn_in == doctest::Approx(0.1));
}

TEST_CASE("config round-trips through its json form") {
    auto cfg = tiny();
    cfg.directions = {{1, 0.5}, {2, 1}};
    cfg.tolerances.gumbel_ks = 0.07;
    const auto text = config_to_json(cfg).dump();
    const auto back = parse_config_text(text);
    CHECK(config_to_json(back).dump() == text);
}

TEST_CASE("analyze M0") {
    const auto rep = run_analyze(parse_config_text(kM0));
    const auto j = rep.to_json();
    CHECK(j["schema_version"] == 1);
    const auto& k = j["analytic"]["kernel"];
    CHECK(k["branch_points"]["x2"].get<double>() == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(k["candidates"]["x_star"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(k["candidates"]["x_tilde"] == "inf");
    for (const char* axis : {"axis1", "axis2"}) {
        CHECK(j["analytic"]["tails"][axis]["alpha"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(j["analytic"]["tails"][axis]["p"].get<double>() == 0.0);
    }
    CHECK(j["analytic"]["joint_tail"].contains("axis1"));
    CHECK(!j.contains("verdicts"));
    CHECK(j.dump() == run_analyze(parse_config_text(kM0)).to_json().dump());
}

TEST_CASE("non-substochastic reflection keeps marginals") {
    const auto cfg =
        parse_config_text(R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0.2],[0.2,1]],"u":[1,1]})");
    const auto j = run_analyze(cfg).to_json();
    CHECK(j["analytic"]["joint_tail"]["notice"] == "ReflectionNotSubstochastic");
    CHECK(j["analytic"]["tails"]["axis1"].contains("alpha"));
    CHECK(j["analytic"]["tails"]["axis2"].contains("alpha"));
}

TEST_CASE("verify and emit on a small run") {
    const auto cfg = tiny();
    const auto rep = run_verify(cfg);
    const auto j = rep.to_json();
    REQUIRE(j.contains("verdicts"));
    for (const auto& v : j["verdicts"]) CHECK(v["tolerance"].get<std::string>().rfind("tolerances.", 0) == 0);
    CHECK(j["simulated"]["main"]["tails"].size() == 3);
    CHECK(j["residuals"]["bar"].size() == 2);
    CHECK(rep.gumbel.has_value());
    CHECK(rep.occupation.has_value());

    // same seed, same bytes
    CHECK(run_verify(cfg).to_json().dump() == j.dump());

    const auto dir = scratch("emit");
    const auto files = emit(rep, "json", dir.string());
    CHECK(files.size() >= 5);
    CHECK(fs::exists(dir / "report.json"));
    for (const char* name : {"tails_axis1.csv", "tails_axis2.csv", "tails_direction_1_1.csv", "occupation.csv",
                             "gumbel.csv"})
        CHECK(fs::exists(dir / name));

    const auto rows = read_csv(dir / "tails_axis1.csv");
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == std::vector<std::string>{"t", "empirical_survival", "fitted_survival", "lower_ci", "upper_ci"});
    for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][0]) > std::stod(rows[i - 1][0]));
    CHECK(read_csv(dir / "occupation.csv")[0] == std::vector<std::string>{"x", "y", "mass"});

    std::ifstream f(dir / "report.json");
    const auto back = Json::parse(f);
    CHECK(back.dump() == j.dump());
    CHECK(config_to_json(parse_config_text(back["config"].dump())).dump() == back["config"].dump());

    const auto csv_dir = scratch("emit_csv");
    emit(rep, "csv", csv_dir.string());
    CHECK(fs::exists(csv_dir / "summary.csv"));
    CHECK(!fs::exists(csv_dir / "report.json"));
    fs::remove_all(dir);
    fs::remove_all(csv_dir);
}

TEST_CASE("short horizon fails the tail verdicts") {
    auto cfg = parse_config_text(
        R"({"mu":[-1,-1],"sigma":[[1,0],[0,1]],"R":[[1,0],[0,1]],"u":[1,1],"sim":{"horizon":10},"ev":{"enabled":false}})");
    const auto rep = run_verify(cfg);
    CHECK(!rep.passed());
    int tails = 0;
    for (const auto& v : rep.verdicts)
        if (v.name.rfind("tail.", 0) == 0) {
            ++tails;
            CHECK(!v.passed);
            CHECK(v.detail.find("InsufficientTailData") != std::string::npos);
        }
    CHECK(tails == 3);
}

TEST_CASE("emit reports I/O failures") {
    const auto file = scratch("blocker");
    std::ofstream(file) << "x";
    const auto rep = run_analyze(parse_config_text(kM0));
    try {
        emit(rep, "json", (file / "sub").string());
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
    fs::remove(file);
}
