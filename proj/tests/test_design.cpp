#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"
#include "support.hpp"

using namespace stacktherm;
namespace fs = std::filesystem;

namespace {

DesignDocument baseline(long n) {
    auto doc = load_manifest(testing::baseline_manifest());
    doc.rows = doc.cols = n;
    return doc;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= a.size();
    mb /= b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

fs::path scratch_copy(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("stacktherm_design_" + tag);
    fs::remove_all(dir);
    fs::copy(testing::scenario_dir() / "baseline", dir);
    return dir;
}

}  // namespace

TEST_CASE("manifest loading") {
    auto doc = load_manifest(testing::baseline_manifest());
    CHECK(doc.name == "baseline");
    CHECK(doc.rows == 64);
    CHECK(doc.files.count("cores.flp") == 1);
    CHECK(doc.files.count("banks_lo.flp") == 1);
    REQUIRE(doc.workloads.size() == 1);
    CHECK(doc.workloads[0].kind == WorkloadKind::Stats);
    CHECK_FALSE(doc.sweep.empty());
    CHECK_FALSE(doc.transient);
    CHECK(validate_design(doc).empty());
}

TEST_CASE("design documents survive JSON") {
    auto doc = load_manifest(testing::baseline_manifest());
    doc.transient = TransientSettings{0.01, 1e-4};
    CHECK(design_from_json(to_json(doc)) == doc);
    CHECK(design_from_json(nlohmann::json::parse(to_json(doc).dump())) == doc);
    CHECK_THROWS_AS(design_from_json(nlohmann::json::parse("{\"name\": 3}")), Error);
}

TEST_CASE("validation reports problems by file") {
    auto doc = load_manifest(testing::baseline_manifest());
    SUBCASE("bad resolution") {
        doc.rows = 0;
        CHECK_FALSE(validate_design(doc).empty());
    }
    SUBCASE("missing floorplan") {
        doc.files.erase("banks_hi.flp");
        auto v = validate_design(doc);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("banks_hi.flp") != std::string::npos);
    }
    SUBCASE("overlapping blocks") {
        doc.files["cores.flp"] += "X\t0.001\t0.001\t0\t0\n";
        auto v = validate_design(doc);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("cores.flp") != std::string::npos);
    }
    SUBCASE("unknown mapping target") {
        doc.mapping_rules += "cpu9.busy -> C_9 1\n";
        CHECK_FALSE(validate_design(doc).empty());
    }
}

TEST_CASE("malformed floorplan names its file and line") {
    const fs::path dir = scratch_copy("malformed");
    {
        std::ofstream out(dir / "cores.flp", std::ios::app);
        out << "C_4\t0.004\tabc\t0\t0.002\n";
    }
    try {
        run_design(load_manifest((dir / "design.txt").string()));
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string m = e.what();
        CHECK(m.find("cores.flp") != std::string::npos);
        CHECK(m.find("line 8") != std::string::npos);
    }
#ifdef STACKTHERM_CLI
    const std::string cmd = std::string("\"") + STACKTHERM_CLI + "\" run \"" + (dir / "design.txt").string() + "\" -o \"" +
                            (dir / "out").string() + "\" > \"" + (dir / "log").string() + "\" 2>&1";
    CHECK(std::system(cmd.c_str()) != 0);
    const std::string log = text::read_file((dir / "log").string());
    CHECK(log.find("cores.flp") != std::string::npos);
    CHECK(log.find("line 8") != std::string::npos);
#endif
    fs::remove_all(dir);
}

TEST_CASE("manifest errors carry the line") {
    const fs::path dir = scratch_copy("manifest");
    {
        std::ofstream out(dir / "design.txt", std::ios::app);
        out << "colour blue\n";
    }
    try {
        load_manifest((dir / "design.txt").string());
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 8") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("a baseline run") {
    auto a = run_design(baseline(32));
    CHECK(a.heatmaps.size() == 3);
    CHECK(a.coolant.empty());
    CHECK(a.transient.empty());
    CHECK(a.result.balance.relative_error() <= 1e-3);
    const auto* hot = a.result.summary.hottest_block();
    REQUIRE(hot);
    CHECK(hot->block == "C_0");
    CHECK(a.heatmaps.at(0) == emit_heatmap(a.result.field, 0));
    CHECK_THROWS_AS(run_design(baseline(32), "nope"), Error);
}

TEST_CASE("transient request adds a time series") {
    auto doc = baseline(16);
    doc.transient = TransientSettings{2e-3, 1e-4};
    auto a = run_design(doc);
    auto lines = text::tokenize(a.transient);
    REQUIRE(lines.size() == 20);
    const double last = text::parse_double(lines.back().fields[1], "t", 0);
    CHECK(last < a.result.summary.stack_max);
    CHECK(last > 318.15);
}

TEST_CASE("refining the grid converges") {
    const double t32 = run_design(baseline(32)).result.summary.stack_max;
    const double t64 = run_design(baseline(64)).result.summary.stack_max;
    const double t128 = run_design(baseline(128)).result.summary.stack_max;
    MESSAGE("stack max 32/64/128: " << text::format_sig(t32, 10) << " " << text::format_sig(t64, 10) << " "
                                     << text::format_sig(t128, 10));
    CHECK(std::abs(t128 - t64) < std::abs(t64 - t32));
}

TEST_CASE("adjacent layers correlate more than distant ones") {
    auto a = run_design(baseline(32));
    const auto& L = a.result.field.layers;
    const double near = pearson(L[0], L[1]);
    const double far = pearson(L[0], L[2]);
    CHECK(near > far);
    CHECK(layer_correlation(a.result.field, 0, 1) == doctest::Approx(near).epsilon(1e-9));
    CHECK(layer_correlation(a.result.field, 0, 2) == doctest::Approx(far).epsilon(1e-9));
}
