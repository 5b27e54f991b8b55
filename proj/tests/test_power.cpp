#include <doctest.h>

#include <cmath>
#include <random>

#include "stacktherm/error.hpp"
#include "support.hpp"

using namespace stacktherm;

namespace {

BlockPowerModel model(std::string name, double s, double e, double f, double a = 0.5) {
    return BlockPowerModel{std::move(name), s, e, f, a};
}

RawStats stats(std::vector<std::string> names, std::vector<std::vector<double>> cols, double dt = 1e-3) {
    RawStats r;
    r.sampling_interval = dt;
    r.names = std::move(names);
    r.columns = std::move(cols);
    return r;
}

}  // namespace

TEST_CASE("block power is static plus activity times switching energy times clock") {
    const auto m = model("C_0", 0.5, 0.1e-9, 2e9);
    CHECK(block_power(m, 0.0) == 0.5);
    CHECK(block_power(m, 0.25) == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(block_power(model("x", 0.0, 3e-10, 1e9), 1.0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_THROWS_AS(block_power(m, 1.0001), Error);
    CHECK_THROWS_AS(block_power(m, -0.1), Error);
}

TEST_CASE("block power is monotone in activity") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const auto m = model("b", u(rng), u(rng) * 1e-9, 1e8 + u(rng) * 4e9);
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        CHECK(block_power(m, a) <= block_power(m, b));
    }
}

TEST_CASE("model domain checks") {
    CHECK_THROWS_AS(check_model(model("b", -1.0, 0.0, 1e9)), Error);
    CHECK_THROWS_AS(check_model(model("b", 0.0, -1e-9, 1e9)), Error);
    CHECK_THROWS_AS(check_model(model("b", 0.0, 0.0, 0.0)), Error);
    CHECK_THROWS_AS(check_model(model("b", 0.0, 0.0, 1e9, 1.5)), Error);
    CHECK_NOTHROW(check_model(model("b", 0.0, 0.0, 1e9, 1.0)));
}

TEST_CASE("mapping rules") {
    const std::vector<BlockPowerModel> models{model("C_0", 0, 1e-9, 1e9, 0.1), model("C_1", 0, 1e-9, 1e9, 0.1),
                                              model("L2", 0, 1e-9, 1e9, 0.3)};
    SUBCASE("identity leaves in-range data unchanged and is idempotent") {
        auto raw = stats({"a", "b"}, {{0.1, 0.7, 0.0}, {1.0, 0.25, 0.5}});
        MappingRules rules{{"a", "C_0", 1, 0}, {"b", "C_1", 1, 0}};
        auto act = apply_mapping(raw, rules, models);
        CHECK(*act.column("C_0") == raw.columns[0]);
        CHECK(*act.column("C_1") == raw.columns[1]);
        RawStats again = stats(act.names, act.columns);
        MappingRules self{{"C_0", "C_0", 1, 0}, {"C_1", "C_1", 1, 0}, {"L2", "L2", 1, 0}};
        CHECK(apply_mapping(again, self, models) == act);
    }
    SUBCASE("clamping") {
        auto act = apply_mapping(stats({"a"}, {{0.7, 0.2}}), {{"a", "C_0", 2, 0}, {"a", "C_1", 1, -0.5}}, models);
        CHECK((*act.column("C_0"))[0] == 1.0);
        CHECK((*act.column("C_0"))[1] == doctest::Approx(0.4));
        CHECK((*act.column("C_1"))[1] == 0.0);
    }
    SUBCASE("unmapped blocks use their default activity") {
        auto act = apply_mapping(stats({"a"}, {{0.7, 0.2}}), {{"a", "C_0", 1, 0}}, models);
        CHECK(*act.column("L2") == std::vector<double>{0.3, 0.3});
    }
    SUBCASE("skew survives a common scale") {
        auto act = apply_mapping(stats({"c0", "c1"}, {{0.1 * 5.87}, {0.1}}), {{"c0", "C_0", 1.5, 0}, {"c1", "C_1", 1.5, 0}},
                                 models);
        CHECK((*act.column("C_0"))[0] / (*act.column("C_1"))[0] == doctest::Approx(5.87));
    }
    SUBCASE("missing source names the rule") {
        try {
            apply_mapping(stats({"a"}, {{0.1}}), {{"nope", "C_0", 1, 0}}, models);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::MissingSource);
            CHECK(std::string(e.what()).find("nope -> C_0") != std::string::npos);
        }
    }
    SUBCASE("unknown target") {
        CHECK_THROWS_AS(apply_mapping(stats({"a"}, {{0.1}}), {{"a", "C_9", 1, 0}}, models), Error);
    }
}

TEST_CASE("trace power") {
    const std::vector<BlockPowerModel> models{model("C_0", 0.2, 1e-9, 2e9, 0.1), model("C_1", 0.3, 1e-9, 2e9, 0.1)};
    ActivityTrace act;
    act.sampling_interval = 1e-3;
    act.names = {"C_0", "C_1"};
    SUBCASE("zero activity gives static power") {
        act.columns = {{0, 0, 0}, {0, 0, 0}};
        auto p = trace_power(models, act, {"C_0", "C_1", "_fill_0"});
        CHECK(*p.column("C_0") == std::vector<double>{0.2, 0.2, 0.2});
        CHECK(*p.column("C_1") == std::vector<double>{0.3, 0.3, 0.3});
        CHECK(*p.column("_fill_0") == std::vector<double>{0, 0, 0});
    }
    SUBCASE("single interval equals block power") {
        act.columns = {{0.4}, {0.9}};
        auto p = trace_power(models, act, {"C_0", "C_1"});
        CHECK((*p.column("C_0"))[0] == block_power(models[0], 0.4));
    }
    SUBCASE("length mismatch") {
        act.columns = {{0.4, 0.1}, {0.9}};
        try {
            trace_power(models, act, {"C_0", "C_1"});
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::LengthMismatch);
        }
    }
    SUBCASE("blocks missing from the activity run at their default") {
        act.names = {"C_0"};
        act.columns = {{0.5}};
        auto p = trace_power(models, act, {"C_0", "C_1"});
        CHECK((*p.column("C_1"))[0] == block_power(models[1], 0.1));
    }
}

TEST_CASE("skewed synthetic workload keeps core 0 on top every interval") {
    std::vector<std::string> cores{"C_0", "C_1", "C_2", "C_3"};
    std::vector<BlockPowerModel> models;
    for (const auto& c : cores) models.push_back(model(c, 0.3, 1e-9, 2e9, 0.1));
    WorkloadSpec spec;
    spec.profile = WorkloadProfile::OneHot;
    spec.blocks = cores;
    spec.hot_block = "C_0";
    spec.base_activity = 0.15;
    spec.skew = 5.87;
    spec.intervals = 8;
    auto act = synthesize_workload(spec);
    CHECK((*act.column("C_0"))[3] == doctest::Approx(0.15 * 5.87));
    auto p = trace_power(models, act, cores);
    for (std::size_t t = 0; t < p.intervals(); ++t)
        for (std::size_t k = 1; k < 4; ++k) CHECK(p.columns[0][t] > p.columns[k][t]);
}

TEST_CASE("ramp and uniform profiles") {
    WorkloadSpec spec;
    spec.blocks = {"a", "b"};
    spec.base_activity = 0.2;
    spec.intervals = 5;
    auto u = synthesize_workload(spec);
    CHECK(*u.column("b") == std::vector<double>(5, 0.2));
    spec.profile = WorkloadProfile::Ramp;
    spec.peak_activity = 0.6;
    auto r = synthesize_workload(spec);
    CHECK(r.columns[0].front() == doctest::Approx(0.2));
    CHECK(r.columns[0].back() == doctest::Approx(0.6));
    for (std::size_t t = 1; t < 5; ++t) CHECK(r.columns[0][t] > r.columns[0][t - 1]);
}

TEST_CASE("trace energy") {
    PowerTrace p;
    p.sampling_interval = 2e-3;
    p.names = {"a", "b"};
    p.columns = {{1.0, 2.0}, {0.5, 0.5}};
    CHECK(trace_energy(p) == doctest::Approx((1.0 + 2.0 + 0.5 + 0.5) * 2e-3));
    auto doubled = p;
    doubled.sampling_interval *= 2;
    CHECK(trace_energy(doubled) == 2 * trace_energy(p));
    CHECK(mean_power(p) == std::vector<double>{1.5, 0.5});
}

TEST_CASE("memory bank power") {
    CHECK(memory_bank_power(4, 0.01, 1e-10, {0, 0, 0, 0}) == std::vector<double>(4, 0.01));
    auto uniform = memory_bank_power(32, 0.01, 2e-10, std::vector<double>(32, 1e8));
    for (double w : uniform) CHECK(w == uniform.front());
    std::vector<double> rates(32, 0.0);
    rates[5] = 1e9;
    auto hot = memory_bank_power(32, 0.01, 1e-12, rates);
    CHECK(hot[5] - hot[0] == doctest::Approx(1e-3));
    CHECK_THROWS_AS(memory_bank_power(2, -1.0, 0.0, {0, 0}), Error);
    CHECK_THROWS_AS(memory_bank_power(2, 0.0, 0.0, {0}), Error);
}

TEST_CASE("capacity knob scales static by r and energy by sqrt r by default") {
    std::vector<BlockPowerModel> models{model("L2", 0.2, 4e-10, 1e9), model("C_0", 0.3, 1e-9, 2e9)};
    CapacityKnob knob{"l2", {"L2"}};
    auto scaled = apply_capacity_scaling(models, knob, 2.0);
    CHECK(scaled[0].static_power == doctest::Approx(0.4));
    CHECK(scaled[0].switching_energy == doctest::Approx(4e-10 * std::sqrt(2.0)));
    CHECK(scaled[1] == models[1]);
    knob.static_exponent = 0.0;
    knob.energy_exponent = 1.0;
    auto custom = apply_capacity_scaling(models, knob, 0.5);
    CHECK(custom[0].static_power == doctest::Approx(0.2));
    CHECK(custom[0].switching_energy == doctest::Approx(2e-10));
    CHECK_THROWS_AS(apply_capacity_scaling(models, knob, 0.0), Error);
}

TEST_CASE("power text formats") {
    std::vector<BlockPowerModel> models{model("C_0", 0.3, 1.2e-9, 2e9, 0.2), model("B_0", 0.01, 2e-10, 5e8, 0.3)};
    CHECK(parse_power_models(emit_power_models(models)) == models);
    MappingRules rules{{"cpu0.busy", "C_0", 1.5, -0.1}};
    CHECK(parse_mapping_rules(emit_mapping_rules(rules)) == rules);

    PowerTrace p;
    p.sampling_interval = 1e-4;
    p.names = {"C_0", "B_0"};
    p.columns = {{1.25, 0.1}, {0.0, 3.5}};
    const std::string text = emit_trace(p);
    CHECK(parse_trace<PowerTag>(text) == p);
    CHECK(text.rfind("# interval_s 1e-04\n", 0) == 0);

    SUBCASE("activity outside [0,1] is rejected on read") {
        CHECK_THROWS_AS(parse_trace<ActivityTag>("# interval_s 1e-3\na\tb\n0.5\t1.2\n"), Error);
    }
    SUBCASE("ragged rows") {
        try {
            parse_trace<PowerTag>("# interval_s 1e-3\na\tb\n0.5\t1.2\n0.5\n");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.line() == 4);
        }
    }
    SUBCASE("missing interval") {
        CHECK_THROWS_AS(parse_trace<PowerTag>("a\tb\n0.5\t1.2\n"), Error);
    }
    SUBCASE("model lines are checked") {
        try {
            parse_power_models("C_0 0.1 1e-9 2e9 0.2\nC_1 0.1 1e-9 0 0.2\n");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Domain);
            CHECK(e.line() == 2);
        }
        CHECK_THROWS_AS(parse_power_models("C_0 0.1 1e-9 2e9 0.2\nC_0 0.1 1e-9 2e9 0.2\n"), Error);
    }
}
