#include "doctest.h"

#include "selfimp/harness.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace selfimp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("selfimp_h_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

std::vector<json> lines(const fs::path& p) {
    std::vector<json> out;
    std::ifstream f(p);
    for (std::string l; std::getline(f, l);) out.push_back(json::parse(l));
    return out;
}

harness::EnvLookup env_of(const std::map<std::string, std::string>& m) {
    return [m](const char* k) -> const char* {
        auto it = m.find(k);
        return it == m.end() ? nullptr : it->second.c_str();
    };
}

harness::RunConfig small_sort(const fs::path& out) {
    auto c = harness::default_config("sort");
    c.model.sort.family = "mixed";
    c.model.sort.n = 24;
    c.instances = 40;
    c.out = out.string();
    c.knobs["sort_trie_cap"].desk_value = 400;
    return c;
}

}  // namespace

TEST_SUITE("harness") {
    TEST_CASE("config file parsing") {
        json j = {{"mode", "dt"},
                  {"seed", 11},
                  {"instances", 5},
                  {"exec", "serial"},
                  {"model", {{"family", "poly"}, {"n", 12}}},
                  {"knobs", {{"c_net", {{"paper_value", nullptr}, {"desk_value", 3}}}}}};
        auto c = harness::config_from_json(j);
        CHECK(c.mode == "dt");
        CHECK(c.model.mode == "dt");
        CHECK(c.model.dt.family == "poly");
        CHECK(c.model.dt.n == 12);
        CHECK(c.model.seed == 11);
        CHECK(c.exec == Exec::Serial);
        CHECK(c.knob("c_net") == 3);
        CHECK(c.knob("d_test") == 4);
        CHECK(harness::dt_config(c).net.c_net == 3);
        CHECK_NOTHROW(harness::validate(c));

        // knob entries need both values
        json half = {{"knobs", {{"c_net", {{"desk_value", 3}}}}}};
        CHECK_THROWS_AS(harness::config_from_json(half), InvalidArgument);
        json unknown = {{"knobs", {{"warp", {{"paper_value", 1}, {"desk_value", 1}}}}}};
        CHECK_THROWS_AS(harness::config_from_json(unknown), InvalidArgument);
        CHECK_THROWS_AS(harness::config_from_json(json{{"mode", "knn"}}), InvalidArgument);
        CHECK_THROWS_AS(harness::config_from_json(json{{"exec", "gpu"}}), InvalidArgument);
        CHECK_THROWS_AS(harness::config_from_json(json{{"seed", "x"}}), InvalidArgument);
        CHECK_THROWS_AS(harness::load_config("/nonexistent/cfg.json"), InvalidArgument);

        // echo round trip
        auto back = harness::config_from_json(harness::to_json(c));
        CHECK(harness::to_json(back) == harness::to_json(c));
    }

    TEST_CASE("validation names the field") {
        auto c = harness::default_config("sort");
        c.knobs["d_test"].desk_value = 40;
        try {
            harness::validate(c);
            FAIL("accepted d_test 40");
        } catch (const InvalidArgument& e) {
            CHECK(std::string(e.what()).find("d_test") != std::string::npos);
        }
        c = harness::default_config("sort");
        c.knobs["ell"].desk_value = 0;  // desk formula
        CHECK_NOTHROW(harness::validate(c));
        c.knobs["rank_tol"].desk_value = 0;
        CHECK_THROWS_AS(harness::validate(c), InvalidArgument);
        c = harness::default_config("sort");
        c.model.sort.n = 0;
        CHECK_THROWS_AS(harness::validate(c), InvalidArgument);
        c = harness::default_config("dt");
        c.model.dt.const_fraction = 1.5;
        CHECK_THROWS_AS(harness::validate(c), InvalidArgument);
        CHECK_THROWS_AS(harness::default_config("knn"), InvalidArgument);
    }

    TEST_CASE("environment overrides") {
        auto c = harness::default_config("sort");
        harness::apply_env(c, env_of({{"SELFIMP_MODE", "dt"},
                                      {"SELFIMP_SEED", "42"},
                                      {"SELFIMP_OUT", "/tmp/x"},
                                      {"SELFIMP_INSTANCES", "9"},
                                      {"SELFIMP_KNOB_DT_TRIE_CAP", "77"}}));
        CHECK(c.mode == "dt");
        CHECK(c.model.mode == "dt");
        CHECK(c.seed == 42);
        CHECK(c.model.seed == 42);
        CHECK(c.out == "/tmp/x");
        CHECK(c.instances == 9);
        CHECK(harness::dt_config(c).trie_cap == 77);
        CHECK_THROWS_AS(harness::apply_env(c, env_of({{"SELFIMP_SEED", "-3"}})), InvalidArgument);
        CHECK_THROWS_AS(harness::apply_env(c, env_of({{"SELFIMP_SEED", "12ab"}})), InvalidArgument);
        CHECK_THROWS_AS(harness::apply_env(c, env_of({{"SELFIMP_KNOB_C_NET", "many"}})), InvalidArgument);
        CHECK_THROWS_AS(harness::apply_env(c, env_of({{"SELFIMP_MODE", "knn"}})), InvalidArgument);
    }

    TEST_CASE("streams are distinct") {
        std::set<std::uint64_t> s;
        for (auto st : {harness::Stream::Model, harness::Stream::Train, harness::Stream::Instances, harness::Stream::Bench})
            for (std::uint64_t seed : {0, 1, 2}) s.insert(harness::stream_seed(seed, st));
        CHECK(s.size() == 12);
    }

    TEST_CASE("gen and bench are deterministic") {
        std::ostringstream log;
        auto a = scratch("det_a"), b = scratch("det_b");
        auto ca = small_sort(a), cb = small_sort(b);
        ca.csv = true;
        cb.csv = true;
        for (auto* c : {&ca, &cb}) {
            REQUIRE(harness::cmd_gen(*c, {}, log) == 0);
            REQUIRE(harness::cmd_train(*c, {}, log) == 0);
            REQUIRE(harness::cmd_bench(*c, {}, log) == 0);
        }
        CHECK(slurp(a / "instances.bin") == slurp(b / "instances.bin"));
        CHECK(slurp(a / "instances.csv") == slurp(b / "instances.csv"));
        CHECK(slurp(a / "state" / "tries.bin") == slurp(b / "state" / "tries.bin"));
        // header echoes the out path, which differs; everything after it is identical
        auto la = lines(a / "bench.jsonl"), lb = lines(b / "bench.jsonl");
        REQUIRE(la.size() == 1 + 40 + 1);
        CHECK(la[0]["config"]["seed"] == 1);
        CHECK(la[0]["build"] == build_id());
        for (std::size_t i = 1; i < la.size(); ++i) CHECK(la[i] == lb[i]);
        const auto& s = la.back();
        CHECK(s["stage"] == "bench");
        for (auto key : {"comparisons", "fallbacks", "entropy_bits", "ratio"}) CHECK(s.contains(key));
        CHECK(s["correct"] == true);
        CHECK(fs::exists(a / "bench.jsonl.csv"));

        // a different seed moves the instances
        auto c2 = small_sort(scratch("det_c"));
        c2.seed = c2.model.seed = 2;
        REQUIRE(harness::cmd_gen(c2, {}, log) == 0);
        CHECK(slurp(fs::path(c2.out) / "instances.bin") != slurp(a / "instances.bin"));
    }

    TEST_CASE("operate checks against the oracle") {
        std::ostringstream log;
        auto d = scratch("op");
        auto c = small_sort(d);
        harness::GenArgs g;
        g.count = 15;
        REQUIRE(harness::cmd_gen(c, g, log) == 0);
        REQUIRE(harness::cmd_train(c, {}, log) == 0);
        harness::OperateArgs o;
        o.check = true;
        CHECK(harness::cmd_operate(c, o, log) == 0);
        auto recs = lines(d / "operate.jsonl");
        REQUIRE(recs.size() == 16);
        for (std::size_t i = 1; i < recs.size(); ++i) CHECK(recs[i]["check"] == true);
        std::ifstream orders(d / "orders.csv");
        std::size_t rows = 0;
        for (std::string l; std::getline(orders, l);) ++rows;
        CHECK(rows == 15);

        // the wrong mode for the state is a config error
        auto dt = c;
        harness::set_mode(dt, "dt");
        CHECK_THROWS_AS(harness::cmd_operate(dt, o, log), InvalidArgument);
    }

    TEST_CASE("starved instance file reports the stage") {
        std::ostringstream log;
        auto d = scratch("starve");
        auto c = small_sort(d);
        harness::GenArgs g;
        g.count = 5;
        REQUIRE(harness::cmd_gen(c, g, log) == 0);
        harness::TrainArgs t;
        t.in = (d / "instances.bin").string();
        try {
            harness::cmd_train(c, t, log);
            FAIL("trained on 5 instances");
        } catch (const std::exception& e) {
            std::ostringstream err;
            CHECK(harness::exit_code_for(e, err) == 3);
            CHECK(err.str().find("'partition'") != std::string::npos);
        }
        std::ostringstream err;
        CHECK(harness::exit_code_for(InvalidArgument("x"), err) == 2);
        CHECK(harness::exit_code_for(FormatError("x"), err) == 2);
        CHECK(harness::exit_code_for(std::runtime_error("x"), err) == 4);
    }

    TEST_CASE("constant-only dt model trains empty tries") {
        std::ostringstream log;
        auto d = scratch("dtconst");
        auto c = harness::default_config("dt");
        c.model.dt.family = "mixed";
        c.model.dt.n = 10;
        c.model.dt.const_fraction = 1.0;
        c.instances = 8;
        c.out = d.string();
        REQUIRE(harness::cmd_gen(c, {}, log) == 0);
        REQUIRE(harness::cmd_train(c, {}, log) == 0);
        auto st = io::load_dt_state((d / "state").string());
        CHECK(st.partition.groups.empty());
        CHECK(st.partition.g0.size() == 10);
        harness::OperateArgs o;
        o.check = true;
        o.off = true;
        CHECK(harness::cmd_operate(c, o, log) == 0);
        CHECK(fs::exists(d / "mesh_0.off"));
        REQUIRE(harness::cmd_bench(c, {}, log) == 0);
        auto s = lines(d / "bench.jsonl").back();
        // deterministic input: zero entropy, zero novel comparisons
        CHECK(s["entropy_bits"] == 0.0);
        CHECK(s["comparisons"] == 0.0);
        CHECK(s["correct"] == true);
    }

    TEST_CASE("verify writes one record per criterion") {
        std::ostringstream log;
        auto d = scratch("verify");
        auto c = harness::default_config("sort");
        c.out = d.string();
        harness::VerifyArgs v;
        v.only = {8, 9};
        CHECK(harness::cmd_verify(c, v, log) == 0);
        auto recs = lines(d / "verify.jsonl");
        REQUIRE(recs.size() == 3);
        CHECK(recs[1]["criterion"] == 8);
        CHECK(recs[2]["pass"] == true);
        CHECK(!recs[2].contains("seconds"));
        CHECK(log.str().find("PASS  [ 8]") != std::string::npos);
    }
}
