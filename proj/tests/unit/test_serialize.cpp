#include "doctest.h"

#include "selfimp/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace selfimp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("selfimp_ser_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
}

}  // namespace

TEST_SUITE("serialize") {
    TEST_CASE("model spec round trip and defaults") {
        io::ModelSpec s;
        s.mode = "dt";
        s.dt.family = "mixed";
        s.dt.n = 33;
        s.dt.const_fraction = 0.25;
        s.seed = 77;
        auto back = io::model_spec_from_json(io::to_json(s));
        CHECK(back.mode == "dt");
        CHECK(back.dt.family == "mixed");
        CHECK(back.dt.n == 33);
        CHECK(back.dt.const_fraction == 0.25);
        CHECK(back.seed == 77);
        auto d = io::model_spec_from_json(nlohmann::json{{"n", 9}});
        CHECK(d.mode == "sort");
        CHECK(d.sort.n == 9);
        CHECK_THROWS_AS(io::model_spec_from_json(nlohmann::json{{"mode", "knn"}}), FormatError);
        CHECK_THROWS_AS(io::model_spec_from_json(nlohmann::json{{"n", "many"}}), FormatError);
    }

    TEST_CASE("instance files, binary and csv") {
        auto dir = scratch("inst");
        std::vector<model::SortInstance> s{{{0.1, -2.5, 1e300}, 0}, {{3, 4, 5}, 1}};
        io::write_sort_instances((dir / "s.bin").string(), s);
        auto sb = io::read_sort_instances((dir / "s.bin").string());
        REQUIRE(sb.size() == 2);
        CHECK(sb[0].x == s[0].x);
        CHECK(sb[1].draw == 1);
        io::write_sort_csv((dir / "s.csv").string(), s);
        CHECK(io::read_sort_csv((dir / "s.csv").string())[0].x == s[0].x);

        std::vector<model::DtInstance> d{{{{0.1, 0.2}, {0.3, 1.0 / 3}}, 0}};
        io::write_dt_instances((dir / "d.bin").string(), d);
        CHECK(io::read_dt_instances((dir / "d.bin").string())[0].p == d[0].p);
        io::write_dt_csv((dir / "d.csv").string(), d);
        CHECK(io::read_dt_csv((dir / "d.csv").string())[0].p == d[0].p);

        // A sort file is not a dt file.
        CHECK_THROWS_AS(io::read_dt_instances((dir / "s.bin").string()), FormatError);
        auto bytes = slurp(dir / "s.bin");
        spit(dir / "t.bin", bytes.substr(0, bytes.size() - 3));
        CHECK_THROWS_AS(io::read_sort_instances((dir / "t.bin").string()), FormatError);
        spit(dir / "bad.csv", "1,2\n3\n");
        CHECK_THROWS_AS(io::read_sort_csv((dir / "bad.csv").string()), FormatError);
        spit(dir / "bad2.csv", "1,x\n");
        CHECK_THROWS_AS(io::read_sort_csv((dir / "bad2.csv").string()), FormatError);
        CHECK_THROWS_AS(io::read_sort_instances((dir / "missing.bin").string()), Error);
    }

    TEST_CASE("label trie and codes") {
        trie::IntervalTrie t(3);
        using C = std::vector<std::uint32_t>;
        for (const C& c : {C{2, 0, 1}, C{2, 0, 1}, C{2, 1, 0}, C{0, 0, 0}}) t.labels().insert(c);
        t.freeze();
        std::stringstream ss;
        io::write_label_trie(ss, t.labels());
        io::write_code(ss, {5, 6, 7});
        auto back = io::read_label_trie(ss);
        CHECK(io::read_code(ss) == encodings::Code{5, 6, 7});
        CHECK(back.length() == 3);
        CHECK(back.total() == 4);
        CHECK(back.leaf_count() == 3);
        REQUIRE(back.nodes().size() == t.labels().nodes().size());
        std::stringstream again;
        io::write_label_trie(again, back);
        std::stringstream first;
        io::write_label_trie(first, t.labels());
        CHECK(again.str() == first.str());

        std::stringstream bad("SIMPTRAX\1\0\0\0");
        CHECK_THROWS_AS(io::read_label_trie(bad), FormatError);
    }

    TEST_CASE("mesh and split tree") {
        Rng rng(4);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<Point> pts(30);
        for (auto& p : pts) p = {u(rng), u(rng)};
        auto m = geom::delaunay(pts);
        std::stringstream ss;
        io::write_mesh(ss, m);
        auto back = io::read_mesh(ss);
        CHECK(back.pts == m.pts);
        CHECK(back.tris == m.tris);
        CHECK(back.adj == m.adj);
        CHECK(back.boundary == m.boundary);

        auto bytes = ss.str();
        std::stringstream cut(bytes.substr(0, bytes.size() / 2));
        CHECK_THROWS_AS(io::read_mesh(cut), FormatError);

        auto t = splittree::build_halving(pts);
        std::stringstream st;
        io::write_split_tree(st, t);
        auto tb = io::read_split_tree(st);
        CHECK(splittree::same_tree(t, tb));
        CHECK(tb.perm == t.perm);

        auto dir = scratch("mesh");
        io::write_off((dir / "m.off").string(), m);
        std::ifstream off(dir / "m.off");
        std::string head;
        std::size_t nv = 0, nf = 0;
        off >> head >> nv >> nf;
        CHECK(head == "OFF");
        CHECK(nv == pts.size());
        CHECK(nf == m.tris.size());
    }

    TEST_CASE("sort state directory round trip") {
        model::SortSpec spec;
        spec.family = "mixed";
        spec.n = 16;
        Rng g(5);
        auto m = model::generate_sort_model(spec, g);
        model::SortModelSource src(m, 6);
        sorter::Config cfg;
        cfg.trie_cap = 500;
        auto st = sorter::train_sort(src, m.n, cfg);
        auto dir = scratch("sortstate");
        io::save_sort_state(dir.string(), st);
        CHECK(io::state_mode(dir.string()) == "sort");
        auto back = io::load_sort_state(dir.string());
        CHECK(back.groups == st.groups);
        CHECK(back.v.pivots == st.v.pivots);
        auto batch = src.take(50, "operate");
        for (const auto& inst : batch) {
            auto a = sorter::operate_sort(st, inst.x);
            auto b = sorter::operate_sort(back, inst.x);
            CHECK(a.order == b.order);
            CHECK(a.cost.total() == b.cost.total());
        }
        CHECK_THROWS_AS(io::load_dt_state(dir.string()), FormatError);
        spit(dir / "vlist.bin", "SIMPVLST");
        CHECK_THROWS_AS(io::load_sort_state(dir.string()), FormatError);
    }

    TEST_CASE("dt state directory round trip") {
        model::DtSpec spec;
        spec.family = "mixed";
        spec.n = 24;
        spec.const_fraction = 0.2;
        Rng g(8);
        auto m = model::generate_dt_model(spec, g);
        model::DtModelSource src(m, 9);
        dtpipe::Config cfg;
        cfg.trie_cap = 200;
        cfg.net.audit_disks = 100;
        auto st = dtpipe::train_dt(src, spec.n, cfg);
        auto dir = scratch("dtstate");
        io::save_dt_state(dir.string(), st);
        CHECK(io::state_mode(dir.string()) == "dt");
        auto back = io::load_dt_state(dir.string());
        CHECK(back.partition.groups == st.partition.groups);
        CHECK(back.partition.g0 == st.partition.g0);
        CHECK(back.canonical.v == st.canonical.v);
        CHECK(back.canonical.net == st.canonical.net);
        for (int i = 0; i < 10; ++i) {
            auto inst = m.sample(g);
            auto a = dtpipe::operate_dt(st, inst.p);
            auto b = dtpipe::operate_dt(back, inst.p);
            CHECK(geom::triangle_set(a.mesh) == geom::triangle_set(b.mesh));
            CHECK(a.cost.step == b.cost.step);
        }
    }
}
