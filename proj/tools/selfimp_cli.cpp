// selfimp: generate instances, train, operate, bench and verify the self-improving
// sorter and Delaunay triangulator.
//
// Settings resolve as defaults < --config file < SELFIMP_* environment < flags.
#include "selfimp/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace selfimp;

namespace {

struct Common {
    std::string config, mode, out, family, exec;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> instances, n;
    std::vector<std::string> knobs;
    bool csv = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON run config")->check(CLI::ExistingFile);
    app->add_option("--mode", c.mode, "sort | dt (env SELFIMP_MODE)")->check(CLI::IsMember({"sort", "dt"}));
    app->add_option("--seed", c.seed, "run seed (env SELFIMP_SEED)");
    app->add_option("--out", c.out, "output directory (env SELFIMP_OUT)");
    app->add_option("--instances", c.instances, "instance count (env SELFIMP_INSTANCES)");
    app->add_option("--n", c.n, "model size n");
    app->add_option("--family", c.family, "model family");
    app->add_option("--exec", c.exec, "parallel | serial")->check(CLI::IsMember({"parallel", "serial"}));
    app->add_option("--knob", c.knobs, "NAME=VALUE desk override (env SELFIMP_KNOB_<NAME>)");
    app->add_flag("--csv", c.csv, "also write CSV copies of instances and metrics");
}

harness::RunConfig resolve(const Common& c) {
    auto cfg = c.config.empty() ? harness::default_config() : harness::load_config(c.config);
    harness::apply_env(cfg, [](const char* k) { return std::getenv(k); });
    if (!c.mode.empty()) harness::set_mode(cfg, c.mode);
    if (c.seed) cfg.seed = cfg.model.seed = *c.seed;
    if (!c.out.empty()) cfg.out = c.out;
    if (c.instances) cfg.instances = *c.instances;
    if (c.n) (cfg.mode == "sort" ? cfg.model.sort.n : cfg.model.dt.n) = *c.n;
    if (!c.family.empty()) (cfg.mode == "sort" ? cfg.model.sort.family : cfg.model.dt.family) = c.family;
    if (!c.exec.empty()) cfg.exec = c.exec == "serial" ? Exec::Serial : Exec::Parallel;
    if (c.csv) cfg.csv = true;
    for (const auto& kv : c.knobs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--knob expects NAME=VALUE, got '" + kv + "'");
        auto name = kv.substr(0, eq);
        auto it = cfg.knobs.find(name);
        if (it == cfg.knobs.end()) throw InvalidArgument("unknown knob '" + name + "'");
        try {
            it->second.desk_value = std::stod(kv.substr(eq + 1));
        } catch (const std::logic_error&) {
            throw InvalidArgument("--knob " + name + ": not a number");
        }
    }
    harness::validate(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selfimp: self-improving sorting and Delaunay triangulation"};
    app.set_version_flag("--version", std::string("selfimp ") + build_id());
    app.require_subcommand(1);

    Common common;
    harness::GenArgs gen;
    harness::TrainArgs train;
    harness::OperateArgs op;
    harness::BenchArgs bench;
    harness::VerifyArgs ver;
    std::optional<std::size_t> gen_count, bench_count;
    bool show_config = false;

    auto* g = app.add_subcommand("gen", "draw instances from a model into <out>/instances.bin");
    add_common(g, common);
    g->add_option("--count", gen_count, "instances to draw (default: --instances)");

    auto* t = app.add_subcommand("train", "run the training phase, write <out>/state/");
    add_common(t, common);
    t->add_option("--in", train.in, "train from an instance file instead of the model")->check(CLI::ExistingFile);

    auto* o = app.add_subcommand("operate", "run the operation phase on an instance file");
    add_common(o, common);
    o->add_option("--state", op.state, "state directory (default <out>/state)");
    o->add_option("--in", op.in, "instance file (default <out>/instances.bin)");
    o->add_flag("--check", op.check, "compare every output with the oracle; exit 1 on mismatch");
    o->add_flag("--off", op.off, "dt: write the first mesh as <out>/mesh_0.off");

    auto* b = app.add_subcommand("bench", "measure comparisons, fallbacks and entropy ratio");
    add_common(b, common);
    b->add_option("--state", bench.state, "state directory (default <out>/state)");
    b->add_option("--in", bench.in, "instance file (default: fresh draws from the model)");
    b->add_option("--count", bench_count, "fresh draws (default: --instances)");

    auto* v = app.add_subcommand("verify", "oracle-equivalence and invariant suites");
    add_common(v, common);
    v->add_flag("--full", ver.full, "acceptance-scale sizes");
    v->add_option("--only", ver.only, "criterion ids to run")->check(CLI::Range(1, 13));

    for (auto* sc : {g, t, o, b, v}) sc->add_flag("--show-config", show_config, "print the resolved config and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = resolve(common);
        if (show_config) {
            std::cout << harness::to_json(cfg).dump(2) << '\n';
            return 0;
        }
        gen.count = gen_count;
        bench.count = bench_count;
        if (g->parsed()) return harness::cmd_gen(cfg, gen, std::cout);
        if (t->parsed()) return harness::cmd_train(cfg, train, std::cout);
        if (o->parsed()) return harness::cmd_operate(cfg, op, std::cout);
        if (b->parsed()) return harness::cmd_bench(cfg, bench, std::cout);
        return harness::cmd_verify(cfg, ver, std::cout);
    } catch (const std::exception& e) {
        return harness::exit_code_for(e, std::cerr);
    }
}
