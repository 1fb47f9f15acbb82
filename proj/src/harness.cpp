#include "selfimp/harness.hpp"

#include "selfimp/verify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace selfimp::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::map<std::string, Knob> default_knobs() {
    std::map<std::string, Knob> k;
    k["ell"] = {"max(100^3, (90 ln 4n^3)^2, (6 c0 + 3)^2)", 0, 10, 1e7, true,
                "pair-test samples; desk formula max(400, (6 c0 + 3)^2)"};
    k["sort_lambda"] = {"n^2 ln n", 0, 1, 1e8, true, "V-list samples; desk formula max(64, ceil(n ln n))"};
    k["sort_trie_cap"] = {"none (N = t0 ln t0 ln n)", 20000, 1, 1e8, false, "training samples per group, cap"};
    k["dt_lambda"] = {"n^2 ln n", 0, 1, 1e8, true, "canonical-set samples; desk formula max(64, ceil(n ln n))"};
    k["dt_trie_cap"] = {"none (N = t0 ln t0 ln n)", 2000, 1, 1e8, false, "training samples per group, cap"};
    k["t0_const"] = {"unspecified constant", 4, 1e-3, 1e6, false, "constant in the outcome-count bound t0"};
    k["d_test"] = {"2 (d0^2 / 2 + d0)^16", 4, 1, 12, false, "degree of the algebraic dependence tests"};
    k["rank_tol"] = {"exact arithmetic", 1e-8, 1e-15, 1e-2, false, "relative pivot tolerance of the numeric rank"};
    k["c_net"] = {"unspecified constant", 8, 1e-2, 1e3, false, "net size ceil(c_net n max(1, ln n))"};
    k["huge_scale"] = {"large enough to enclose every input", 4096, 4, 1e9, false,
                       "huge triangle vs. pool bounding box"};
    k["net_audit_disks"] = {nullptr, 1000, 0, 1e6, false, "heavy disks checked per net draw"};
    k["net_retries"] = {nullptr, 4, 0, 100, false, "net redraws after a failed audit"};
    return k;
}

double RunConfig::knob(const std::string& name) const {
    auto it = knobs.find(name);
    if (it == knobs.end()) throw InvalidArgument("unknown knob '" + name + "'");
    return it->second.desk_value;
}

RunConfig default_config(const std::string& mode) {
    RunConfig c;
    set_mode(c, mode);
    return c;
}

void set_mode(RunConfig& cfg, const std::string& mode) {
    if (mode != "sort" && mode != "dt") throw InvalidArgument("mode must be sort or dt, got '" + mode + "'");
    cfg.mode = mode;
    cfg.model.mode = mode;
}

RunConfig config_from_json(const json& j) {
    RunConfig c = default_config(j.value("mode", std::string("sort")));
    try {
        c.seed = j.value("seed", c.seed);
        c.instances = j.value("instances", c.instances);
        c.out = j.value("out", c.out);
        c.csv = j.value("csv", c.csv);
        auto exec = j.value("exec", std::string("parallel"));
        if (exec != "parallel" && exec != "serial") throw InvalidArgument("exec must be parallel or serial");
        c.exec = exec == "serial" ? Exec::Serial : Exec::Parallel;
        if (j.contains("model")) {
            json m = j.at("model");
            m["mode"] = c.mode;
            if (!m.contains("seed")) m["seed"] = c.seed;
            c.model = io::model_spec_from_json(m);
        } else {
            c.model.seed = c.seed;
        }
        if (j.contains("knobs")) {
            for (const auto& [name, v] : j.at("knobs").items()) {
                auto it = c.knobs.find(name);
                if (it == c.knobs.end()) throw InvalidArgument("unknown knob '" + name + "'");
                if (!v.is_object() || !v.contains("paper_value") || !v.contains("desk_value"))
                    throw InvalidArgument("knob '" + name + "' needs both paper_value and desk_value");
                it->second.desk_value = v.at("desk_value").get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot read config " + path);
    try {
        return config_from_json(json::parse(f));
    } catch (const json::parse_error& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

namespace {

std::uint64_t parse_u64(const std::string& what, const char* s) {
    try {
        if (!std::isdigit(static_cast<unsigned char>(s[0]))) throw std::invalid_argument(s);
        std::size_t used = 0;
        auto v = std::stoull(s, &used);
        if (used != std::string(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw InvalidArgument(what + ": not an unsigned integer: '" + s + "'");
    }
}

}  // namespace

void apply_env(RunConfig& cfg, const EnvLookup& env) {
    if (const char* v = env("SELFIMP_MODE")) set_mode(cfg, v);
    if (const char* v = env("SELFIMP_SEED")) cfg.seed = cfg.model.seed = parse_u64("SELFIMP_SEED", v);
    if (const char* v = env("SELFIMP_OUT")) cfg.out = v;
    if (const char* v = env("SELFIMP_INSTANCES")) cfg.instances = parse_u64("SELFIMP_INSTANCES", v);
    for (auto& [name, k] : cfg.knobs) {
        std::string var = "SELFIMP_KNOB_" + name;
        std::transform(var.begin(), var.end(), var.begin(), [](unsigned char ch) { return std::toupper(ch); });
        if (const char* v = env(var.c_str())) {
            try {
                k.desk_value = std::stod(v);
            } catch (const std::logic_error&) {
                throw InvalidArgument(var + ": not a number: '" + v + "'");
            }
        }
    }
}

void validate(const RunConfig& cfg) {
    if (cfg.mode != "sort" && cfg.mode != "dt") throw InvalidArgument("mode must be sort or dt");
    if (cfg.model.mode != cfg.mode) throw InvalidArgument("model spec mode does not match the run mode");
    const std::size_t n = cfg.mode == "sort" ? cfg.model.sort.n : cfg.model.dt.n;
    if (n == 0 || n > (1u << 20)) throw InvalidArgument("model.n out of range [1, 2^20]");
    if (cfg.mode == "sort" && (cfg.model.sort.c0 < 0 || cfg.model.sort.c0 > 16))
        throw InvalidArgument("model.c0 out of range [0, 16]");
    if (cfg.mode == "dt" && (cfg.model.dt.const_fraction < 0 || cfg.model.dt.const_fraction > 1))
        throw InvalidArgument("model.const_fraction out of range [0, 1]");
    if (cfg.instances == 0) throw InvalidArgument("instances must be positive");
    for (const auto& [name, k] : cfg.knobs) {
        double v = k.desk_value;
        if (!std::isfinite(v)) throw InvalidArgument("knob " + name + " is not finite");
        if (k.zero_ok && v == 0) continue;
        if (v < k.lo || v > k.hi) {
            std::ostringstream os;
            os << "knob " << name << " = " << v << " outside [" << k.lo << ", " << k.hi << "]"
               << (k.zero_ok ? " (or 0 for the desk formula)" : "");
            throw InvalidArgument(os.str());
        }
    }
}

json to_json(const RunConfig& cfg) {
    json k = json::object();
    for (const auto& [name, v] : cfg.knobs)
        k[name] = {{"paper_value", v.paper_value}, {"desk_value", v.desk_value}, {"note", v.note}};
    return {{"mode", cfg.mode},
            {"seed", cfg.seed},
            {"instances", cfg.instances},
            {"out", cfg.out},
            {"exec", cfg.exec == Exec::Serial ? "serial" : "parallel"},
            {"csv", cfg.csv},
            {"model", io::to_json(cfg.model)},
            {"knobs", k}};
}

sorter::Config sort_config(const RunConfig& cfg) {
    sorter::Config c;
    c.c0 = cfg.model.sort.c0;
    c.ell = static_cast<std::size_t>(cfg.knob("ell"));
    c.lambda = static_cast<std::size_t>(cfg.knob("sort_lambda"));
    c.trie_cap = static_cast<std::size_t>(cfg.knob("sort_trie_cap"));
    c.t0_const = cfg.knob("t0_const");
    return c;
}

dtpipe::Config dt_config(const RunConfig& cfg) {
    dtpipe::Config c;
    c.partition.d_test = static_cast<int>(cfg.knob("d_test"));
    c.partition.rank.tol = cfg.knob("rank_tol");
    c.net.c_net = cfg.knob("c_net");
    c.net.huge_scale = cfg.knob("huge_scale");
    c.net.audit_disks = static_cast<std::size_t>(cfg.knob("net_audit_disks"));
    c.net.max_retries = static_cast<std::size_t>(cfg.knob("net_retries"));
    c.lambda = static_cast<std::size_t>(cfg.knob("dt_lambda"));
    c.trie_cap = static_cast<std::size_t>(cfg.knob("dt_trie_cap"));
    c.t0_const = cfg.knob("t0_const");
    c.seed = stream_seed(cfg.seed, Stream::Model) ^ 0x6e6574ULL;
    return c;
}

std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
    return splitmix64(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(s));
}

// ------------------------------------------------------------------ metrics

Metrics::Metrics(const std::string& path, const RunConfig& cfg, const std::string& command)
    : jl_(path), csv_path_(path + ".csv"), csv_(cfg.csv) {
    if (!jl_) throw Error("cannot write " + path);
    header_ = {{"stage", "header"}, {"command", command}, {"build", build_id()}, {"config", to_json(cfg)}};
    jl_ << header_.dump() << '\n';
}

void Metrics::record(const json& rec) {
    jl_ << rec.dump() << '\n';
    if (csv_) rows_.push_back(rec);
}

Metrics::~Metrics() {
    if (!csv_ || rows_.empty()) return;
    std::vector<std::string> cols;
    std::set<std::string> seen;
    for (const auto& r : rows_)
        for (const auto& [k, v] : r.items())
            if (v.is_primitive() && seen.insert(k).second) cols.push_back(k);
    std::ofstream f(csv_path_);
    f << "# " << header_.dump() << '\n';
    for (std::size_t c = 0; c < cols.size(); ++c) f << (c ? "," : "") << cols[c];
    f << '\n';
    for (const auto& r : rows_) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) f << ',';
            auto it = r.find(cols[c]);
            if (it == r.end() || it->is_null()) continue;
            if (it->is_string()) {
                std::string s = it->get<std::string>();
                if (s.find_first_of(",\"\n") != std::string::npos) {
                    std::string q = "\"";
                    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                    f << q << '"';
                } else {
                    f << s;
                }
            } else {
                f << it->dump();
            }
        }
        f << '\n';
    }
}

// ------------------------------------------------------------------ commands

namespace {

fs::path out_dir(const RunConfig& cfg) {
    fs::path d(cfg.out);
    fs::create_directories(d);
    return d;
}

std::string default_state(const RunConfig& cfg, const std::string& given) {
    return given.empty() ? (fs::path(cfg.out) / "state").string() : given;
}

std::string default_instances(const RunConfig& cfg, const std::string& given) {
    return given.empty() ? (fs::path(cfg.out) / "instances.bin").string() : given;
}

model::SortModel make_sort_model(const RunConfig& cfg) {
    Rng rng(stream_seed(cfg.model.seed, Stream::Model));
    return model::generate_sort_model(cfg.model.sort, rng, {cfg.model.allow_degenerate});
}

model::DtModel make_dt_model(const RunConfig& cfg) {
    Rng rng(stream_seed(cfg.model.seed, Stream::Model));
    return model::generate_dt_model(cfg.model.dt, rng, {cfg.model.allow_degenerate});
}

template <class Inst, class Model>
std::vector<Inst> draw(const Model& m, std::uint64_t seed, std::size_t count) {
    model::ModelSource<Model, Inst> src(m, seed);
    return src.take(count, "instances");
}

std::string state_kind_check(const RunConfig& cfg, const std::string& dir) {
    auto mode = io::state_mode(dir);
    if (mode != cfg.mode) throw InvalidArgument("state in " + dir + " is a " + mode + " state, run mode is " + cfg.mode);
    return mode;
}

json sort_record(std::size_t i, const sorter::SortOutput& o, std::size_t n) {
    const double cmp = static_cast<double>(o.cost.total());
    return {{"stage", "operate"},
            {"instance", i},
            {"comparisons", o.cost.total()},
            {"b_visits", o.cost.b_visits},
            {"pi_visits", o.cost.pi_visits},
            {"merge_comparisons", o.cost.merge_cmp},
            {"fallbacks", o.cost.b_fallbacks + o.cost.pi_fallbacks},
            {"entropy_bits", nullptr},
            {"ratio", n ? cmp / static_cast<double>(n) : 0.0}};
}

json dt_record(std::size_t i, const dtpipe::Cost& c, std::size_t n) {
    json steps = json::array();
    for (int s = 1; s <= 8; ++s) steps.push_back(c.step[static_cast<std::size_t>(s)]);
    return {{"stage", "operate"},
            {"instance", i},
            {"comparisons", c.novel()},
            {"substituted", c.substituted()},
            {"steps", steps},
            {"sum_delta", c.sum_delta},
            {"fallbacks", c.b_fallbacks + c.pi_fallbacks},
            {"exact_fallbacks", c.exact_fallbacks},
            {"entropy_bits", nullptr},
            {"ratio", n ? static_cast<double>(c.novel()) / static_cast<double>(n) : 0.0}};
}

}  // namespace

int cmd_gen(const RunConfig& cfg, const GenArgs& a, std::ostream& log) {
    validate(cfg);
    auto dir = out_dir(cfg);
    const std::size_t count = a.count.value_or(cfg.instances);
    io::write_model_spec((dir / "model.json").string(), cfg.model);
    const auto seed = stream_seed(cfg.seed, Stream::Instances);
    if (cfg.mode == "sort") {
        auto m = make_sort_model(cfg);
        auto inst = draw<model::SortInstance>(m, seed, count);
        io::write_sort_instances((dir / "instances.bin").string(), inst);
        if (cfg.csv) io::write_sort_csv((dir / "instances.csv").string(), inst);
        log << "gen: sort model n=" << m.n << " with " << m.groups.size() << " groups, " << count << " instances\n";
    } else {
        auto m = make_dt_model(cfg);
        auto inst = draw<model::DtInstance>(m, seed, count);
        io::write_dt_instances((dir / "instances.bin").string(), inst);
        if (cfg.csv) io::write_dt_csv((dir / "instances.csv").string(), inst);
        log << "gen: dt model n=" << m.n << " with " << m.groups.size() << " groups and " << m.const_set().size()
            << " constant points, " << count << " instances\n";
    }
    log << "gen: wrote " << (dir / "model.json").string() << " and " << (dir / "instances.bin").string() << '\n';
    return 0;
}

int cmd_train(const RunConfig& cfg, const TrainArgs& a, std::ostream& log) {
    validate(cfg);
    auto dir = out_dir(cfg);
    auto state = (dir / "state").string();
    Metrics metrics((dir / "train.jsonl").string(), cfg, "train");
    const auto seed = stream_seed(cfg.seed, Stream::Train);
    if (cfg.mode == "sort") {
        std::unique_ptr<model::SortSource> src;
        std::optional<model::SortModel> m;
        if (!a.in.empty()) {
            src = std::make_unique<model::VectorSource<model::SortInstance>>(io::read_sort_instances(a.in));
        } else {
            m = make_sort_model(cfg);
            src = std::make_unique<model::SortModelSource>(*m, seed);
        }
        sorter::TrainReport rep;
        auto st = sorter::train_sort(*src, cfg.model.sort.n, sort_config(cfg), &rep, cfg.exec);
        io::save_sort_state(state, st);
        metrics.record({{"stage", "partition"}, {"samples", rep.ell}, {"groups", st.groups.size()},
                        {"positive_pairs", rep.positive_pairs}});
        metrics.record({{"stage", "vlist"}, {"samples", rep.lambda}, {"duplicates", st.v.duplicates}});
        metrics.record({{"stage", "tries"}, {"samples", rep.trie_samples}, {"per_group", rep.group_samples},
                        {"per_group_uncapped", rep.group_samples_uncapped}});
        log << "train: sort state with " << st.groups.size() << " groups written to " << state << '\n';
    } else {
        std::unique_ptr<model::DtSource> src;
        std::optional<model::DtModel> m;
        if (!a.in.empty()) {
            src = std::make_unique<model::VectorSource<model::DtInstance>>(io::read_dt_instances(a.in));
        } else {
            m = make_dt_model(cfg);
            src = std::make_unique<model::DtModelSource>(*m, seed);
        }
        dtpipe::TrainReport rep;
        auto st = dtpipe::train_dt(*src, cfg.model.dt.n, dt_config(cfg), &rep);
        io::save_dt_state(state, st);
        metrics.record({{"stage", "partition"}, {"samples", rep.partition_samples}, {"groups", st.partition.groups.size()},
                        {"constant_points", st.partition.g0.size()}, {"log", st.partition.log}});
        metrics.record({{"stage", "canonical"}, {"samples", rep.lambda}, {"pool_points", rep.pool_points},
                        {"net_size", st.canonical.net.size()}, {"retries", st.canonical.retries},
                        {"audit_disks", st.canonical.audit_disks}, {"audit_misses", st.canonical.audit_misses}});
        metrics.record({{"stage", "tries"}, {"samples", rep.trie_samples}, {"per_group", rep.group_samples},
                        {"per_group_uncapped", rep.group_samples_uncapped}});
        log << "train: dt state with " << st.partition.groups.size() << " groups, " << st.partition.g0.size()
            << " constant points, |V| = " << st.canonical.v.size() << " written to " << state << '\n';
    }
    return 0;
}

int cmd_operate(const RunConfig& cfg, const OperateArgs& a, std::ostream& log) {
    validate(cfg);
    auto dir = out_dir(cfg);
    const auto state = default_state(cfg, a.state);
    const auto in = default_instances(cfg, a.in);
    state_kind_check(cfg, state);
    Metrics metrics((dir / "operate.jsonl").string(), cfg, "operate");
    std::size_t mismatches = 0, total = 0;
    if (cfg.mode == "sort") {
        auto st = io::load_sort_state(state);
        auto batch = io::read_sort_instances(in);
        auto outs = sorter::operate_sort_batch(st, batch, cfg.exec);
        std::ofstream orders(dir / "orders.csv");
        for (std::size_t i = 0; i < outs.size(); ++i) {
            for (std::size_t k = 0; k < outs[i].order.size(); ++k) orders << (k ? "," : "") << outs[i].order[k];
            orders << '\n';
            auto rec = sort_record(i, outs[i], st.n);
            if (a.check) {
                bool ok = outs[i].order == sorter::reference_order(batch[i].x);
                rec["check"] = ok;
                mismatches += !ok;
            }
            metrics.record(rec);
        }
        total = outs.size();
    } else {
        auto st = io::load_dt_state(state);
        auto batch = io::read_dt_instances(in);
        std::vector<dtpipe::Output> outs(batch.size());
        std::vector<char> ok(batch.size(), 1);
        std::vector<std::string> errors(batch.size());
        const bool par = cfg.exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic) if (par)
        for (std::size_t i = 0; i < batch.size(); ++i) {
            try {
                outs[i] = dtpipe::operate_dt(st, batch[i].p);
                if (a.check) ok[i] = geom::triangle_set(outs[i].mesh) == geom::triangle_set(geom::delaunay(batch[i].p));
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
        for (std::size_t i = 0; i < batch.size(); ++i)
            if (!errors[i].empty()) throw Error("instance " + std::to_string(i) + ": " + errors[i]);
        std::ofstream tris(dir / "triangles.csv");
        for (std::size_t i = 0; i < outs.size(); ++i) {
            auto ts = geom::triangle_set(outs[i].mesh);
            for (std::size_t k = 0; k < ts.size(); ++k)
                tris << (k ? "," : "") << ts[k][0] << ' ' << ts[k][1] << ' ' << ts[k][2];
            tris << '\n';
            auto rec = dt_record(i, outs[i].cost, st.n);
            if (a.check) rec["check"] = static_cast<bool>(ok[i]), mismatches += !ok[i];
            metrics.record(rec);
        }
        if (a.off && !outs.empty()) io::write_off((dir / "mesh_0.off").string(), outs[0].mesh);
        total = outs.size();
    }
    log << "operate: " << total << " instances";
    if (a.check) log << ", oracle check " << (total - mismatches) << "/" << total << (mismatches ? " FAILED" : " pass");
    log << '\n';
    return mismatches ? 1 : 0;
}

int cmd_bench(const RunConfig& cfg, const BenchArgs& a, std::ostream& log) {
    validate(cfg);
    auto dir = out_dir(cfg);
    const auto state = default_state(cfg, a.state);
    state_kind_check(cfg, state);
    Metrics metrics((dir / "bench.jsonl").string(), cfg, "bench");
    const std::size_t count = a.count.value_or(cfg.instances);
    const auto seed = stream_seed(cfg.seed, Stream::Bench);
    bool correct = true;
    if (cfg.mode == "sort") {
        auto st = io::load_sort_state(state);
        std::vector<model::SortInstance> batch;
        if (!a.in.empty()) {
            batch = io::read_sort_instances(a.in);
        } else {
            auto m = make_sort_model(cfg);
            batch = draw<model::SortInstance>(m, seed, count);
        }
        auto outs = sorter::operate_sort_batch(st, batch, cfg.exec);
        for (std::size_t i = 0; i < outs.size(); ++i) metrics.record(sort_record(i, outs[i], st.n));
        auto rep = sorter::bench_sort(st, batch, cfg.exec);
        correct = rep.all_correct;
        metrics.record({{"stage", "bench"},
                        {"instances", rep.instances},
                        {"comparisons", rep.mean_comparisons},
                        {"b_visits", rep.mean_b},
                        {"pi_visits", rep.mean_pi},
                        {"merge_comparisons", rep.mean_merge},
                        {"fallbacks", rep.b_fallback_rate + rep.pi_fallback_rate},
                        {"b_fallback_rate", rep.b_fallback_rate},
                        {"pi_fallback_rate", rep.pi_fallback_rate},
                        {"entropy_bits", rep.entropy},
                        {"ratio", rep.ratio},
                        {"correct", rep.all_correct}});
        log << std::setprecision(4) << "bench: " << rep.instances << " instances, mean comparisons " << rep.mean_comparisons
            << ", entropy " << rep.entropy << " bits, ratio " << rep.ratio << ", fallbacks b " << rep.b_fallback_rate
            << " pi " << rep.pi_fallback_rate << '\n';
    } else {
        auto st = io::load_dt_state(state);
        std::vector<model::DtInstance> batch;
        if (!a.in.empty()) {
            batch = io::read_dt_instances(a.in);
        } else {
            auto m = make_dt_model(cfg);
            batch = draw<model::DtInstance>(m, seed, count);
        }
        std::vector<dtpipe::Cost> costs(batch.size());
        const bool par = cfg.exec == Exec::Parallel;
        std::vector<std::string> errors(batch.size());
#pragma omp parallel for schedule(dynamic) if (par)
        for (std::size_t i = 0; i < batch.size(); ++i) {
            try {
                costs[i] = dtpipe::operate_dt(st, batch[i].p).cost;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
        for (std::size_t i = 0; i < batch.size(); ++i)
            if (!errors[i].empty()) throw Error("instance " + std::to_string(i) + ": " + errors[i]);
        for (std::size_t i = 0; i < costs.size(); ++i) metrics.record(dt_record(i, costs[i], st.n));
        auto rep = dtpipe::bench_dt(st, batch, cfg.exec);
        correct = rep.all_correct;
        json steps = json::array();
        for (int s = 1; s <= 8; ++s) steps.push_back(rep.mean_step[static_cast<std::size_t>(s)]);
        metrics.record({{"stage", "bench"},
                        {"instances", rep.instances},
                        {"comparisons", rep.mean_novel},
                        {"substituted", rep.mean_substituted},
                        {"steps", steps},
                        {"delta_per_point", rep.mean_delta_per_point},
                        {"occupancy_max_mean", rep.occupancy_max_mean},
                        {"occupancy_mean", rep.occupancy_mean},
                        {"fallbacks", rep.b_fallback_rate + rep.pi_fallback_rate},
                        {"b_fallback_rate", rep.b_fallback_rate},
                        {"pi_fallback_rate", rep.pi_fallback_rate},
                        {"exact_fallbacks", rep.mean_exact_fallbacks},
                        {"entropy_bits", rep.entropy_sum},
                        {"ratio", rep.ratio},
                        {"correct", rep.all_correct}});
        log << std::setprecision(4) << "bench: " << rep.instances << " instances, mean cost steps 1-6 " << rep.mean_novel
            << " (substituted steps 7-8: " << rep.mean_substituted << "), entropy " << rep.entropy_sum << " bits, ratio "
            << rep.ratio << ", sum|Delta|/point " << rep.mean_delta_per_point << '\n';
    }
    if (!correct) log << "bench: OUTPUT MISMATCH against the oracle\n";
    return correct ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, const VerifyArgs& a, std::ostream& log) {
    auto dir = out_dir(cfg);
    Metrics metrics((dir / "verify.jsonl").string(), cfg, "verify");
    bool all = true;
    log << (a.full ? "verify (full scale)\n" : "verify (quick scale)\n");
    verify::run_all(a.full, cfg.seed, a.only, [&](const verify::Result& r) {
        log << verify::format_line(r) << std::endl;
        metrics.record({{"stage", "verify"}, {"criterion", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        all = all && r.pass;
    });
    log << (all ? "all suites pass\n" : "SOME SUITES FAILED\n");
    return all ? 0 : 1;
}

int exit_code_for(const std::exception& e, std::ostream& err) {
    if (auto* s = dynamic_cast<const SampleStarvation*>(&e)) {
        err << "error: instance stream exhausted during stage '" << s->stage << "'\n";
        return 3;
    }
    if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const FormatError*>(&e)) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << "error: " << e.what() << '\n';
    return 4;
}

}  // namespace selfimp::harness
