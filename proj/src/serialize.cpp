#include "selfimp/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace selfimp::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated file");
    return v;
}

template <class T>
void put_vec(std::ostream& os, const std::vector<T>& v) {
    put<std::uint64_t>(os, v.size());
    if (!v.empty()) os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
std::vector<T> get_vec(std::istream& is) {
    auto n = get<std::uint64_t>(is);
    if (n > (std::uint64_t{1} << 34) / sizeof(T)) throw FormatError("implausible array length");
    std::vector<T> v(n);
    if (n && !is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
        throw FormatError("truncated file");
    return v;
}

void put_magic(std::ostream& os, const char* magic) {
    os.write(magic, 8);
    put<std::uint32_t>(os, kVersion);
}

void expect_magic(std::istream& is, const char* magic) {
    char buf[8];
    if (!is.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
        throw FormatError(std::string("not a ") + std::string(magic, 8) + " file");
    if (get<std::uint32_t>(is) != kVersion) throw FormatError("unsupported format version");
}

std::ofstream open_out(const std::string& path, bool binary = true) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw Error("cannot write " + path);
    return f;
}

std::ifstream open_in(const std::string& path, bool binary = true) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw Error("cannot read " + path);
    return f;
}

json read_json(const std::string& path) {
    auto f = open_in(path, false);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& j) {
    auto f = open_out(path, false);
    f << j.dump(2) << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size() && s.find_first_not_of(" \t\r", used) != std::string::npos) throw FormatError("bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("bad number '" + s + "'");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

json to_json(const ModelSpec& s) {
    json j;
    j["mode"] = s.mode;
    j["seed"] = s.seed;
    j["allow_degenerate"] = s.allow_degenerate;
    if (s.mode == "sort") {
        j["family"] = s.sort.family;
        j["n"] = s.sort.n;
        j["c0"] = s.sort.c0;
        j["max_group"] = s.sort.max_group;
        j["num_groups"] = s.sort.num_groups;
        j["dist"] = s.sort.dist;
    } else {
        j["family"] = s.dt.family;
        j["n"] = s.dt.n;
        j["d0"] = s.dt.d0;
        j["max_group"] = s.dt.max_group;
        j["const_fraction"] = s.dt.const_fraction;
    }
    return j;
}

ModelSpec model_spec_from_json(const json& j) {
    ModelSpec s;
    try {
        s.mode = j.value("mode", std::string("sort"));
        s.seed = j.value("seed", std::uint64_t{1});
        s.allow_degenerate = j.value("allow_degenerate", false);
        if (s.mode == "sort") {
            s.sort.family = j.value("family", s.sort.family);
            s.sort.n = j.value("n", s.sort.n);
            s.sort.c0 = j.value("c0", s.sort.c0);
            s.sort.max_group = j.value("max_group", s.sort.max_group);
            s.sort.num_groups = j.value("num_groups", s.sort.num_groups);
            s.sort.dist = j.value("dist", s.sort.dist);
        } else if (s.mode == "dt") {
            s.dt.family = j.value("family", s.dt.family);
            s.dt.n = j.value("n", s.dt.n);
            s.dt.d0 = j.value("d0", s.dt.d0);
            s.dt.max_group = j.value("max_group", s.dt.max_group);
            s.dt.const_fraction = j.value("const_fraction", s.dt.const_fraction);
        } else {
            throw FormatError("model spec: mode must be sort or dt");
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("model spec: ") + e.what());
    }
    return s;
}

ModelSpec read_model_spec(const std::string& path) { return model_spec_from_json(read_json(path)); }
void write_model_spec(const std::string& path, const ModelSpec& s) { write_json(path, to_json(s)); }

// ---------------------------------------------------------------------------

void write_sort_instances(const std::string& path, const std::vector<model::SortInstance>& v) {
    auto f = open_out(path);
    const std::size_t n = v.empty() ? 0 : v[0].x.size();
    put_magic(f, "SIMPSORT");
    put<std::uint64_t>(f, n);
    put<std::uint64_t>(f, v.size());
    for (const auto& inst : v) {
        if (inst.x.size() != n) throw InvalidArgument("instances differ in length");
        f.write(reinterpret_cast<const char*>(inst.x.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
}

std::vector<model::SortInstance> read_sort_instances(const std::string& path) {
    auto f = open_in(path);
    expect_magic(f, "SIMPSORT");
    auto n = get<std::uint64_t>(f), count = get<std::uint64_t>(f);
    if (n > (1u << 24) || count > (1u << 28)) throw FormatError("implausible instance header");
    std::vector<model::SortInstance> out(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        out[i].x.resize(n);
        out[i].draw = i;
        if (!f.read(reinterpret_cast<char*>(out[i].x.data()), static_cast<std::streamsize>(n * sizeof(double))))
            throw FormatError("truncated file");
    }
    return out;
}

void write_dt_instances(const std::string& path, const std::vector<model::DtInstance>& v) {
    auto f = open_out(path);
    const std::size_t n = v.empty() ? 0 : v[0].p.size();
    put_magic(f, "SIMPDTIN");
    put<std::uint64_t>(f, n);
    put<std::uint64_t>(f, v.size());
    for (const auto& inst : v) {
        if (inst.p.size() != n) throw InvalidArgument("instances differ in length");
        for (const auto& p : inst.p) put(f, p.x), put(f, p.y);
    }
}

std::vector<model::DtInstance> read_dt_instances(const std::string& path) {
    auto f = open_in(path);
    expect_magic(f, "SIMPDTIN");
    auto n = get<std::uint64_t>(f), count = get<std::uint64_t>(f);
    if (n > (1u << 24) || count > (1u << 28)) throw FormatError("implausible instance header");
    std::vector<model::DtInstance> out(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        out[i].p.resize(n);
        out[i].draw = i;
        for (auto& p : out[i].p) p.x = get<double>(f), p.y = get<double>(f);
    }
    return out;
}

void write_sort_csv(const std::string& path, const std::vector<model::SortInstance>& v) {
    auto f = open_out(path, false);
    f << std::setprecision(17);
    for (const auto& inst : v) {
        for (std::size_t i = 0; i < inst.x.size(); ++i) f << (i ? "," : "") << inst.x[i];
        f << '\n';
    }
}

std::vector<model::SortInstance> read_sort_csv(const std::string& path) {
    auto f = open_in(path, false);
    std::vector<model::SortInstance> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        model::SortInstance inst;
        inst.draw = out.size();
        for (const auto& c : split_csv(line)) inst.x.push_back(parse_double(c));
        if (!out.empty() && inst.x.size() != out[0].x.size()) throw FormatError("ragged csv");
        out.push_back(std::move(inst));
    }
    return out;
}

void write_dt_csv(const std::string& path, const std::vector<model::DtInstance>& v) {
    auto f = open_out(path, false);
    f << std::setprecision(17);
    for (const auto& inst : v) {
        for (std::size_t i = 0; i < inst.p.size(); ++i) f << (i ? "," : "") << inst.p[i].x << ',' << inst.p[i].y;
        f << '\n';
    }
}

std::vector<model::DtInstance> read_dt_csv(const std::string& path) {
    auto f = open_in(path, false);
    std::vector<model::DtInstance> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv(line);
        if (cells.size() % 2) throw FormatError("odd number of coordinates");
        model::DtInstance inst;
        inst.draw = out.size();
        for (std::size_t i = 0; i < cells.size(); i += 2) inst.p.push_back({parse_double(cells[i]), parse_double(cells[i + 1])});
        if (!out.empty() && inst.p.size() != out[0].p.size()) throw FormatError("ragged csv");
        out.push_back(std::move(inst));
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_vlist(std::ostream& os, const vlist::VList& v) {
    put_magic(os, "SIMPVLST");
    put<std::uint64_t>(os, v.n());
    put<std::uint64_t>(os, v.lambda);
    put<std::uint64_t>(os, v.duplicates);
    for (double p : v.pivots) put(os, p);
}

vlist::VList read_vlist(std::istream& is) {
    expect_magic(is, "SIMPVLST");
    vlist::VList v;
    auto n = get<std::uint64_t>(is);
    if (n > (1u << 28)) throw FormatError("implausible pivot count");
    v.lambda = get<std::uint64_t>(is);
    v.duplicates = get<std::uint64_t>(is);
    v.pivots.resize(n);
    for (auto& p : v.pivots) p = get<double>(is);
    if (!std::is_sorted(v.pivots.begin(), v.pivots.end())) throw FormatError("pivots out of order");
    return v;
}

void write_code(std::ostream& os, const encodings::Code& c) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(c.size()));
    for (auto x : c) put(os, x);
}

encodings::Code read_code(std::istream& is) {
    auto n = get<std::uint32_t>(is);
    if (n > (1u << 26)) throw FormatError("implausible code length");
    encodings::Code c(n);
    for (auto& x : c) x = get<std::uint32_t>(is);
    return c;
}

void write_label_trie(std::ostream& os, const trie::LabelTrie& t) {
    put_magic(os, "SIMPTRIE");
    put<std::uint32_t>(os, t.length());
    const auto& nodes = t.nodes();
    std::vector<std::int32_t> order, fresh(nodes.size(), -1), stack{0};
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        fresh[static_cast<std::size_t>(u)] = static_cast<std::int32_t>(order.size());
        order.push_back(u);
        const auto& kids = nodes[static_cast<std::size_t>(u)].kids;
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    put<std::uint64_t>(os, order.size());
    for (auto u : order) {
        const auto& nd = nodes[static_cast<std::size_t>(u)];
        put<std::uint32_t>(os, nd.label);
        put<std::int32_t>(os, nd.parent < 0 ? -1 : fresh[static_cast<std::size_t>(nd.parent)]);
        put<std::uint64_t>(os, nd.count);
    }
}

trie::LabelTrie read_label_trie(std::istream& is) {
    expect_magic(is, "SIMPTRIE");
    auto length = get<std::uint32_t>(is);
    auto count = get<std::uint64_t>(is);
    if (count == 0 || count > (1u << 30)) throw FormatError("implausible trie size");
    std::vector<trie::LabelTrie::Node> nodes(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto& nd = nodes[i];
        nd.label = get<std::uint32_t>(is);
        nd.parent = get<std::int32_t>(is);
        nd.count = get<std::uint64_t>(is);
        if ((i == 0) != (nd.parent < 0) || nd.parent >= static_cast<std::int64_t>(i)) throw FormatError("trie dump is not in preorder");
        if (i) {
            auto& par = nodes[static_cast<std::size_t>(nd.parent)];
            nd.depth = par.depth + 1;
            if (nd.depth > length) throw FormatError("trie dump deeper than its length");
            if (!par.kids.empty() && nodes[static_cast<std::size_t>(par.kids.back())].label >= nd.label)
                throw FormatError("trie kids out of order");
            par.kids.push_back(static_cast<std::int32_t>(i));
        }
    }
    return trie::LabelTrie::from_nodes(length, std::move(nodes));
}

// ---------------------------------------------------------------------------

void write_mesh(std::ostream& os, const geom::Mesh& m) {
    put_magic(os, "SIMPMESH");
    put_vec(os, m.pts);
    put_vec(os, m.ids);
    put_vec(os, m.tris);
    put_vec(os, m.adj);
    put_vec(os, m.boundary);
}

geom::Mesh read_mesh(std::istream& is) {
    expect_magic(is, "SIMPMESH");
    geom::Mesh m;
    m.pts = get_vec<Point>(is);
    m.ids = get_vec<std::uint32_t>(is);
    m.tris = get_vec<std::array<std::uint32_t, 3>>(is);
    m.adj = get_vec<std::array<std::int32_t, 3>>(is);
    m.boundary = get_vec<std::uint32_t>(is);
    const auto nv = m.pts.size();
    const auto nt = static_cast<std::int64_t>(m.tris.size());
    if (!m.ids.empty() && m.ids.size() != nv) throw FormatError("mesh: label count mismatch");
    if (m.adj.size() != m.tris.size()) throw FormatError("mesh: adjacency count mismatch");
    for (const auto& t : m.tris)
        for (auto v : t)
            if (v >= nv) throw FormatError("mesh: vertex index out of range");
    for (const auto& a : m.adj)
        for (auto o : a)
            if (o < -1 || o >= nt) throw FormatError("mesh: neighbour index out of range");
    for (auto v : m.boundary)
        if (v >= nv) throw FormatError("mesh: boundary index out of range");
    return m;
}

void write_mesh(const std::string& path, const geom::Mesh& m) {
    auto f = open_out(path);
    write_mesh(f, m);
}

geom::Mesh read_mesh(const std::string& path) {
    auto f = open_in(path);
    return read_mesh(f);
}

void write_off(const std::string& path, const geom::Mesh& m) {
    auto f = open_out(path, false);
    f << "OFF\n" << m.pts.size() << ' ' << m.tris.size() << " 0\n" << std::setprecision(17);
    for (const auto& p : m.pts) f << p.x << ' ' << p.y << " 0\n";
    for (const auto& t : m.tris) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

// ---------------------------------------------------------------------------

void write_split_tree(std::ostream& os, const splittree::SplitTree& t) {
    put_magic(os, "SIMPSPLT");
    put_vec(os, t.pts ? *t.pts : std::vector<Point>{});
    put<std::uint64_t>(os, t.nodes.size());
    for (const auto& nd : t.nodes) {
        put<std::int8_t>(os, static_cast<std::int8_t>(nd.axis));
        if (nd.leaf()) {
            put<std::uint32_t>(os, t.perm[nd.begin]);
        } else {
            const auto& l = t.nodes[static_cast<std::size_t>(nd.left)];
            put<std::uint32_t>(os, l.size());
            put<std::uint32_t>(os, nd.size() - l.size());
        }
    }
}

splittree::SplitTree read_split_tree(std::istream& is) {
    expect_magic(is, "SIMPSPLT");
    auto pts = std::make_shared<const std::vector<Point>>(get_vec<Point>(is));
    auto count = get<std::uint64_t>(is);
    if (count > 2 * pts->size()) throw FormatError("split tree: more nodes than points allow");
    std::vector<std::uint32_t> leaves, labels;
    struct Rec {
        int axis;
        std::uint32_t a, b;
    };
    std::vector<Rec> recs(count);
    for (auto& r : recs) {
        r.axis = get<std::int8_t>(is);
        if (r.axis < -1 || r.axis > 1) throw FormatError("split tree: bad axis");
        r.a = get<std::uint32_t>(is);
        r.b = r.axis < 0 ? 0 : get<std::uint32_t>(is);
    }
    if (count == 0) return splittree::SplitTree{pts, {}, {}};
    const auto m = count / 2 + 1;
    if (count != 2 * m - 1) throw FormatError("split tree: node count is not 2m - 1");
    for (const auto& r : recs) {
        if (r.axis < 0) {
            if (r.a >= pts->size()) throw FormatError("split tree: point id out of range");
            leaves.push_back(r.a);
        } else {
            labels.push_back(static_cast<std::uint32_t>(r.axis) * static_cast<std::uint32_t>(m) + r.a);
        }
    }
    if (leaves.size() != m) throw FormatError("split tree: leaf count mismatch");
    try {
        auto t = splittree::tree_from_labels(pts, leaves, labels);
        if (t.perm != leaves) throw FormatError("split tree: records disagree with the points");
        for (std::size_t u = 0; u < count; ++u) {
            const auto& nd = t.nodes[u];
            if (nd.leaf()) continue;
            if (recs[u].a != t.nodes[static_cast<std::size_t>(nd.left)].size() || recs[u].a + recs[u].b != nd.size())
                throw FormatError("split tree: child sizes disagree");
        }
        return t;
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("split tree: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

json to_json(const algebra::ApproxPartition& p) {
    return json{{"g0", p.g0},
                {"groups", p.groups},
                {"log", p.log},
                {"coupled_tests", p.coupled_tests},
                {"triple_tests", p.triple_tests}};
}

algebra::ApproxPartition partition_from_json(const json& j) {
    algebra::ApproxPartition p;
    try {
        p.g0 = j.at("g0").get<std::vector<std::uint32_t>>();
        p.groups = j.at("groups").get<model::Partition>();
        p.log = j.value("log", std::vector<std::string>{});
        p.coupled_tests = j.value("coupled_tests", std::size_t{0});
        p.triple_tests = j.value("triple_tests", std::size_t{0});
    } catch (const json::exception& e) {
        throw FormatError(std::string("partition: ") + e.what());
    }
    return p;
}

namespace {

void check_partition(const model::Partition& groups, const std::vector<std::uint32_t>& extra, std::size_t n) {
    std::vector<char> seen(n, 0);
    auto mark = [&](std::uint32_t i) {
        if (i >= n || seen[i]) throw FormatError("state: partition is not a partition of [0, n)");
        seen[i] = 1;
    };
    for (const auto& g : groups) {
        if (g.empty() || !std::is_sorted(g.begin(), g.end())) throw FormatError("state: group empty or unsorted");
        for (auto i : g) mark(i);
    }
    for (auto i : extra) mark(i);
    if (std::count(seen.begin(), seen.end(), 0)) throw FormatError("state: partition does not cover [0, n)");
}

json state_header(const std::string& mode, std::size_t n) {
    return json{{"mode", mode}, {"n", n}, {"format_version", kVersion}, {"build", build_id()}};
}

}  // namespace

std::string state_mode(const std::string& dir) {
    auto j = read_json((fs::path(dir) / "state.json").string());
    auto mode = j.value("mode", std::string());
    if (mode != "sort" && mode != "dt") throw FormatError("state: unknown mode '" + mode + "'");
    return mode;
}

void save_sort_state(const std::string& dir, const sorter::SorterState& st) {
    fs::create_directories(dir);
    auto j = state_header("sort", st.n);
    j["c0"] = st.c0;
    j["groups"] = st.groups;
    write_json((fs::path(dir) / "state.json").string(), j);
    {
        auto f = open_out((fs::path(dir) / "vlist.bin").string());
        write_vlist(f, st.v);
    }
    auto f = open_out((fs::path(dir) / "tries.bin").string());
    put_magic(f, "SIMPTRIS");
    put<std::uint64_t>(f, st.tries.size());
    for (const auto& t : st.tries) {
        put<std::uint64_t>(f, t.samples);
        write_label_trie(f, t.b.labels());
        write_label_trie(f, t.pi.labels());
    }
}

sorter::SorterState load_sort_state(const std::string& dir) {
    auto j = read_json((fs::path(dir) / "state.json").string());
    if (j.value("mode", std::string()) != "sort") throw FormatError("state: not a sort state");
    sorter::SorterState st;
    try {
        st.n = j.at("n").get<std::size_t>();
        st.c0 = j.at("c0").get<int>();
        st.groups = j.at("groups").get<model::Partition>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("state: ") + e.what());
    }
    check_partition(st.groups, {}, st.n);
    {
        auto f = open_in((fs::path(dir) / "vlist.bin").string());
        st.v = read_vlist(f);
    }
    auto f = open_in((fs::path(dir) / "tries.bin").string());
    expect_magic(f, "SIMPTRIS");
    if (get<std::uint64_t>(f) != st.groups.size()) throw FormatError("state: trie count does not match the groups");
    st.tries.resize(st.groups.size());
    for (std::size_t k = 0; k < st.tries.size(); ++k) {
        auto& t = st.tries[k];
        t.samples = get<std::uint64_t>(f);
        auto b = read_label_trie(f);
        auto pi = read_label_trie(f);
        if (b.length() != st.groups[k].size() || pi.length() != st.groups[k].size())
            throw FormatError("state: trie length does not match its group");
        t.b.labels() = std::move(b);
        t.pi.labels() = std::move(pi);
        t.b.freeze();
        t.pi.freeze();
    }
    return st;
}

void save_dt_state(const std::string& dir, const dtpipe::DtState& st) {
    fs::create_directories(dir);
    auto j = state_header("dt", st.n);
    j["partition"] = to_json(st.partition);
    json g0 = json::array();
    for (const auto& p : st.g0_points) g0.push_back({p.x, p.y});
    j["g0_points"] = g0;
    j["net_size"] = st.canonical.net.size();
    j["net_retries"] = st.canonical.retries;
    j["net_audit"] = {st.canonical.audit_disks, st.canonical.audit_misses};
    write_json((fs::path(dir) / "state.json").string(), j);
    write_mesh((fs::path(dir) / "canonical.mesh").string(), st.canonical.del);
    auto f = open_out((fs::path(dir) / "tries.bin").string());
    put_magic(f, "SIMPTRID");
    put<std::uint64_t>(f, st.tries.size());
    for (const auto& t : st.tries) {
        put<std::uint64_t>(f, t.samples);
        write_label_trie(f, t.b.labels());
        write_label_trie(f, t.pi.labels());
    }
}

dtpipe::DtState load_dt_state(const std::string& dir) {
    auto j = read_json((fs::path(dir) / "state.json").string());
    if (j.value("mode", std::string()) != "dt") throw FormatError("state: not a dt state");
    dtpipe::DtState st;
    std::size_t net_size = 0;
    try {
        st.n = j.at("n").get<std::size_t>();
        st.partition = partition_from_json(j.at("partition"));
        for (const auto& p : j.at("g0_points")) st.g0_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        net_size = j.at("net_size").get<std::size_t>();
        st.canonical.retries = j.value("net_retries", std::size_t{0});
        if (j.contains("net_audit")) {
            st.canonical.audit_disks = j["net_audit"].at(0).get<std::size_t>();
            st.canonical.audit_misses = j["net_audit"].at(1).get<std::size_t>();
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("state: ") + e.what());
    }
    check_partition(st.partition.groups, st.partition.g0, st.n);
    if (st.g0_points.size() != st.partition.g0.size()) throw FormatError("state: constant points do not match G0");
    auto& cv = st.canonical;
    cv.del = read_mesh((fs::path(dir) / "canonical.mesh").string());
    if (!cv.del.ids.empty()) throw FormatError("state: canonical mesh must be indexed by vertex");
    cv.v = cv.del.pts;
    if (!cv.v.empty()) {
        if (cv.v.size() != net_size + 3) throw FormatError("state: canonical vertex count mismatch");
        cv.net.assign(cv.v.begin(), cv.v.begin() + static_cast<std::ptrdiff_t>(net_size));
        for (int k = 0; k < 3; ++k) cv.huge[static_cast<std::size_t>(k)] = cv.v[net_size + static_cast<std::size_t>(k)];
    } else if (!st.partition.groups.empty()) {
        throw FormatError("state: missing canonical mesh");
    }
    auto f = open_in((fs::path(dir) / "tries.bin").string());
    expect_magic(f, "SIMPTRID");
    if (get<std::uint64_t>(f) != st.partition.groups.size()) throw FormatError("state: trie count does not match the groups");
    st.tries.resize(st.partition.groups.size());
    for (std::size_t k = 0; k < st.tries.size(); ++k) {
        auto& t = st.tries[k];
        const auto m = static_cast<std::uint32_t>(st.partition.groups[k].size());
        t.samples = get<std::uint64_t>(f);
        auto b = read_label_trie(f);
        auto pi = read_label_trie(f);
        if (b.length() != m || pi.length() != 3 * m - 1) throw FormatError("state: trie length does not match its group");
        t.b = trie::TriangleTrie(m);
        t.pi = trie::SplitOrderTrie(m);
        t.b.labels() = std::move(b);
        t.pi.labels() = std::move(pi);
        t.b.freeze(cv.del);
        t.pi.freeze();
    }
    dtpipe::finish_state(st);
    return st;
}

}  // namespace selfimp::io
