#pragma once

#include "selfimp/algebra.hpp"
#include "selfimp/dtpipe.hpp"
#include "selfimp/geom.hpp"
#include "selfimp/model.hpp"
#include "selfimp/sorter.hpp"
#include "selfimp/splittree.hpp"
#include "selfimp/trie.hpp"
#include "selfimp/vlist.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

// Binary files are little-endian: an 8-byte magic, a u32 version, then the payload.
// Readers throw FormatError on a wrong magic, version or a truncated file.
namespace selfimp::io {

constexpr std::uint32_t kVersion = 1;

struct ModelSpec {
    std::string mode = "sort";  // sort | dt
    model::SortSpec sort;
    model::DtSpec dt;
    std::uint64_t seed = 1;
    bool allow_degenerate = false;
};

nlohmann::json to_json(const ModelSpec& s);
ModelSpec model_spec_from_json(const nlohmann::json& j);
ModelSpec read_model_spec(const std::string& path);
void write_model_spec(const std::string& path, const ModelSpec& s);

// Instance streams: header (magic, version, n, count) then row-major doubles;
// dt rows are x0 y0 x1 y1 ...
void write_sort_instances(const std::string& path, const std::vector<model::SortInstance>& v);
std::vector<model::SortInstance> read_sort_instances(const std::string& path);
void write_dt_instances(const std::string& path, const std::vector<model::DtInstance>& v);
std::vector<model::DtInstance> read_dt_instances(const std::string& path);

// One instance per line.
void write_sort_csv(const std::string& path, const std::vector<model::SortInstance>& v);
std::vector<model::SortInstance> read_sort_csv(const std::string& path);
void write_dt_csv(const std::string& path, const std::vector<model::DtInstance>& v);
std::vector<model::DtInstance> read_dt_csv(const std::string& path);

void write_vlist(std::ostream& os, const vlist::VList& v);
vlist::VList read_vlist(std::istream& is);

// Length-prefixed u32 arrays.
void write_code(std::ostream& os, const encodings::Code& c);
encodings::Code read_code(std::istream& is);

// Preorder node dump (label, parent, count); kids and depths are rebuilt.
void write_label_trie(std::ostream& os, const trie::LabelTrie& t);
trie::LabelTrie read_label_trie(std::istream& is);

void write_mesh(std::ostream& os, const geom::Mesh& m);
geom::Mesh read_mesh(std::istream& is);
void write_mesh(const std::string& path, const geom::Mesh& m);
geom::Mesh read_mesh(const std::string& path);
void write_off(const std::string& path, const geom::Mesh& m);

// Point table, then preorder records: axis (-1 for a leaf), then the left and
// right sizes of an internal node or the point id of a leaf.
void write_split_tree(std::ostream& os, const splittree::SplitTree& t);
splittree::SplitTree read_split_tree(std::istream& is);

nlohmann::json to_json(const algebra::ApproxPartition& p);
algebra::ApproxPartition partition_from_json(const nlohmann::json& j);

// States are directories: state.json plus binary parts.
void save_sort_state(const std::string& dir, const sorter::SorterState& st);
sorter::SorterState load_sort_state(const std::string& dir);
void save_dt_state(const std::string& dir, const dtpipe::DtState& st);
dtpipe::DtState load_dt_state(const std::string& dir);

// "sort" or "dt", from a state directory.
std::string state_mode(const std::string& dir);

}  // namespace selfimp::io
