#pragma once

#include "selfimp/dtpipe.hpp"
#include "selfimp/serialize.hpp"
#include "selfimp/sorter.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selfimp::harness {

// A scaled constant: the theoretical value (a number, or a formula when it depends
// on n) next to the value actually used. desk_value 0 selects the desk formula
// where one exists.
struct Knob {
    nlohmann::json paper_value;
    double desk_value = 0;
    double lo = 0, hi = 0;  // accepted desk range
    bool zero_ok = false;   // 0 means "desk formula"
    std::string note;
};

std::map<std::string, Knob> default_knobs();

struct RunConfig {
    std::string mode = "sort";
    io::ModelSpec model;
    std::uint64_t seed = 1;
    std::size_t instances = 200;
    std::string out = "selfimp_out";
    Exec exec = Exec::Parallel;
    bool csv = false;
    std::map<std::string, Knob> knobs = default_knobs();

    double knob(const std::string& name) const;
};

// Defaults, then the file (if any). A knob entry in a file must carry both
// paper_value and desk_value.
RunConfig default_config(const std::string& mode = "sort");
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// SELFIMP_SEED, SELFIMP_MODE, SELFIMP_OUT, SELFIMP_INSTANCES and
// SELFIMP_KNOB_<NAME> (desk value). getenv is injectable for tests.
using EnvLookup = std::function<const char*(const char*)>;
void apply_env(RunConfig& cfg, const EnvLookup& env);

// Mode switch keeps the model spec's mode in step.
void set_mode(RunConfig& cfg, const std::string& mode);

// Throws InvalidArgument naming the offending field.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);

sorter::Config sort_config(const RunConfig& cfg);
dtpipe::Config dt_config(const RunConfig& cfg);

// Independent streams derived from the run seed.
enum class Stream : std::uint64_t { Model = 0, Train = 1, Instances = 2, Bench = 3 };
std::uint64_t stream_seed(std::uint64_t seed, Stream s);

// JSON-lines file; the first record is the header with the config echo and the
// build id. With csv, scalar fields of the later records also go to <path>.csv.
class Metrics {
public:
    Metrics(const std::string& path, const RunConfig& cfg, const std::string& command);
    ~Metrics();
    void record(const nlohmann::json& rec);

private:
    std::ofstream jl_;
    std::string csv_path_;
    bool csv_;
    nlohmann::json header_;
    std::vector<nlohmann::json> rows_;
};

struct GenArgs {
    std::optional<std::size_t> count;
};

struct TrainArgs {
    std::string in;  // instance file; empty draws from the model
};

struct OperateArgs {
    std::string state, in;
    bool check = false;
    bool off = false;  // write the first DT output as OFF
};

struct BenchArgs {
    std::string state, in;
    std::optional<std::size_t> count;
};

struct VerifyArgs {
    bool full = false;
    std::vector<int> only;
};

// Each returns the process exit status: 0 success, 1 a failed check, and throws
// on errors (mapped to exit codes by the CLI).
int cmd_gen(const RunConfig& cfg, const GenArgs& a, std::ostream& log);
int cmd_train(const RunConfig& cfg, const TrainArgs& a, std::ostream& log);
int cmd_operate(const RunConfig& cfg, const OperateArgs& a, std::ostream& log);
int cmd_bench(const RunConfig& cfg, const BenchArgs& a, std::ostream& log);
int cmd_verify(const RunConfig& cfg, const VerifyArgs& a, std::ostream& log);

// Exit status for an exception escaping a command; writes the message to err.
int exit_code_for(const std::exception& e, std::ostream& err);

}  // namespace selfimp::harness
