#pragma once

// Subcommands of the dso command-line tool. Each returns the process exit
// status: 0 ok, 1 infeasible / unbounded / theorem violated, 2 error.

#include "dso/analysis.hpp"
#include "dso/case.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dso::cli {

enum ExitCode : int { kOk = 0, kInfeasible = 1, kError = 2 };

/// Settings shared by every command that loads a case.
struct CaseArgs {
    std::filesystem::path case_path;
    std::optional<int> n_scenarios;
    std::optional<std::uint64_t> seed;
    std::optional<int> reduce_to;
};

struct RunArgs {
    CaseArgs in;
    std::filesystem::path out_dir;
    bool write_cbf = false;
};

struct SweepArgs {
    CaseArgs in;
    SweepKind kind = SweepKind::Power;
    std::vector<double> ratios;
    std::filesystem::path out_dir;
    int threads = 0;
};

struct VerifyArgs {
    CaseArgs in;
    std::filesystem::path contracts_path;
    std::filesystem::path out_dir;
};

struct GenScenariosArgs {
    CaseArgs in;
    std::filesystem::path out_file;
};

struct MakeFixtureArgs {
    std::string name;  // two_bus | ukgds95
    std::filesystem::path out_file;
};

int run(const RunArgs& a);
int sweep(const SweepArgs& a);
int verify(const VerifyArgs& a);
int gen_scenarios(const GenScenariosArgs& a);
int make_fixture(const MakeFixtureArgs& a);

/// "a:b:step" -> a, a+step, ..., b (inclusive within step/1000). Also accepts a
/// comma-separated list. Throws std::invalid_argument.
std::vector<double> parse_ratios(const std::string& spec);

std::optional<SweepKind> parse_sweep_kind(std::string_view s);

/// Contract list from a JSON file: either an array or {"contracts": [...]}.
std::vector<Contract> load_contracts(const std::filesystem::path& path);

}  // namespace dso::cli
