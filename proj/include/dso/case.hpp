#pragma once

// Case files: network, prosumers, prices, forecasts and uncertainty, contract
// book, sweep bases and run options, with JSON I/O and the bundled fixtures.

#include "dso/model.hpp"
#include "dso/p2p.hpp"
#include "dso/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace dso {

/// Schema or cross-reference error; the message starts with a JSON pointer.
class CaseError : public std::runtime_error {
public:
    CaseError(const std::string& pointer, const std::string& what)
        : std::runtime_error(pointer + ": " + what), pointer_(pointer) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

struct CommonPartBase {
    int seller = 0;
    int buyer = 1;
    std::vector<double> seller_profile;  // MW
    std::vector<double> buyer_profile;   // MW
};

struct SweepBases {
    std::optional<Contract> power;
    std::optional<Contract> energy;
    std::optional<CommonPartBase> common_part;
};

struct CaseOptions {
    int n_scenarios = 10;
    std::uint64_t seed = 1;
    int reduce_to = 0;  // 0 keeps every generated scenario
    double theorem_tol = 1e-5;
    SolveOptions solver;
};

struct CaseFile {
    std::string name;
    std::string description;
    int horizon = 24;
    Network network;
    std::vector<ProsumerParams> prosumers;
    Prices prices;
    Forecast forecast;
    double sigma_pv = 0.0;
    double sigma_d = 0.0;
    std::string scenario_file;  // optional CSV, relative to the case file
    std::vector<Contract> contracts;
    SweepBases sweep;
    CaseOptions options;
};

nlohmann::json case_to_json(const CaseFile& c);
CaseFile case_from_json(const nlohmann::json& j);

CaseFile load_case(const std::filesystem::path& path);
void save_case(const std::filesystem::path& path, const CaseFile& c);

/// Cross-reference checks beyond the schema (dimensions, network structure,
/// prosumer parameters, contracts). Throws CaseError.
void validate_case(const CaseFile& c);

/// Scenarios from the explicit CSV when given, otherwise generated from the
/// forecast and reduced when requested.
ScenarioSet case_scenarios(const CaseFile& c, const std::filesystem::path& base_dir = {});

Instance make_instance(const CaseFile& c, const std::filesystem::path& base_dir = {});
Instance make_instance(const CaseFile& c, ScenarioSet scenarios);

/// Smallest buyer load over the scenarios and the buyer's largest curtailment
/// cap: the denominator inputs of the trading ratio.
struct RatioBasis {
    double buyer_load_min = 0.0;
    double flex_cap = 0.0;
};
RatioBasis ratio_basis(const Instance& inst, int buyer);

/// Lower-case hex SHA-256 of a byte string / file.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Two prosumers at the ends of one branch; DER ratings from the published
/// table, synthetic 24 h price, PV and load profiles.
CaseFile make_two_bus_case();

/// 95-bus radial feeder with 18 prosumers; synthetic impedances.
CaseFile make_ukgds95_case();

}  // namespace dso
