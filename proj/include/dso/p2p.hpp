#pragma once

// Peer-to-peer contracts and the net trade they impose on each prosumer.
//
// Quantities are held as integer kilowatts so that window balances are exact.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace dso {

class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Kilowatts = std::int64_t;

Kilowatts to_kw(double mw);
inline double to_mw(Kilowatts kw) { return static_cast<double>(kw) / 1000.0; }

struct Contract {
    int id = 0;
    int buyer = 0;
    int seller = 0;
    std::vector<Kilowatts> q_buy;
    std::vector<Kilowatts> q_sell;
    /// Balancing windows as lists of periods; empty means one window over the horizon.
    std::vector<std::vector<int>> windows;

    int horizon() const { return static_cast<int>(q_buy.size()); }
    /// Explicit windows, or the whole horizon as a single window.
    std::vector<std::vector<int>> effective_windows() const;
};

Contract make_contract(int id, int seller, int buyer, std::span<const double> q_sell_mw,
                       std::span<const double> q_buy_mw);

enum class ContractKind { Power, Energy, Invalid };

std::string_view contract_kind_name(ContractKind k);

struct Classification {
    ContractKind kind = ContractKind::Invalid;
    int window = -1;  // first unbalanced window (0-based) when invalid
    std::string reason;
};

/// Power: equal quantities in every period. Energy: equal totals in every
/// window. Anything else (including malformed contracts) is Invalid.
Classification classify(const Contract& c);

struct NetTradePlan {
    int n_prosumers = 0;
    int horizon = 0;
    std::vector<Kilowatts> pb;         // (i, t), seller-positive
    std::vector<Kilowatts> imbalance;  // (t) = sum_i pb

    NetTradePlan() = default;
    NetTradePlan(int n_p, int T) : n_prosumers(n_p), horizon(T), pb(n_p * T, 0), imbalance(T, 0) {}
    double pb_mw(int i, int t) const { return to_mw(pb[i * horizon + t]); }
    double imbalance_mw(int t) const { return to_mw(imbalance[t]); }
    bool is_zero() const;
    friend bool operator==(const NetTradePlan&, const NetTradePlan&) = default;
};

NetTradePlan operator+(const NetTradePlan& a, const NetTradePlan& b);

/// Sums sold minus bought quantities per prosumer. Throws ContractError naming
/// the first invalid contract or an out-of-range participant.
NetTradePlan net_trade(std::span<const Contract> book, int n_prosumers, int horizon);

/// Scales a base contract so that its peak purchase over the denominator
/// (buyer_load_min - flex_cap) equals each ratio. Quantities are rounded to kW
/// and the seller side is re-balanced per window so energy contracts stay valid
/// and power contracts stay power contracts.
std::vector<Contract> ratio_sweep(const Contract& base, double buyer_load_min, double flex_cap,
                                  std::span<const double> ratios);

/// Sum of min(q_sell, q_buy) over max(total sold, total bought); 1 for an empty contract.
double overlap_ratio(const Contract& c);

struct CommonPartSpec {
    int seller = 0;
    int buyer = 1;
    int first_id = 1;
};

/// Energy contracts between two profiles whose overlap ratio hits each target.
/// Both sides trade E = min(total seller, total buyer); the buyer takes its own
/// profile scaled to E, the seller delivers a blend of the two scaled profiles.
/// Throws ContractError for a target below the zero-blend overlap or above 1.
std::vector<Contract> common_part_sweep(std::span<const double> seller_profile,
                                        std::span<const double> buyer_profile, std::span<const double> ratios,
                                        const CommonPartSpec& spec = {});

void to_json(nlohmann::json& j, const Contract& c);
void from_json(const nlohmann::json& j, Contract& c);

/// Columns i,t,pb (MW).
void write_plan_csv(std::ostream& os, const NetTradePlan& plan);

}  // namespace dso
