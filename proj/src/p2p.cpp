#include "dso/p2p.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dso {

Kilowatts to_kw(double mw) {
    if (!std::isfinite(mw)) throw ContractError("contract quantity is not finite");
    return static_cast<Kilowatts>(std::llround(mw * 1000.0));
}

std::vector<std::vector<int>> Contract::effective_windows() const {
    if (!windows.empty()) return windows;
    std::vector<int> all(horizon());
    std::iota(all.begin(), all.end(), 0);
    return {all};
}

Contract make_contract(int id, int seller, int buyer, std::span<const double> q_sell_mw,
                       std::span<const double> q_buy_mw) {
    Contract c;
    c.id = id;
    c.seller = seller;
    c.buyer = buyer;
    for (double v : q_sell_mw) c.q_sell.push_back(to_kw(v));
    for (double v : q_buy_mw) c.q_buy.push_back(to_kw(v));
    return c;
}

std::string_view contract_kind_name(ContractKind k) {
    switch (k) {
        case ContractKind::Power: return "power";
        case ContractKind::Energy: return "energy";
        case ContractKind::Invalid: return "invalid";
    }
    return "?";
}

Classification classify(const Contract& c) {
    Classification out;
    auto invalid = [&](std::string why, int window = -1) {
        out.kind = ContractKind::Invalid;
        out.window = window;
        out.reason = std::move(why);
        return out;
    };
    if (c.buyer == c.seller) return invalid("buyer and seller are the same prosumer");
    if (c.buyer < 0 || c.seller < 0) return invalid("negative prosumer index");
    if (c.q_buy.size() != c.q_sell.size()) return invalid("q_buy and q_sell have different lengths");
    for (std::size_t t = 0; t < c.q_buy.size(); ++t) {
        if (c.q_buy[t] < 0 || c.q_sell[t] < 0) return invalid("negative quantity at t=" + std::to_string(t));
    }
    const auto wins = c.effective_windows();
    std::vector<int> covered(c.q_buy.size(), 0);
    for (std::size_t w = 0; w < wins.size(); ++w) {
        for (int t : wins[w]) {
            if (t < 0 || t >= c.horizon()) return invalid("window " + std::to_string(w + 1) + " leaves the horizon");
            ++covered[t];
        }
    }
    for (std::size_t t = 0; t < covered.size(); ++t) {
        if (covered[t] != 1) return invalid("windows do not partition the horizon at t=" + std::to_string(t));
    }
    for (std::size_t w = 0; w < wins.size(); ++w) {
        Kilowatts sb = 0, ss = 0;
        for (int t : wins[w]) {
            sb += c.q_buy[t];
            ss += c.q_sell[t];
        }
        if (sb != ss) {
            std::ostringstream os;
            os << "window " << w + 1 << " unbalanced: sold " << to_mw(ss) << " MWh, bought " << to_mw(sb) << " MWh";
            return invalid(os.str(), static_cast<int>(w));
        }
    }
    out.kind = c.q_buy == c.q_sell ? ContractKind::Power : ContractKind::Energy;
    return out;
}

bool NetTradePlan::is_zero() const {
    return std::all_of(pb.begin(), pb.end(), [](Kilowatts v) { return v == 0; });
}

NetTradePlan operator+(const NetTradePlan& a, const NetTradePlan& b) {
    if (a.n_prosumers != b.n_prosumers || a.horizon != b.horizon) throw ContractError("plan dimensions differ");
    NetTradePlan out = a;
    for (std::size_t k = 0; k < out.pb.size(); ++k) out.pb[k] += b.pb[k];
    for (std::size_t t = 0; t < out.imbalance.size(); ++t) out.imbalance[t] += b.imbalance[t];
    return out;
}

NetTradePlan net_trade(std::span<const Contract> book, int n_prosumers, int horizon) {
    NetTradePlan plan(n_prosumers, horizon);
    for (const Contract& c : book) {
        const Classification cl = classify(c);
        const std::string name = "contract " + std::to_string(c.id);
        if (cl.kind == ContractKind::Invalid) throw ContractError(name + " is invalid: " + cl.reason);
        if (c.horizon() != horizon) throw ContractError(name + " does not span the horizon");
        if (c.buyer >= n_prosumers || c.seller >= n_prosumers) throw ContractError(name + " references a missing prosumer");
        for (int t = 0; t < horizon; ++t) {
            plan.pb[c.seller * horizon + t] += c.q_sell[t];
            plan.pb[c.buyer * horizon + t] -= c.q_buy[t];
            plan.imbalance[t] += c.q_sell[t] - c.q_buy[t];
        }
    }
    return plan;
}

namespace {

// Moves the rounding residual of each window onto the seller's largest entry.
void rebalance_seller(Contract& c) {
    for (const auto& win : c.effective_windows()) {
        Kilowatts diff = 0;
        for (int t : win) diff += c.q_buy[t] - c.q_sell[t];
        if (diff == 0 || win.empty()) continue;
        int best = win.front();
        for (int t : win) {
            if (c.q_sell[t] > c.q_sell[best]) best = t;
        }
        c.q_sell[best] += diff;
        if (c.q_sell[best] < 0) throw ContractError("rounding residual exceeds the seller quantity");
    }
}

}  // namespace

std::vector<Contract> ratio_sweep(const Contract& base, double buyer_load_min, double flex_cap,
                                  std::span<const double> ratios) {
    const double denom = buyer_load_min - flex_cap;
    if (!(denom > 0.0)) throw ContractError("ratio denominator (buyer load minus curtailment cap) is not positive");
    const Classification cl = classify(base);
    if (cl.kind == ContractKind::Invalid) throw ContractError("base contract is invalid: " + cl.reason);
    const Kilowatts peak = base.q_buy.empty() ? 0 : *std::max_element(base.q_buy.begin(), base.q_buy.end());
    if (peak <= 0) throw ContractError("base contract buys nothing");
    const bool power = cl.kind == ContractKind::Power;

    std::vector<Contract> out;
    for (double ratio : ratios) {
        if (!(ratio >= 0.0)) throw ContractError("trading ratio must be nonnegative");
        const double factor = ratio * denom / to_mw(peak);
        Contract c = base;
        for (int t = 0; t < base.horizon(); ++t) {
            c.q_buy[t] = to_kw(to_mw(base.q_buy[t]) * factor);
            c.q_sell[t] = power ? c.q_buy[t] : to_kw(to_mw(base.q_sell[t]) * factor);
        }
        if (!power) rebalance_seller(c);
        out.push_back(std::move(c));
    }
    return out;
}

double overlap_ratio(const Contract& c) {
    Kilowatts common = 0, sold = 0, bought = 0;
    for (int t = 0; t < c.horizon(); ++t) {
        common += std::min(c.q_sell[t], c.q_buy[t]);
        sold += c.q_sell[t];
        bought += c.q_buy[t];
    }
    const Kilowatts den = std::max(sold, bought);
    return den == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(den);
}

std::vector<Contract> common_part_sweep(std::span<const double> seller_profile,
                                        std::span<const double> buyer_profile, std::span<const double> ratios,
                                        const CommonPartSpec& spec) {
    const std::size_t T = seller_profile.size();
    if (buyer_profile.size() != T || T == 0) throw ContractError("profiles must have the same nonzero length");
    double es = 0.0, eb = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (seller_profile[t] < 0.0 || buyer_profile[t] < 0.0) throw ContractError("profiles must be nonnegative");
        es += seller_profile[t];
        eb += buyer_profile[t];
    }
    if (!(es > 0.0) || !(eb > 0.0)) throw ContractError("profiles must carry positive energy");
    const double energy = std::min(es, eb);
    std::vector<double> a(T), b(T);
    for (std::size_t t = 0; t < T; ++t) {
        a[t] = seller_profile[t] * energy / es;
        b[t] = buyer_profile[t] * energy / eb;
    }
    auto overlap = [&](double lam) {
        double common = 0.0;
        for (std::size_t t = 0; t < T; ++t) common += std::min(lam * b[t] + (1.0 - lam) * a[t], b[t]);
        return common / energy;
    };
    const double floor_ratio = overlap(0.0);

    std::vector<Contract> out;
    int id = spec.first_id;
    for (double target : ratios) {
        if (target > 1.0 + 1e-12 || target < floor_ratio - 1e-9) {
            std::ostringstream os;
            os << "common-part ratio " << target << " is unreachable; the profiles allow [" << floor_ratio << ", 1]";
            throw ContractError(os.str());
        }
        double lo = 0.0, hi = 1.0;
        if (target >= 1.0) {
            lo = 1.0;
        } else {
            for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                (overlap(mid) < target ? lo : hi) = mid;
            }
        }
        const double lam = target >= 1.0 ? 1.0 : hi;
        Contract c;
        c.id = id++;
        c.seller = spec.seller;
        c.buyer = spec.buyer;
        for (std::size_t t = 0; t < T; ++t) {
            c.q_buy.push_back(to_kw(b[t]));
            c.q_sell.push_back(lam == 1.0 ? c.q_buy.back() : to_kw(lam * b[t] + (1.0 - lam) * a[t]));
        }
        rebalance_seller(c);
        out.push_back(std::move(c));
    }
    return out;
}

void to_json(nlohmann::json& j, const Contract& c) {
    std::vector<double> qb, qs;
    for (Kilowatts v : c.q_buy) qb.push_back(to_mw(v));
    for (Kilowatts v : c.q_sell) qs.push_back(to_mw(v));
    j = nlohmann::json{{"id", c.id}, {"buyer", c.buyer}, {"seller", c.seller}, {"q_buy", qb}, {"q_sell", qs}};
    if (!c.windows.empty()) j["windows"] = c.windows;
}

void from_json(const nlohmann::json& j, Contract& c) {
    c = Contract{};
    j.at("id").get_to(c.id);
    j.at("buyer").get_to(c.buyer);
    j.at("seller").get_to(c.seller);
    for (double v : j.at("q_buy").get<std::vector<double>>()) c.q_buy.push_back(to_kw(v));
    for (double v : j.at("q_sell").get<std::vector<double>>()) c.q_sell.push_back(to_kw(v));
    if (j.contains("windows")) j.at("windows").get_to(c.windows);
}

void write_plan_csv(std::ostream& os, const NetTradePlan& plan) {
    os << "i,t,pb\n";
    for (int i = 0; i < plan.n_prosumers; ++i) {
        for (int t = 0; t < plan.horizon; ++t) os << i << ',' << t << ',' << plan.pb_mw(i, t) << '\n';
    }
}

}  // namespace dso
