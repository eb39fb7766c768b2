#include "doctest.h"

#include "dso/p2p.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace dso;

namespace {

// 20 MWh sold during hours 8..19 against 20 MWh bought flat over the day
std::vector<double> daytime_20mwh() {
    std::vector<double> q(24, 0.0);
    const double w[12] = {1, 2, 3, 4, 5, 6, 6, 5, 4, 3, 2, 1};
    const double sum = 42.0;
    for (int k = 0; k < 12; ++k) q[8 + k] = 20.0 * w[k] / sum;
    return q;
}

std::vector<double> flat(double mw, int T = 24) { return std::vector<double>(T, mw); }

Kilowatts sum(const std::vector<Kilowatts>& v) { return std::accumulate(v.begin(), v.end(), Kilowatts{0}); }

}  // namespace

TEST_CASE("daily 20 MWh with different hourly profiles is an energy contract") {
    const Contract c = make_contract(1, 0, 1, daytime_20mwh(), flat(20.0 / 24.0));
    // kW rounding of 20/24 leaves 20.000 - 24 * 0.833 = 0.008 MWh; rebalance by hand
    Contract d = c;
    d.q_buy[0] += sum(d.q_sell) - sum(d.q_buy);
    CHECK(classify(d).kind == ContractKind::Energy);
}

TEST_CASE("element-wise equal quantities form a power contract") {
    const Contract c = make_contract(1, 0, 1, flat(1.5, 4), flat(1.5, 4));
    CHECK(classify(c).kind == ContractKind::Power);
}

TEST_CASE("unequal window totals are invalid and name the first window") {
    const std::vector<double> sell{2, 2}, buy{1, 2};
    const Contract c = make_contract(7, 0, 1, sell, buy);
    const Classification cl = classify(c);
    CHECK(cl.kind == ContractKind::Invalid);
    CHECK(cl.window == 0);
    CHECK(cl.reason.find('4') != std::string::npos);
    CHECK(cl.reason.find('3') != std::string::npos);
}

TEST_CASE("windows split the balance requirement") {
    const std::vector<double> sell{2, 0, 1, 1}, buy{1, 1, 2, 0};
    Contract c = make_contract(1, 0, 1, sell, buy);
    c.windows = {{0, 1}, {2, 3}};
    CHECK(classify(c).kind == ContractKind::Energy);
    c.windows = {{0, 3}, {1, 2}};
    const Classification cl = classify(c);
    CHECK(cl.kind == ContractKind::Invalid);
    CHECK(cl.window == 0);
}

TEST_CASE("malformed contracts are invalid") {
    Contract self = make_contract(1, 0, 0, flat(1, 2), flat(1, 2));
    CHECK(classify(self).kind == ContractKind::Invalid);
    Contract ragged = make_contract(1, 0, 1, flat(1, 2), flat(1, 3));
    CHECK(classify(ragged).kind == ContractKind::Invalid);
    Contract neg = make_contract(1, 0, 1, flat(1, 2), flat(1, 2));
    neg.q_buy[0] = -1;
    CHECK(classify(neg).kind == ContractKind::Invalid);
}

TEST_CASE("net trade of an empty book is zero") {
    const NetTradePlan plan = net_trade({}, 3, 4);
    CHECK(plan.is_zero());
    CHECK(plan.pb == std::vector<Kilowatts>(12, 0));
    CHECK(plan.imbalance == std::vector<Kilowatts>(4, 0));
}

TEST_CASE("net trade of one energy contract") {
    const std::vector<double> sell{2, 2}, buy{1, 3};
    const std::vector<Contract> book{make_contract(1, 0, 1, sell, buy)};
    const NetTradePlan plan = net_trade(book, 2, 2);
    CHECK(plan.pb_mw(0, 0) == 2.0);
    CHECK(plan.pb_mw(0, 1) == 2.0);
    CHECK(plan.pb_mw(1, 0) == -1.0);
    CHECK(plan.pb_mw(1, 1) == -3.0);
    CHECK(plan.imbalance_mw(0) == 1.0);
    CHECK(plan.imbalance_mw(1) == -1.0);
}

TEST_CASE("power books have zero imbalance, and net trade is additive") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> who(0, 4);
    std::uniform_real_distribution<double> q(0.0, 2.0);
    std::vector<Contract> book;
    for (int k = 0; k < 30; ++k) {
        int s = who(rng), b = who(rng);
        while (b == s) b = who(rng);
        std::vector<double> v(6);
        for (double& x : v) x = q(rng);
        book.push_back(make_contract(k, s, b, v, v));
    }
    const NetTradePlan all = net_trade(book, 5, 6);
    for (Kilowatts x : all.imbalance) CHECK(x == 0);
    const std::span<const Contract> whole(book);
    const NetTradePlan a = net_trade(whole.subspan(0, 13), 5, 6);
    const NetTradePlan b = net_trade(whole.subspan(13), 5, 6);
    CHECK((a + b) == all);
}

TEST_CASE("net trade rejects invalid contracts and missing prosumers by id") {
    const std::vector<double> sell{2, 2}, buy{1, 2};
    const std::vector<Contract> bad{make_contract(42, 0, 1, sell, buy)};
    CHECK_THROWS_WITH_AS(net_trade(bad, 2, 2), doctest::Contains("42"), ContractError);
    const std::vector<Contract> far{make_contract(5, 0, 9, flat(1, 2), flat(1, 2))};
    CHECK_THROWS_WITH_AS(net_trade(far, 2, 2), doctest::Contains("5"), ContractError);
    CHECK_THROWS_AS(net_trade(far, 2, 3), ContractError);
}

TEST_CASE("ratio sweep: zero ratio, unit ratio and linear scaling") {
    const Contract base = make_contract(1, 0, 1, flat(1.0), flat(1.0));
    const double load_min = 2.4, flex = 0.25, denom = load_min - flex;
    const std::vector<double> ratios{0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.3};
    const std::vector<Contract> out = ratio_sweep(base, load_min, flex, ratios);
    REQUIRE(out.size() == ratios.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        CHECK(classify(out[k]).kind == ContractKind::Power);
        const NetTradePlan plan = net_trade(std::span<const Contract>(&out[k], 1), 2, 24);
        const double peak = -plan.pb_mw(1, 0);
        // ratio recomputed from the output, within kW rounding
        CHECK(std::abs(peak / denom - ratios[k]) <= 0.5e-3 / denom + 1e-12);
    }
    CHECK(net_trade(std::span<const Contract>(&out[0], 1), 2, 24).is_zero());
    CHECK(std::abs(to_mw(out[5].q_buy[0]) - denom) <= 0.5e-3);
}

TEST_CASE("ratio sweep keeps energy contracts balanced") {
    std::vector<double> day(24, 0.0);
    for (int t = 8; t < 20; ++t) day[t] = 2.0;
    const Contract base = make_contract(2, 0, 1, day, flat(1.0));
    const std::vector<double> ratios{0.0, 0.33, 0.71, 1.0};
    for (const Contract& c : ratio_sweep(base, 2.4, 0.25, ratios)) {
        CHECK(classify(c).kind != ContractKind::Invalid);
        CHECK(sum(c.q_buy) == sum(c.q_sell));
    }
}

TEST_CASE("ratio sweep rejects a nonpositive denominator") {
    const Contract base = make_contract(1, 0, 1, flat(1.0), flat(1.0));
    const std::vector<double> ratios{0.5};
    CHECK_THROWS_AS(ratio_sweep(base, 0.2, 0.25, ratios), ContractError);
    CHECK_THROWS_AS(ratio_sweep(base, 0.25, 0.25, ratios), ContractError);
}

TEST_CASE("common part: identical profiles give a power contract at ratio 1") {
    const std::vector<double> prof{0.5, 1.0, 1.5, 1.0};
    const std::vector<double> ratios{1.0};
    const auto out = common_part_sweep(prof, prof, ratios);
    REQUIRE(out.size() == 1);
    CHECK(classify(out[0]).kind == ContractKind::Power);
    CHECK(overlap_ratio(out[0]) == doctest::Approx(1.0));
}

TEST_CASE("common part: disjoint supports give an energy contract at ratio 0") {
    const std::vector<double> seller{0, 2, 2, 0}, buyer{1, 0, 0, 3};
    const std::vector<double> ratios{0.0, 0.5, 1.0};
    const auto out = common_part_sweep(seller, buyer, ratios);
    CHECK(classify(out[0]).kind == ContractKind::Energy);
    CHECK(overlap_ratio(out[0]) == 0.0);
    CHECK(overlap_ratio(out[1]) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(classify(out[2]).kind == ContractKind::Power);
    const std::vector<double> too_high{1.1};
    CHECK_THROWS_AS(common_part_sweep(seller, buyer, too_high), ContractError);
}

TEST_CASE("common part: daytime seller against a flat buyer overlaps in hours 8..19") {
    const std::vector<double> seller = daytime_20mwh();
    const std::vector<double> buyer = flat(20.0 / 24.0);
    const std::vector<double> ratios{0.5};
    Contract c = make_contract(1, 0, 1, seller, buyer);
    for (int t = 0; t < 24; ++t) {
        const bool common = std::min(c.q_sell[t], c.q_buy[t]) > 0;
        CHECK(common == (t >= 8 && t <= 19));
    }
    const double r = overlap_ratio(c);
    CHECK(r > 0.0);
    CHECK(r < 1.0);
    // a target below the zero-blend overlap is unreachable
    CHECK_THROWS_AS(common_part_sweep(seller, buyer, std::vector<double>{r / 2}), ContractError);
    const auto out = common_part_sweep(seller, buyer, ratios);
    CHECK(overlap_ratio(out[0]) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(classify(out[0]).kind == ContractKind::Energy);
}

TEST_CASE("contracts round-trip through JSON") {
    Contract c = make_contract(9, 2, 0, std::vector<double>{0.5, 0.25, 0}, std::vector<double>{0.25, 0.5, 0});
    c.windows = {{0, 1}, {2}};
    nlohmann::json j = c;
    const Contract back = j.get<Contract>();
    CHECK(back.id == 9);
    CHECK(back.seller == 2);
    CHECK(back.buyer == 0);
    CHECK(back.q_sell == c.q_sell);
    CHECK(back.q_buy == c.q_buy);
    CHECK(back.windows == c.windows);
}

TEST_CASE("plan CSV lists every prosumer and period") {
    const std::vector<double> sell{2, 2}, buy{1, 3};
    const std::vector<Contract> book{make_contract(1, 0, 1, sell, buy)};
    std::ostringstream os;
    write_plan_csv(os, net_trade(book, 2, 2));
    const std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 5);
    CHECK(s.rfind("i,t,pb", 0) == 0);
}
