#include "dso/case.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dso {

using nlohmann::json;

namespace {

// Typed access into a JSON document that reports failures by JSON pointer.
class Node {
public:
    Node(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {}

    const std::string& ptr() const { return ptr_; }
    const json& raw() const { return j_; }
    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    Node at(const char* key) const {
        if (!j_.is_object()) throw CaseError(ptr_, "expected an object");
        if (!j_.contains(key)) throw CaseError(ptr_ + "/" + key, "required field is missing");
        return Node(j_.at(key), ptr_ + "/" + key);
    }
    Node at(std::size_t k) const { return Node(j_.at(k), ptr_ + "/" + std::to_string(k)); }

    std::size_t array_size() const {
        if (!j_.is_array()) throw CaseError(ptr_, "expected an array");
        return j_.size();
    }
    double num() const {
        if (!j_.is_number()) throw CaseError(ptr_, "expected a number");
        const double v = j_.get<double>();
        if (!std::isfinite(v)) throw CaseError(ptr_, "number is not finite");
        return v;
    }
    int integer() const {
        if (!j_.is_number_integer()) throw CaseError(ptr_, "expected an integer");
        return j_.get<int>();
    }
    std::uint64_t uint64() const {
        if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0)) {
            throw CaseError(ptr_, "expected a nonnegative integer");
        }
        return j_.get<std::uint64_t>();
    }
    bool boolean() const {
        if (!j_.is_boolean()) throw CaseError(ptr_, "expected true or false");
        return j_.get<bool>();
    }
    std::string str() const {
        if (!j_.is_string()) throw CaseError(ptr_, "expected a string");
        return j_.get<std::string>();
    }
    std::vector<double> nums() const {
        std::vector<double> out(array_size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k).num();
        return out;
    }

    double num_or(const char* key, double def) const { return has(key) ? at(key).num() : def; }
    int int_or(const char* key, int def) const { return has(key) ? at(key).integer() : def; }
    std::string str_or(const char* key, std::string def) const { return has(key) ? at(key).str() : def; }

private:
    const json& j_;
    std::string ptr_;
};

json contract_json(const Contract& c) {
    json j;
    to_json(j, c);
    return j;
}

Contract read_contract(const Node& n) {
    Contract c;
    c.id = n.at("id").integer();
    c.buyer = n.at("buyer").integer();
    c.seller = n.at("seller").integer();
    const Node qb = n.at("q_buy"), qs = n.at("q_sell");
    for (std::size_t k = 0; k < qb.array_size(); ++k) c.q_buy.push_back(to_kw(qb.at(k).num()));
    for (std::size_t k = 0; k < qs.array_size(); ++k) c.q_sell.push_back(to_kw(qs.at(k).num()));
    if (n.has("windows")) {
        const Node w = n.at("windows");
        for (std::size_t k = 0; k < w.array_size(); ++k) {
            const Node win = w.at(k);
            std::vector<int> periods;
            for (std::size_t m = 0; m < win.array_size(); ++m) periods.push_back(win.at(m).integer());
            c.windows.push_back(std::move(periods));
        }
    }
    return c;
}

json prosumer_json(const ProsumerParams& p) {
    json j = {{"i", p.i},
              {"pg_min", p.pg_min},
              {"pg_max", p.pg_max},
              {"msr", p.msr},
              {"ru", p.ru},
              {"rd", p.rd},
              {"pd_flex_max", p.pd_flex_max},
              {"ps_max", p.ps_max},
              {"eta", p.eta},
              {"q_cap", p.q_cap},
              {"q_min", p.q_min},
              {"alpha_g", p.alpha_g},
              {"beta_g", p.beta_g},
              {"alpha_s", p.alpha_s},
              {"beta_s", p.beta_s},
              {"alpha_u", p.alpha_u},
              {"beta_u", p.beta_u}};
    if (p.pg_init) j["pg_init"] = *p.pg_init;
    if (p.q_init) j["q_init"] = *p.q_init;
    return j;
}

ProsumerParams read_prosumer(const Node& n) {
    ProsumerParams p;
    p.i = n.at("i").integer();
    p.pg_min = n.num_or("pg_min", 0.0);
    p.pg_max = n.num_or("pg_max", 0.0);
    p.msr = n.num_or("msr", 0.0);
    p.ru = n.num_or("ru", 0.0);
    p.rd = n.num_or("rd", 0.0);
    if (n.has("pg_init")) p.pg_init = n.at("pg_init").num();
    if (n.has("pd_flex_max")) p.pd_flex_max = n.at("pd_flex_max").nums();
    p.ps_max = n.num_or("ps_max", 0.0);
    p.eta = n.num_or("eta", 1.0);
    p.q_cap = n.num_or("q_cap", 0.0);
    p.q_min = n.num_or("q_min", 0.0);
    if (n.has("q_init")) p.q_init = n.at("q_init").num();
    p.alpha_g = n.num_or("alpha_g", 0.0);
    p.beta_g = n.num_or("beta_g", 0.0);
    p.alpha_s = n.num_or("alpha_s", 0.0);
    p.beta_s = n.num_or("beta_s", 0.0);
    p.alpha_u = n.num_or("alpha_u", 0.0);
    p.beta_u = n.num_or("beta_u", 0.0);
    return p;
}

json matrix_json(const std::vector<double>& flat, int rows, int cols) {
    json out = json::array();
    for (int r = 0; r < rows; ++r) {
        out.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(r) * cols,
                                          flat.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols));
    }
    return out;
}

void read_matrix(const Node& n, int rows, int cols, std::vector<double>& out) {
    if (static_cast<int>(n.array_size()) != rows) {
        throw CaseError(n.ptr(), "expected one row per prosumer (" + std::to_string(rows) + ")");
    }
    out.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        const Node row = n.at(r);
        if (static_cast<int>(row.array_size()) != cols) {
            throw CaseError(row.ptr(), "expected one entry per period (" + std::to_string(cols) + ")");
        }
        for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(r) * cols + c] = row.at(c).num();
    }
}

}  // namespace

json case_to_json(const CaseFile& c) {
    json net;
    net["v_base"] = c.network.v_base;
    net["s_base"] = c.network.s_base;
    net["v_ref"] = c.network.v_ref;
    net["e_ex_max"] = c.network.e_ex_max;
    net["buses"] = json::array();
    for (const Bus& b : c.network.buses) {
        json jb = {{"id", b.id}, {"vmin", b.vmin}, {"vmax", b.vmax}, {"pf", b.reactive_pf}};
        if (b.is_substation) jb["substation"] = true;
        if (b.prosumer) jb["prosumer"] = *b.prosumer;
        net["buses"].push_back(jb);
    }
    net["branches"] = json::array();
    for (const Branch& br : c.network.branches) {
        net["branches"].push_back({{"from", br.from},
                                   {"to", br.to},
                                   {"r", br.r},
                                   {"x", br.x},
                                   {"gs", br.gs},
                                   {"bs", br.bs},
                                   {"smax", br.smax},
                                   {"gamma", br.gamma}});
    }

    json j;
    j["name"] = c.name;
    j["description"] = c.description;
    j["horizon"] = c.horizon;
    j["network"] = net;
    j["prosumers"] = json::array();
    for (const auto& p : c.prosumers) j["prosumers"].push_back(prosumer_json(p));
    j["prices"] = {{"energy", c.prices.energy}, {"reserve", c.prices.reserve}};
    j["forecast"] = {{"pv", matrix_json(c.forecast.pv, c.forecast.n_prosumers, c.forecast.horizon)},
                     {"load", matrix_json(c.forecast.load, c.forecast.n_prosumers, c.forecast.horizon)}};
    j["uncertainty"] = {{"sigma_pv", c.sigma_pv}, {"sigma_d", c.sigma_d}};
    if (!c.scenario_file.empty()) j["scenario_file"] = c.scenario_file;
    j["contracts"] = json::array();
    for (const auto& k : c.contracts) j["contracts"].push_back(contract_json(k));
    json sw = json::object();
    if (c.sweep.power) sw["power"] = contract_json(*c.sweep.power);
    if (c.sweep.energy) sw["energy"] = contract_json(*c.sweep.energy);
    if (c.sweep.common_part) {
        const auto& cp = *c.sweep.common_part;
        sw["common_part"] = {{"seller", cp.seller},
                             {"buyer", cp.buyer},
                             {"seller_profile", cp.seller_profile},
                             {"buyer_profile", cp.buyer_profile}};
    }
    j["sweep"] = sw;
    const auto& o = c.options;
    j["options"] = {{"n_scenarios", o.n_scenarios},
                    {"seed", o.seed},
                    {"reduce_to", o.reduce_to},
                    {"theorem_tol", o.theorem_tol},
                    {"feas_tol", o.solver.feas_tol},
                    {"opt_tol", o.solver.opt_tol},
                    {"max_iter", o.solver.max_iter}};
    return j;
}

CaseFile case_from_json(const json& doc) {
    const Node root(doc, "");
    CaseFile c;
    c.name = root.str_or("name", "");
    c.description = root.str_or("description", "");
    c.horizon = root.at("horizon").integer();
    if (c.horizon < 1) throw CaseError("/horizon", "must be at least 1");
    const int T = c.horizon;

    const Node net = root.at("network");
    c.network.v_base = net.num_or("v_base", 11.0);
    c.network.s_base = net.num_or("s_base", 10.0);
    c.network.v_ref = net.num_or("v_ref", 1.0);
    c.network.e_ex_max = net.at("e_ex_max").num();
    const Node buses = net.at("buses");
    for (std::size_t k = 0; k < buses.array_size(); ++k) {
        const Node b = buses.at(k);
        Bus bus;
        bus.id = b.at("id").integer();
        bus.vmin = b.num_or("vmin", 0.95);
        bus.vmax = b.num_or("vmax", 1.05);
        bus.reactive_pf = b.num_or("pf", 1.0);
        bus.is_substation = b.has("substation") && b.at("substation").boolean();
        if (b.has("prosumer")) bus.prosumer = b.at("prosumer").integer();
        c.network.buses.push_back(bus);
    }
    const Node branches = net.at("branches");
    for (std::size_t k = 0; k < branches.array_size(); ++k) {
        const Node b = branches.at(k);
        Branch br;
        br.from = b.at("from").integer();
        br.to = b.at("to").integer();
        br.r = b.at("r").num();
        br.x = b.at("x").num();
        br.gs = b.num_or("gs", 0.0);
        br.bs = b.num_or("bs", 0.0);
        br.smax = b.at("smax").num();
        br.gamma = b.num_or("gamma", 1.0);
        c.network.branches.push_back(br);
    }

    const Node pros = root.at("prosumers");
    for (std::size_t k = 0; k < pros.array_size(); ++k) {
        c.prosumers.push_back(read_prosumer(pros.at(k)));
        const auto& p = c.prosumers.back();
        if (p.i != static_cast<int>(k)) throw CaseError(pros.at(k).ptr() + "/i", "must equal the array position");
        if (!p.pd_flex_max.empty() && static_cast<int>(p.pd_flex_max.size()) != T) {
            throw CaseError(pros.at(k).ptr() + "/pd_flex_max", "expected one entry per period");
        }
    }
    const int n_p = static_cast<int>(c.prosumers.size());

    const Node prices = root.at("prices");
    c.prices.energy = prices.at("energy").nums();
    c.prices.reserve = prices.at("reserve").nums();
    if (static_cast<int>(c.prices.energy.size()) != T) throw CaseError("/prices/energy", "expected one entry per period");
    if (static_cast<int>(c.prices.reserve.size()) != T) throw CaseError("/prices/reserve", "expected one entry per period");

    c.forecast = Forecast(n_p, T);
    const Node fc = root.at("forecast");
    read_matrix(fc.at("pv"), n_p, T, c.forecast.pv);
    read_matrix(fc.at("load"), n_p, T, c.forecast.load);
    if (root.has("uncertainty")) {
        const Node u = root.at("uncertainty");
        c.sigma_pv = u.num_or("sigma_pv", 0.0);
        c.sigma_d = u.num_or("sigma_d", 0.0);
    }
    c.scenario_file = root.str_or("scenario_file", "");

    if (root.has("contracts")) {
        const Node book = root.at("contracts");
        for (std::size_t k = 0; k < book.array_size(); ++k) c.contracts.push_back(read_contract(book.at(k)));
    }
    if (root.has("sweep")) {
        const Node sw = root.at("sweep");
        if (sw.has("power")) c.sweep.power = read_contract(sw.at("power"));
        if (sw.has("energy")) c.sweep.energy = read_contract(sw.at("energy"));
        if (sw.has("common_part")) {
            const Node cp = sw.at("common_part");
            CommonPartBase base;
            base.seller = cp.int_or("seller", 0);
            base.buyer = cp.int_or("buyer", 1);
            base.seller_profile = cp.at("seller_profile").nums();
            base.buyer_profile = cp.at("buyer_profile").nums();
            c.sweep.common_part = base;
        }
    }
    if (root.has("options")) {
        const Node o = root.at("options");
        c.options.n_scenarios = o.int_or("n_scenarios", c.options.n_scenarios);
        if (o.has("seed")) c.options.seed = o.at("seed").uint64();
        c.options.reduce_to = o.int_or("reduce_to", 0);
        c.options.theorem_tol = o.num_or("theorem_tol", c.options.theorem_tol);
        c.options.solver.feas_tol = o.num_or("feas_tol", c.options.solver.feas_tol);
        c.options.solver.opt_tol = o.num_or("opt_tol", c.options.solver.opt_tol);
        c.options.solver.max_iter = o.int_or("max_iter", c.options.solver.max_iter);
    }
    return c;
}

void validate_case(const CaseFile& c) {
    const int T = c.horizon;
    const int n_p = static_cast<int>(c.prosumers.size());
    const ValidationReport rep = validate_network(c.network);
    if (!rep.ok()) throw CaseError("/network", rep.summary());
    for (int i = 0; i < n_p; ++i) {
        const std::string ptr = "/prosumers/" + std::to_string(i);
        const auto problems = validate_prosumer(c.prosumers[i], T);
        if (!problems.empty()) throw CaseError(ptr, problems.front());
        if (c.network.bus_of(i) < 0) throw CaseError(ptr, "prosumer is not placed on any bus");
    }
    for (int b = 0; b < c.network.n_buses(); ++b) {
        const auto& bus = c.network.buses[b];
        if (bus.prosumer && *bus.prosumer >= n_p) {
            throw CaseError("/network/buses/" + std::to_string(b) + "/prosumer", "references a missing prosumer");
        }
    }
    if (c.options.n_scenarios < 1) throw CaseError("/options/n_scenarios", "must be at least 1");
    if (c.options.reduce_to < 0 || c.options.reduce_to > c.options.n_scenarios) {
        throw CaseError("/options/reduce_to", "must lie in [0, n_scenarios]");
    }
    if (c.sigma_pv < 0.0 || c.sigma_d < 0.0) throw CaseError("/uncertainty", "standard deviations must be nonnegative");
    for (std::size_t k = 0; k < c.forecast.pv.size(); ++k) {
        if (c.forecast.pv[k] < 0.0 || c.forecast.load[k] < 0.0) throw CaseError("/forecast", "negative forecast value");
    }
    auto check_contract = [&](const Contract& k, const std::string& ptr) {
        const Classification cl = classify(k);
        if (cl.kind == ContractKind::Invalid) throw CaseError(ptr, cl.reason);
        if (k.horizon() != T) throw CaseError(ptr, "contract does not span the horizon");
        if (k.buyer >= n_p || k.seller >= n_p) throw CaseError(ptr, "contract references a missing prosumer");
    };
    for (std::size_t k = 0; k < c.contracts.size(); ++k) check_contract(c.contracts[k], "/contracts/" + std::to_string(k));
    if (c.sweep.power) check_contract(*c.sweep.power, "/sweep/power");
    if (c.sweep.energy) check_contract(*c.sweep.energy, "/sweep/energy");
    if (c.sweep.common_part) {
        const auto& cp = *c.sweep.common_part;
        if (static_cast<int>(cp.seller_profile.size()) != T || static_cast<int>(cp.buyer_profile.size()) != T) {
            throw CaseError("/sweep/common_part", "profiles must have one entry per period");
        }
        if (cp.seller == cp.buyer || cp.seller < 0 || cp.buyer < 0 || cp.seller >= n_p || cp.buyer >= n_p) {
            throw CaseError("/sweep/common_part", "seller and buyer must be distinct existing prosumers");
        }
    }
}

CaseFile load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CaseError("", "cannot open case file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CaseError("", std::string("malformed JSON: ") + e.what());
    }
    return case_from_json(doc);
}

void save_case(const std::filesystem::path& path, const CaseFile& c) {
    std::ofstream out(path);
    if (!out) throw CaseError("", "cannot write " + path.string());
    out << case_to_json(c).dump(1) << '\n';
}

ScenarioSet case_scenarios(const CaseFile& c, const std::filesystem::path& base_dir) {
    if (!c.scenario_file.empty()) {
        const auto path = base_dir / c.scenario_file;
        std::ifstream in(path);
        if (!in) throw CaseError("/scenario_file", "cannot open " + path.string());
        ScenarioSet set = read_scenarios_csv(in);
        if (set.n_prosumers != static_cast<int>(c.prosumers.size()) || set.horizon != c.horizon) {
            throw CaseError("/scenario_file", "scenario dimensions do not match the case");
        }
        return set;
    }
    ScenarioSet set = generate(c.forecast, c.sigma_pv, c.sigma_d, c.options.n_scenarios, c.options.seed);
    if (c.options.reduce_to > 0 && c.options.reduce_to < set.n_scenarios) set = reduce(set, c.options.reduce_to);
    return set;
}

Instance make_instance(const CaseFile& c, ScenarioSet scenarios) {
    validate_case(c);
    Instance inst;
    inst.net = c.network;
    inst.prosumers = c.prosumers;
    inst.scenarios = std::move(scenarios);
    inst.prices = c.prices;
    check_instance(inst);
    return inst;
}

Instance make_instance(const CaseFile& c, const std::filesystem::path& base_dir) {
    return make_instance(c, case_scenarios(c, base_dir));
}

RatioBasis ratio_basis(const Instance& inst, int buyer) {
    RatioBasis rb;
    rb.buyer_load_min = inst.scenarios.min_load(buyer);
    const auto& caps = inst.prosumers.at(buyer).pd_flex_max;
    rb.flex_cap = caps.empty() ? 0.0 : *std::max_element(caps.begin(), caps.end());
    return rb;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(hex[md[k] >> 4]);
        out.push_back(hex[md[k] & 0xF]);
    }
    return out;
}

std::string file_sha256(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

}  // namespace dso
