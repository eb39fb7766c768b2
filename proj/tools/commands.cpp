#include "commands.hpp"

#include "dso/csv.hpp"
#include "dso/kernels.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dso::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kRelaxationThreshold = 5e-4;
constexpr double kComplementarityThreshold = 1e-6;

struct Loaded {
    CaseFile c;
    Instance inst;
    fs::path path;
    std::string sha256;
};

Loaded load(const CaseArgs& a) {
    Loaded l;
    l.path = a.case_path;
    l.c = load_case(a.case_path);
    l.sha256 = file_sha256(a.case_path);
    if (a.n_scenarios) l.c.options.n_scenarios = *a.n_scenarios;
    if (a.seed) l.c.options.seed = *a.seed;
    if (a.reduce_to) l.c.options.reduce_to = *a.reduce_to;
    l.inst = make_instance(l.c, a.case_path.parent_path());
    spdlog::info("case {} ({} buses, {} prosumers, {} scenarios, T={})", l.c.name, l.inst.net.n_buses(),
                 l.inst.n_prosumers(), l.inst.scenarios.n_scenarios, l.inst.horizon());
    return l;
}

ordered_json meta(const Loaded& l, std::string_view command) {
    const SolveOptions& so = l.c.options.solver;
    ordered_json m;
    m["command"] = command;
    m["case"] = l.path.string();
    m["case_name"] = l.c.name;
    m["case_sha256"] = l.sha256;
    m["seed"] = l.inst.scenarios.seed;
    m["n_scenarios"] = l.inst.scenarios.n_scenarios;
    m["scenario_source"] = l.c.scenario_file.empty() ? "generated" : l.c.scenario_file;
    m["scenario_algorithm"] = l.inst.scenarios.algorithm;
    m["tolerances"] = {{"feas_tol", so.feas_tol},
                       {"opt_tol", so.opt_tol},
                       {"theorem_tol", l.c.options.theorem_tol},
                       {"relaxation_gap", kRelaxationThreshold},
                       {"complementarity", kComplementarityThreshold}};
    m["kernel_backend"] = kernels::backend_name(kernels::active_backend());
    return m;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const ordered_json& j) { open_out(path) << j.dump(2) << '\n'; }

std::string num(double v) { return csv::num(v); }

ordered_json location_json(const GapLocation& g) {
    return {{"value", g.value}, {"s", g.s}, {"index", g.idx}, {"t", g.t}};
}

int exit_for(SolveStatus st) {
    switch (st) {
        case SolveStatus::Optimal: return kOk;
        case SolveStatus::Infeasible:
        case SolveStatus::Unbounded: return kInfeasible;
        case SolveStatus::NumericalFailure: return kError;
    }
    return kError;
}

ordered_json report_json(const SolvedCase& sc) {
    const SolveReport& r = sc.report;
    const ConicProgram& p = sc.problem.prog;
    ordered_json j;
    j["status"] = status_name(r.status);
    j["objective"] = r.status == SolveStatus::Optimal ? ordered_json(r.objective) : ordered_json(nullptr);
    j["total_surplus"] = r.status == SolveStatus::Optimal ? ordered_json(sc.result.surplus.total()) : ordered_json(nullptr);
    j["iterations"] = r.iterations;
    j["primal_residual"] = r.primal_residual;
    j["dual_residual"] = r.dual_residual;
    j["gap"] = r.gap;
    j["variables"] = p.n;
    j["rows"] = p.m();
    j["equalities"] = p.n_zero;
    j["inequalities"] = p.n_nonneg;
    j["cones"] = p.soc_dims.size();
    return j;
}

// max over (s, t) of |E_t - (sum_i P^E - losses)|
double market_coupling_residual(const DispatchResult& r, const Instance& inst) {
    double worst = 0.0;
    for (int s = 0; s < r.dims.n_scenarios; ++s) {
        for (int t = 0; t < r.dims.horizon; ++t) {
            double pe = 0.0;
            for (int i = 0; i < r.dims.n_prosumers; ++i) pe += r.PE[r.at_sit(s, i, t)];
            worst = std::max(worst, std::abs(r.E[t] - (pe - total_loss(r, inst.net, s, t))));
        }
    }
    return worst;
}

void write_dispatch(const fs::path& dir, const DispatchResult& r) {
    const ModelDims& d = r.dims;
    {
        auto out = open_out(dir / "dispatch_prosumer.csv");
        out << "s,i,t,pg,pr,pc,pdis,pd,pe,qs,deg\n";
        for (int s = 0; s < d.n_scenarios; ++s) {
            for (int i = 0; i < d.n_prosumers; ++i) {
                for (int t = 0; t < d.horizon; ++t) {
                    const auto k = r.at_sit(s, i, t);
                    out << s << ',' << i << ',' << t << ',' << num(r.Pg[k]) << ',' << num(r.Pr[k]) << ','
                        << num(r.Pc[k]) << ',' << num(r.Pdis[k]) << ',' << num(r.PD[k]) << ',' << num(r.PE[k]) << ','
                        << num(r.QS[k]) << ',' << num(r.Deg[k]) << '\n';
                }
            }
        }
    }
    {
        auto out = open_out(dir / "dispatch_branch.csv");
        out << "s,branch,t,p,q,l\n";
        for (int s = 0; s < d.n_scenarios; ++s) {
            for (int k = 0; k < d.n_branches; ++k) {
                for (int t = 0; t < d.horizon; ++t) {
                    const auto x = r.at_sbt(s, k, t);
                    out << s << ',' << k << ',' << t << ',' << num(r.p_flow[x]) << ',' << num(r.q_flow[x]) << ','
                        << num(r.l[x]) << '\n';
                }
            }
        }
    }
    {
        auto out = open_out(dir / "dispatch_bus.csv");
        out << "s,bus,t,v\n";
        for (int s = 0; s < d.n_scenarios; ++s) {
            for (int b = 0; b < d.n_buses; ++b) {
                for (int t = 0; t < d.horizon; ++t) {
                    out << s << ',' << b << ',' << t << ',' << num(r.v[r.at_sbus(s, b, t)]) << '\n';
                }
            }
        }
    }
}

void write_market(const fs::path& path, const DispatchResult& r, const Instance& inst, const NetTradePlan& plan) {
    auto out = open_out(path);
    out << "t,price_energy,price_reserve,E,R,imbalance\n";
    for (int t = 0; t < r.dims.horizon; ++t) {
        out << t << ',' << num(inst.prices.energy[t]) << ',' << num(inst.prices.reserve[t]) << ',' << num(r.E[t])
            << ',' << num(r.R[t]) << ',' << num(plan.imbalance_mw(t)) << '\n';
    }
}

ordered_json indices_json(const EconomicIndices& idx, const SurplusBreakdown& sb) {
    ordered_json j;
    j["total_surplus"] = idx.total_surplus;
    j["net_surplus_p2p"] = idx.net_surplus_p2p;
    j["incremental_improvement"] = idx.incremental_improvement;
    j["p2p_utility"] = idx.p2p_utility;
    j["breakdown"] = {{"energy_revenue", sb.energy_revenue},
                      {"reserve_revenue", sb.reserve_revenue},
                      {"utility", sb.utility},
                      {"generation_cost", sb.generation_cost},
                      {"degradation_cost", sb.degradation_cost}};
    return j;
}

ordered_json theorem_json(const TheoremReport& r) {
    ordered_json j;
    j["verdict"] = verdict_name(r.verdict);
    j["power_only"] = r.power_only;
    j["base_status"] = status_name(r.base_status);
    j["p2p_status"] = status_name(r.p2p_status);
    j["base_objective"] = r.base_objective;
    j["p2p_objective"] = r.p2p_objective;
    j["constructed_feasible"] = r.constructed_feasible;
    j["constructed_infeasibility"] = r.constructed_infeasibility;
    j["constructed_objective"] = r.constructed_objective;
    j["objective_residual"] = r.objective_residual;
    j["e_shift_residual"] = r.e_shift_residual;
    j["dispatch_residual"] = r.dispatch_residual;
    j["constructed_stationarity"] = r.constructed_stationarity;
    j["constructed_complementarity"] = r.constructed_complementarity;
    j["p2p_stationarity"] = r.p2p_stationarity;
    j["p2p_complementarity"] = r.p2p_complementarity;
    j["surplus_invariance_residual"] = r.surplus_invariance_residual;
    j["e_invariance_residual"] = r.e_invariance_residual;
    j["max_abs_imbalance"] = r.max_abs_imbalance;
    j["details"] = r.details;
    return j;
}

template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const CaseError& e) {
        spdlog::error("case error at {}", e.what());
        return kError;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kError;
    }
}

}  // namespace

std::vector<double> parse_ratios(const std::string& spec) {
    auto to_d = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty() || !std::isfinite(v)) throw std::invalid_argument("bad ratio '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw std::invalid_argument("ratios must be a:b:step");
        const double a = to_d(parts[0]), b = to_d(parts[1]), step = to_d(parts[2]);
        if (step <= 0.0 || b < a) throw std::invalid_argument("ratios need a <= b and step > 0");
        const long n = std::lround(std::floor((b - a) / step + 1e-3));
        // snapped to 1e-12 so that 0:1:0.2 yields 0.6 rather than 0.6000000000000001
        for (long k = 0; k <= n; ++k) out.push_back(std::round((a + static_cast<double>(k) * step) * 1e12) / 1e12);
        return out;
    }
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(to_d(p));
    if (out.empty()) throw std::invalid_argument("no ratios given");
    return out;
}

std::optional<SweepKind> parse_sweep_kind(std::string_view s) {
    if (s == "power") return SweepKind::Power;
    if (s == "energy") return SweepKind::Energy;
    if (s == "common-part" || s == "common_part") return SweepKind::CommonPart;
    return std::nullopt;
}

std::vector<Contract> load_contracts(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open contracts file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw CaseError("", std::string("malformed JSON: ") + e.what());
    }
    const nlohmann::json* list = &doc;
    std::string ptr;
    if (doc.is_object()) {
        if (!doc.contains("contracts")) throw CaseError("/contracts", "required field is missing");
        list = &doc.at("contracts");
        ptr = "/contracts";
    }
    if (!list->is_array()) throw CaseError(ptr, "expected an array of contracts");
    std::vector<Contract> out;
    for (std::size_t k = 0; k < list->size(); ++k) {
        try {
            out.push_back(list->at(k).get<Contract>());
        } catch (const std::exception& e) {
            throw CaseError(ptr + "/" + std::to_string(k), e.what());
        }
    }
    return out;
}

int run(const RunArgs& a) {
    return guarded([&]() -> int {
        const Loaded l = load(a.in);
        ensure_dir(a.out_dir);
        const NetTradePlan plan = net_trade(l.c.contracts, l.inst.n_prosumers(), l.inst.horizon());
        const SolvedCase sc = solve_case(l.inst, plan, l.c.options.solver);
        spdlog::info("solve {} in {} iterations, {:.2f} s", status_name(sc.report.status), sc.report.iterations,
                     sc.report.runtime_s);

        ordered_json m = meta(l, "run");
        m["contracts"] = l.c.contracts.size();
        write_json(a.out_dir / "run_meta.json", m);
        if (a.write_cbf) {
            auto out = open_out(a.out_dir / "problem.cbf");
            write_cbf(out, sc.problem.prog);
        }
        ordered_json rep = report_json(sc);
        rep["meta"] = m;
        write_json(a.out_dir / "solve_report.json", rep);
        // wall-clock values live apart so every other output is reproducible byte for byte
        write_json(a.out_dir / "timing.json", ordered_json{{"solve_runtime_s", sc.report.runtime_s}});
        if (sc.report.status != SolveStatus::Optimal) {
            spdlog::error("solver ended {}", status_name(sc.report.status));
            return exit_for(sc.report.status);
        }

        const DispatchResult& r = sc.result;
        write_dispatch(a.out_dir, r);
        write_market(a.out_dir / "market.csv", r, l.inst, plan);
        {
            auto out = open_out(a.out_dir / "plan.csv");
            write_plan_csv(out, plan);
        }

        SolvedCase zero_local;
        const DispatchResult* zero = &r;
        if (!plan.is_zero()) {
            zero_local = solve_case(l.inst, NetTradePlan(plan.n_prosumers, plan.horizon), l.c.options.solver);
            if (zero_local.report.status != SolveStatus::Optimal) {
                spdlog::error("solve without trading ended {}", status_name(zero_local.report.status));
                return kError;
            }
            zero = &zero_local.result;
        }
        ordered_json ij = indices_json(indices(r, plan, *zero, l.inst), r.surplus);
        ij["meta"] = m;
        write_json(a.out_dir / "indices.json", ij);

        const GapLocation gap = relaxation_gap(r, l.inst.net);
        const GapLocation comp = complementarity_gap(r);
        const KktAudit audit = audit_kkt(sc.problem.prog, sc.report.primal, sc.report.duals);
        const double objective_mismatch =
            std::abs(r.surplus.total() + sc.report.objective) / (1.0 + std::abs(sc.report.objective));
        ordered_json d;
        d["relaxation_gap"] = location_json(gap);
        d["complementarity"] = location_json(comp);
        d["degradation_slack"] = location_json(degradation_slack(r));
        d["relaxation_exact"] = gap.value <= kRelaxationThreshold && comp.value <= kComplementarityThreshold;
        d["kkt"] = {{"stationarity", audit.stationarity},
                    {"complementarity", audit.max_complementarity},
                    {"primal_residual", audit.primal_residual},
                    {"dual_cone_violation", audit.dual_cone_violation}};
        d["market_coupling_residual"] = market_coupling_residual(r, l.inst);
        d["objective_recomputation_mismatch"] = objective_mismatch;
        d["scenario_clamps"] = {{"pv", l.inst.scenarios.clamped_pv}, {"load", l.inst.scenarios.clamped_load}};
        d["meta"] = m;
        write_json(a.out_dir / "diagnostics.json", d);
        if (!d["relaxation_exact"].get<bool>()) {
            spdlog::warn("relaxation-inexact: gap {:.3e}, complementarity {:.3e}", gap.value, comp.value);
        }
        return kOk;
    });
}

int sweep(const SweepArgs& a) {
    return guarded([&]() -> int {
        const Loaded l = load(a.in);
        if (a.ratios.empty()) throw std::invalid_argument("no sweep ratios");
        std::vector<Contract> book;
        const SweepBases& sb = l.c.sweep;
        if (a.kind == SweepKind::CommonPart) {
            if (!sb.common_part) throw CaseError("/sweep/common_part", "case has no common-part sweep base");
            const CommonPartBase& cp = *sb.common_part;
            book = common_part_sweep(cp.seller_profile, cp.buyer_profile, a.ratios, {cp.seller, cp.buyer, 1});
        } else {
            const std::optional<Contract>& base = a.kind == SweepKind::Power ? sb.power : sb.energy;
            if (!base) {
                throw CaseError(a.kind == SweepKind::Power ? "/sweep/power" : "/sweep/energy",
                                "case has no base contract for this sweep");
            }
            const RatioBasis rb = ratio_basis(l.inst, base->buyer);
            book = ratio_sweep(*base, rb.buyer_load_min, rb.flex_cap, a.ratios);
        }
        ensure_dir(a.out_dir);

        const SolvedCase zero = solve_case(l.inst, NetTradePlan(l.inst.n_prosumers(), l.inst.horizon()),
                                           l.c.options.solver);
        if (zero.report.status != SolveStatus::Optimal) {
            spdlog::error("solve without trading ended {}", status_name(zero.report.status));
            return exit_for(zero.report.status);
        }
        const auto pts = run_sweep(l.inst, book, a.ratios, l.c.options.solver, zero.result, a.threads);

        const double nan = std::numeric_limits<double>::quiet_NaN();
        auto out = open_out(a.out_dir / "sweep.csv");
        out << "ratio,optimal,total_surplus,net_surplus_p2p,incremental_improvement,p2p_utility,relaxation_gap,"
               "complementarity,kkt_stationarity,kkt_complementarity,max_abs_imbalance,iterations,runtime_s\n";
        auto hourly = open_out(a.out_dir / "sweep_hourly.csv");
        hourly << "ratio,t,E,R,imbalance\n";
        auto pros = open_out(a.out_dir / "sweep_prosumer.csv");
        pros << "ratio,i,t,pb,expected_pe\n";
        ordered_json log = ordered_json::array();
        bool any_error = false, any_infeasible = false;
        const int T = l.inst.horizon();
        for (const SweepPoint& p : pts) {
            const bool ok = p.status == SolveStatus::Optimal && p.error.empty();
            double max_imb = 0.0;
            for (double v : p.imbalance) max_imb = std::max(max_imb, std::abs(v));
            auto val = [&](double v) { return num(ok ? v : nan); };
            out << num(p.ratio) << ',' << (ok ? 1 : 0) << ',' << val(p.idx.total_surplus) << ','
                << val(p.idx.net_surplus_p2p) << ',' << val(p.idx.incremental_improvement) << ','
                << val(p.idx.p2p_utility) << ',' << val(p.relaxation_gap) << ',' << val(p.complementarity) << ','
                << val(p.kkt_stationarity) << ',' << val(p.kkt_complementarity) << ',' << num(max_imb) << ','
                << p.iterations << ',' << num(p.runtime_s) << '\n';
            if (ok) {
                for (int t = 0; t < T; ++t) {
                    hourly << num(p.ratio) << ',' << t << ',' << num(p.E[t]) << ',' << num(p.R[t]) << ','
                           << num(p.imbalance[t]) << '\n';
                }
                for (int i = 0; i < l.inst.n_prosumers(); ++i) {
                    for (int t = 0; t < T; ++t) {
                        pros << num(p.ratio) << ',' << i << ',' << t << ',' << num(p.pb[i * T + t]) << ','
                             << num(p.expected_pe[i * T + t]) << '\n';
                    }
                }
            }
            if (p.status == SolveStatus::Infeasible || p.status == SolveStatus::Unbounded) {
                any_infeasible = true;
            } else if (!ok) {
                any_error = true;
            }
            ordered_json e;
            e["ratio"] = p.ratio;
            e["contract_id"] = p.contract.id;
            e["contract_kind"] = contract_kind_name(classify(p.contract).kind);
            e["overlap_ratio"] = overlap_ratio(p.contract);
            e["status"] = status_name(p.status);
            e["iterations"] = p.iterations;
            e["runtime_s"] = p.runtime_s;
            e["error"] = p.error;
            log.push_back(e);
        }
        ordered_json m = meta(l, "sweep");
        m["kind"] = sweep_kind_name(a.kind);
        m["ratios"] = a.ratios;
        m["zero_plan_total_surplus"] = zero.result.surplus.total();
        write_json(a.out_dir / "sweep_meta.json", m);
        {
            std::ofstream points = open_out(a.out_dir / "sweep_points.json");
            points << ordered_json{{"meta", m}, {"points", log}}.dump(2) << '\n';
        }
        spdlog::info("sweep {}: {} points written to {}", sweep_kind_name(a.kind), pts.size(), a.out_dir.string());
        if (any_error) return kError;
        return any_infeasible ? kInfeasible : kOk;
    });
}

int verify(const VerifyArgs& a) {
    return guarded([&]() -> int {
        const Loaded l = load(a.in);
        const std::vector<Contract> book = load_contracts(a.contracts_path);
        const NetTradePlan plan = net_trade(book, l.inst.n_prosumers(), l.inst.horizon());
        bool power_only = true;
        for (const Contract& c : book) power_only = power_only && classify(c).kind == ContractKind::Power;
        TheoremOptions opts;
        opts.objective_tol = l.c.options.theorem_tol;
        opts.energy_tol = l.c.options.theorem_tol;
        opts.solver = l.c.options.solver;
        const TheoremReport rep = verify_invariance(l.inst, plan, power_only, opts);
        ensure_dir(a.out_dir);
        ordered_json m = meta(l, "verify");
        m["contracts_file"] = a.contracts_path.string();
        m["contracts_sha256"] = file_sha256(a.contracts_path);
        m["contracts"] = book.size();
        ordered_json j = theorem_json(rep);
        j["meta"] = m;
        write_json(a.out_dir / "theorem_report.json", j);
        spdlog::info("verdict {}", verdict_name(rep.verdict));
        for (const auto& why : rep.details) spdlog::warn("{}", why);
        if (rep.base_status != SolveStatus::Optimal) return exit_for(rep.base_status);
        if (rep.p2p_status == SolveStatus::NumericalFailure) return kError;
        return rep.verdict == Verdict::InvarianceHolds ? kOk : kInfeasible;
    });
}

int gen_scenarios(const GenScenariosArgs& a) {
    return guarded([&]() -> int {
        CaseFile c = load_case(a.in.case_path);
        if (a.in.n_scenarios) c.options.n_scenarios = *a.in.n_scenarios;
        if (a.in.seed) c.options.seed = *a.in.seed;
        if (a.in.reduce_to) c.options.reduce_to = *a.in.reduce_to;
        c.scenario_file.clear();
        validate_case(c);
        const ScenarioSet set = case_scenarios(c);
        if (a.out_file.has_parent_path()) ensure_dir(a.out_file.parent_path());
        {
            auto out = open_out(a.out_file);
            write_scenarios_csv(out, set);
        }
        ordered_json m;
        m["command"] = "gen-scenarios";
        m["case"] = a.in.case_path.string();
        m["case_sha256"] = file_sha256(a.in.case_path);
        m["seed"] = set.seed;
        m["n_scenarios"] = set.n_scenarios;
        m["generated"] = c.options.n_scenarios;
        m["reduce_to"] = c.options.reduce_to;
        m["scenario_algorithm"] = set.algorithm;
        m["sigma_pv"] = c.sigma_pv;
        m["sigma_d"] = c.sigma_d;
        m["clamped"] = {{"pv", set.clamped_pv}, {"load", set.clamped_load}};
        m["scenario_sha256"] = file_sha256(a.out_file);
        write_json(fs::path(a.out_file.string() + ".meta.json"), m);
        spdlog::info("{} scenarios written to {}", set.n_scenarios, a.out_file.string());
        return kOk;
    });
}

int make_fixture(const MakeFixtureArgs& a) {
    return guarded([&]() -> int {
        CaseFile c;
        if (a.name == "two_bus") {
            c = make_two_bus_case();
        } else if (a.name == "ukgds95") {
            c = make_ukgds95_case();
        } else {
            throw std::invalid_argument("unknown fixture '" + a.name + "' (two_bus, ukgds95)");
        }
        if (a.out_file.has_parent_path()) ensure_dir(a.out_file.parent_path());
        save_case(a.out_file, c);
        return kOk;
    });
}

}  // namespace dso::cli
