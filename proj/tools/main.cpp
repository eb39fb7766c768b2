#include "commands.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

void add_case_options(CLI::App* cmd, dso::cli::CaseArgs& in) {
    cmd->add_option("case", in.case_path, "Case file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--scenarios", in.n_scenarios, "Override the number of generated scenarios")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", in.seed, "Override the scenario seed");
    cmd->add_option("--reduce-to", in.reduce_to, "Keep this many scenarios after generation")
        ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("dso"));
    spdlog::cfg::load_env_levels();

    CLI::App app{"Stochastic DSO dispatch with peer-to-peer contracts"};
    app.require_subcommand(1);

    dso::cli::RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Solve a case and write dispatch, indices and diagnostics");
    add_case_options(run_cmd, run.in);
    run_cmd->add_option("-o,--out", run.out_dir, "Output directory")->required();
    run_cmd->add_flag("--cbf", run.write_cbf, "Also export the assembled problem as CBF");

    dso::cli::SweepArgs sweep;
    std::string kind, ratios;
    auto* sweep_cmd = app.add_subcommand("sweep", "Solve one point per trading ratio");
    add_case_options(sweep_cmd, sweep.in);
    sweep_cmd->add_option("--kind", kind, "power | energy | common-part")
        ->required()
        ->check(CLI::IsMember({"power", "energy", "common-part", "common_part"}));
    sweep_cmd->add_option("--ratios", ratios, "a:b:step or a comma-separated list")->required();
    sweep_cmd->add_option("-o,--out", sweep.out_dir, "Output directory")->required();
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0: one per core)")
        ->check(CLI::NonNegativeNumber);

    dso::cli::VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Check P2P invariance for a contract book");
    add_case_options(verify_cmd, verify.in);
    verify_cmd->add_option("--contracts", verify.contracts_path, "Contract list (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    verify_cmd->add_option("-o,--out", verify.out_dir, "Output directory")->required();

    dso::cli::GenScenariosArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-scenarios", "Write the scenario set of a case as CSV");
    gen_cmd->add_option("case", gen.in.case_path, "Case file (JSON)")->required()->check(CLI::ExistingFile);
    gen_cmd->add_option("-n", gen.in.n_scenarios, "Number of scenarios")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.in.seed, "Scenario seed");
    gen_cmd->add_option("--reduce-to", gen.in.reduce_to, "Keep this many scenarios")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("-o,--out", gen.out_file, "Output CSV")->required();

    dso::cli::MakeFixtureArgs fixture;
    auto* fix_cmd = app.add_subcommand("make-fixture", "Write a bundled case file");
    fix_cmd->add_option("name", fixture.name, "two_bus | ukgds95")
        ->required()
        ->check(CLI::IsMember({"two_bus", "ukgds95"}));
    fix_cmd->add_option("-o,--out", fixture.out_file, "Output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dso::cli::kError;
    }

    if (*run_cmd) return dso::cli::run(run);
    if (*sweep_cmd) {
        sweep.kind = *dso::cli::parse_sweep_kind(kind);
        try {
            sweep.ratios = dso::cli::parse_ratios(ratios);
        } catch (const std::exception& e) {
            std::cerr << "--ratios: " << e.what() << '\n';
            return dso::cli::kError;
        }
        return dso::cli::sweep(sweep);
    }
    if (*verify_cmd) return dso::cli::verify(verify);
    if (*gen_cmd) return dso::cli::gen_scenarios(gen);
    if (*fix_cmd) return dso::cli::make_fixture(fixture);
    return dso::cli::kError;
}
