#include "salab/cli.hpp"

#include "salab/config.hpp"
#include "salab/error.hpp"
#include "salab/oracles.hpp"
#include "salab/report_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

namespace fs = std::filesystem;

namespace salab {

namespace {

struct CommonOptions {
    std::string config;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

unsigned thread_count(const CommonOptions& o)
{
    if (o.threads)
        return resolve_parallelism(*o.threads);
    if (const char* env = std::getenv("SA_LAB_THREADS")) {
        try {
            return resolve_parallelism(static_cast<unsigned>(std::stoul(env)));
        } catch (const std::exception&) {
            throw Error(ErrorCode::Config, std::string("SA_LAB_THREADS: not a thread count: '") + env + "'");
        }
    }
    return resolve_parallelism(0);
}

void prepare_out_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw Error(ErrorCode::Io, "cannot create output directory " + dir.string());
}

ScenarioConfig load(const CommonOptions& o)
{
    ScenarioConfig cfg = load_scenario_config(o.config);
    if (o.seed)
        cfg.scenario.seed = *o.seed;
    return cfg;
}

int cmd_run(const CommonOptions& o, std::ostream& out)
{
    ScenarioConfig cfg = load(o);
    const fs::path dir(o.out_dir);
    prepare_out_dir(dir);
    const EnsembleResult res = run_ensemble(cfg.scenario, thread_count(o));
    const std::string& name = cfg.scenario.name;
    write_file(dir / (name + ".trajectories.csv"), trajectories_csv(res.records));
    write_file(dir / (name + ".summary.json"), to_text(summary_json(res.report)));
    write_file(dir / (name + ".u_vs_k.svg"), u_vs_k_svg(res.report));
    out << name << ": converged_fraction=" << res.report.converged_fraction
        << " mean_jump_events=" << res.report.mean_jump_events;
    if (res.report.expected_jump_count)
        out << " expected_jump_count=" << *res.report.expected_jump_count;
    out << "\n";
    return kExitOk;
}

int cmd_phase_scan(const CommonOptions& o, const std::optional<std::string>& xi_flag, std::ostream& out)
{
    ScenarioConfig cfg = load(o);
    const std::vector<double> xi = xi_flag ? parse_xi_list(*xi_flag) : cfg.xi_list;
    if (xi.empty())
        throw Error(ErrorCode::Config, "xi_list: empty; pass --xi or set xi_list in the config");
    const fs::path dir(o.out_dir);
    prepare_out_dir(dir);
    const PhaseScan scan = phase_scan(cfg.scenario, xi, thread_count(o));
    const std::string& name = cfg.scenario.name;
    write_file(dir / (name + ".phase.csv"), phase_csv(scan.rows));
    write_file(dir / (name + ".phase.svg"), phase_svg(scan.rows, cfg.scenario.diagnostics.p, name));
    out << phase_csv(scan.rows);
    return kExitOk;
}

int cmd_certify(const CommonOptions& o, std::ostream& out)
{
    ScenarioConfig cfg = load(o);
    if (!cfg.lyapunov)
        throw Error(ErrorCode::Config, "lyapunov: missing required field");
    if (!cfg.scenario.op.fixed_point())
        throw Error(ErrorCode::Config, "operator: certification needs an operator with a fixed point");
    const fs::path dir(o.out_dir);
    prepare_out_dir(dir);
    const DriftCertificate cert = certify_drift(cfg.scenario.op, *cfg.lyapunov, cfg.certify.region,
                                                cfg.certify.samples, RandomStream(cfg.scenario.seed, 0));
    write_file(dir / (cfg.scenario.name + ".certificate.json"), to_text(certificate_json(cert)));
    out << cfg.scenario.name << ": eta_hat=" << cert.eta_hat << " L2_hat=" << cert.L2_hat << " c1_hat=" << cert.c1_hat
        << " c2_hat=" << cert.c2_hat << " violations=" << cert.violation_count << "/" << cert.samples << "\n";
    for (const auto& v : cert.violations) {
        out << "  violation at [";
        for (Eigen::Index i = 0; i < v.point.size(); ++i)
            out << (i ? ", " : "") << v.point(i);
        out << "] drift ratio " << v.margin << "\n";
    }
    return cert.passed() ? kExitOk : kExitViolation;
}

int cmd_oracle(const std::string& which, std::uint64_t trials, std::uint64_t seed, std::ostream& out)
{
    const OracleKind kind = parse_oracle_kind(which);
    const OracleSummary s = run_oracle(kind, trials, seed);
    out << which << ": " << (s.passed ? "ok" : "VIOLATION") << " trials=" << s.trials
        << " violations=" << s.violations << " worst_margin=" << s.worst_margin << "\n  " << s.detail << "\n";
    return s.passed ? kExitOk : kExitViolation;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Stochastic approximation simulation and drift-verification lab", "sa_lab"};
    app.require_subcommand(1);

    CommonOptions common;
    std::optional<std::string> xi_flag;
    std::string which;
    std::uint64_t trials = 1000000;
    std::uint64_t oracle_seed = 1;

    const auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", common.config, "Scenario config (JSON)")->required();
        if (needs_out)
            sub->add_option("--out", common.out_dir, "Output directory");
        sub->add_option("--seed", common.seed, "Override the config seed (u64)");
        sub->add_option("--threads", common.threads, "Worker threads, 0 = auto (env SA_LAB_THREADS)");
    };

    CLI::App* run = app.add_subcommand("run", "Run a Monte Carlo ensemble");
    add_common(run, true);
    CLI::App* scan = app.add_subcommand("phase-scan", "Sweep the step-size decay exponent");
    add_common(scan, true);
    scan->add_option("--xi", xi_flag, "Comma-separated xi values");
    CLI::App* certify = app.add_subcommand("certify", "Certify the negative drift condition by sampling");
    add_common(certify, true);
    CLI::App* oracle = app.add_subcommand("oracle", "Run an inequality oracle over random inputs");
    oracle->add_option("--which", which, "norm_power | scalar_power | projection_drift | fourth_moment")->required();
    oracle->add_option("--trials", trials, "Number of random trials");
    oracle->add_option("--seed", oracle_seed, "Seed (u64)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "sa_lab: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (run->parsed())
            return cmd_run(common, out);
        if (scan->parsed())
            return cmd_phase_scan(common, xi_flag, out);
        if (certify->parsed())
            return cmd_certify(common, out);
        if (oracle->parsed())
            return cmd_oracle(which, trials, oracle_seed, out);
    } catch (const Error& e) {
        err << "sa_lab: " << e.what() << "\n";
        if (e.code() == ErrorCode::Io)
            return kExitIo;
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "sa_lab: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitConfig;
}

} // namespace salab
