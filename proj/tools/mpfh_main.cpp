// mpfh: analytic models, discrete-event simulation and codec self-checks
// for multi-path transport over parallel queueing paths.
//
// Exit codes: 0 success, 1 usage error, 2 validation/config error,
// 3 runtime error (instability, no solution, internal failures).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mpfh/cli.hpp"
#include "mpfh/scenario.hpp"
#include "mpfh/version.hpp"

namespace {

struct ScenarioArgs {
    std::string file;
    std::string preset;
    std::optional<uint64_t> seed;
    std::optional<double> duration;
    std::optional<double> warmup;
    std::string strategy;  // sp | mpd | mpc (applies to every service)
    std::optional<int> k;
    std::string cancellation;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& args) {
    auto* file = cmd->add_option("--scenario", args.file, "scenario config file");
    auto* preset =
        cmd->add_option("--preset", args.preset,
                        "built-in preset: table1-shared, table1-bw-split-1-5, "
                        "table1-path-split-2-8, embb-only, urllc-only");
    file->excludes(preset);
    cmd->add_option("--seed", args.seed, "override the scenario seed");
    cmd->add_option("--duration", args.duration, "override simulated seconds");
    cmd->add_option("--warmup", args.warmup, "override warmup seconds");
    cmd->add_option("--strategy", args.strategy,
                    "override every service's strategy: sp, mpd or mpc");
    cmd->add_option("--k", args.k, "split factor for --strategy mpc");
    cmd->add_option("--cancellation", args.cancellation,
                    "override cancellation: cancel_on_complete or no_cancel");
}

mpfh::Scenario load_scenario(const ScenarioArgs& args) {
    mpfh::Scenario sc;
    if (!args.preset.empty()) {
        sc = mpfh::scenario::preset(args.preset);
    } else if (!args.file.empty()) {
        std::ifstream in(args.file);
        if (!in) throw mpfh::ConfigError("cannot open scenario file: " + args.file);
        std::ostringstream buf;
        buf << in.rdbuf();
        sc = mpfh::scenario::parse(buf.str());
    } else {
        throw mpfh::ConfigError("pass --scenario <file> or --preset <name>");
    }
    if (args.seed) sc.seed = *args.seed;
    if (args.duration) sc.sim_duration = *args.duration;
    if (args.warmup) sc.warmup = *args.warmup;
    if (!args.strategy.empty()) {
        mpfh::StrategyParams strategy;
        if (args.strategy == "sp")
            strategy = mpfh::StrategyParams::single_path();
        else if (args.strategy == "mpd")
            strategy = mpfh::StrategyParams::duplication();
        else if (args.strategy == "mpc")
            strategy = mpfh::StrategyParams::coded(args.k.value_or(2));
        else
            throw mpfh::ConfigError("--strategy must be sp, mpd or mpc");
        for (auto& svc : sc.services) svc.strategy = strategy;
    } else if (args.k) {
        for (auto& svc : sc.services)
            if (svc.strategy.kind == mpfh::StrategyKind::Coded)
                svc.strategy.split_factor = *args.k;
    }
    if (!args.cancellation.empty()) {
        if (args.cancellation == "cancel_on_complete")
            sc.cancellation = mpfh::CancellationMode::CancelOnComplete;
        else if (args.cancellation == "no_cancel")
            sc.cancellation = mpfh::CancellationMode::NoCancel;
        else
            throw mpfh::ConfigError("--cancellation must be cancel_on_complete or no_cancel");
    }
    sc.validate();
    return sc;
}

class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw mpfh::ConfigError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-path transport analysis and simulation"};
    app.set_version_flag("--version", std::string("mpfh ") + mpfh::kVersion);
    app.require_subcommand(1);

    ScenarioArgs analyze_args, simulate_args;
    std::string analyze_sweep, simulate_sweep;
    std::string analyze_out, simulate_out;
    std::vector<double> analyze_deadlines, simulate_deadlines;
    std::string lambda_eff = "per-service";
    int replications = 0;

    auto* analyze = app.add_subcommand("analyze", "closed-form latency/reliability curves");
    add_scenario_options(analyze, analyze_args);
    analyze->add_option("--sweep", analyze_sweep,
                        "sweep spec, e.g. k=1:10 or deadline_t=1e-5:1e-3:40");
    analyze->add_option("--deadlines", analyze_deadlines,
                        "deadlines (seconds) for error-probability rows")
        ->delimiter(',');
    analyze->add_option("--lambda-eff", lambda_eff,
                        "arrival rate entering reliability: per-service, aggregate or zero");
    analyze->add_option("--out", analyze_out, "write CSV here instead of stdout");

    auto* simulate = app.add_subcommand("simulate", "discrete-event simulation runs");
    add_scenario_options(simulate, simulate_args);
    simulate->add_option("--sweep", simulate_sweep, "sweep spec, e.g. k=1:10");
    simulate->add_option("--deadlines", simulate_deadlines,
                         "deadlines (seconds) for empirical error-probability rows")
        ->delimiter(',');
    simulate->add_option("--replications", replications,
                         "independent replications (seeds base, base+1, ...)");
    simulate->add_option("--out", simulate_out, "write CSV here instead of stdout");

    int codec_n = 0, codec_k = 0, codec_trials = 100;
    uint64_t codec_seed = 1;
    bool codec_dump = false;
    auto* codec = app.add_subcommand("codec-check", "exhaustive any-k-of-n recovery check");
    codec->add_option("--n", codec_n, "total blocks")->required();
    codec->add_option("--k", codec_k, "data blocks")->required();
    codec->add_option("--trials", codec_trials, "random frames to test");
    codec->add_option("--seed", codec_seed, "frame content seed");
    codec->add_flag("--dump", codec_dump, "hex-dump one wire-format block");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            mpfh::cli::AnalyzeOptions options;
            if (!analyze_sweep.empty()) options.sweep = mpfh::cli::parse_sweep(analyze_sweep);
            options.deadlines = analyze_deadlines;
            options.policy = mpfh::cli::parse_policy(lambda_eff);
            OutputTarget out(analyze_out);
            mpfh::cli::cmd_analyze(load_scenario(analyze_args), options, out.stream());
        } else if (simulate->parsed()) {
            mpfh::cli::SimulateOptions options;
            if (!simulate_sweep.empty()) options.sweep = mpfh::cli::parse_sweep(simulate_sweep);
            options.deadlines = simulate_deadlines;
            options.replications = replications;
            OutputTarget out(simulate_out);
            mpfh::cli::cmd_simulate(load_scenario(simulate_args), options, out.stream());
        } else if (codec->parsed()) {
            OutputTarget out("");
            if (!mpfh::cli::cmd_codec_check(codec_n, codec_k, codec_trials, out.stream(),
                                            codec_seed, codec_dump))
                return 3;
        }
    } catch (const mpfh::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mpfh::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mpfh::UnknownPresetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mpfh::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mpfh::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mpfh::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
