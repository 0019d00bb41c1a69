// Command-line front end: run experiments, sweep the rate/SNR/memory grid,
// check the Poisson-approximation bound, and dump generated datasets.
//
// Exit codes: 0 success, 1 bounds check failed, 2 invalid configuration.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "erasefl/analysis.hpp"
#include "erasefl/config.hpp"
#include "erasefl/csv.hpp"
#include "erasefl/simulation.hpp"

namespace fs = std::filesystem;
using namespace erasefl;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> replicas_override;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
    auto* config_opt = cmd->add_option("--config", args.config_path, "experiment config file (JSON)");
    if (needs_config) config_opt->required();
    cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
    cmd->add_option("--seed", args.seed_override, "override the config's base seed");
    cmd->add_option("--replicas", args.replicas_override, "override the config's replica count");
    cmd->add_flag("--quiet", args.quiet, "suppress informational output");
}

io::LoadedConfig load_with_overrides(const CommonArgs& args) {
    io::LoadedConfig loaded = io::load_config(args.config_path);
    if (args.seed_override) loaded.experiment.base_seed = *args.seed_override;
    if (args.replicas_override) {
        if (*args.replicas_override < 1) throw io::ConfigError("--replicas must be >= 1");
        loaded.experiment.replicas = static_cast<std::size_t>(*args.replicas_override);
    }
    loaded.experiment.validate();
    return loaded;
}

void warn_short_blocklength(const sim::ExperimentConfig& cfg, bool quiet) {
    if (quiet) return;
    if (cfg.link.regime == channel::Regime::ShortPacket && cfg.link.n_symbols < 100)
        std::cerr << "warning: the normal approximation is calibrated for n >= 100 channel uses"
                  << " (this link has n = " << cfg.link.n_symbols << ")\n";
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path out(dir);
    fs::create_directories(out);
    return out;
}

int cmd_run(const CommonArgs& args) {
    const io::LoadedConfig loaded = load_with_overrides(args);
    const sim::ExperimentConfig& cfg = loaded.experiment;
    warn_short_blocklength(cfg, args.quiet);
    const fs::path out = prepare_out_dir(args.out_dir);

    const sim::MonteCarloResult mc = sim::run_monte_carlo(cfg);

    io::CsvBuilder rounds("replica,round,elapsed_symbols,participation,mse");
    for (std::size_t i = 0; i < mc.replicas.size(); ++i) {
        for (const auto& log : mc.replicas[i]) {
            rounds.field(i)
                .field(log.round)
                .field(log.elapsed_symbols)
                .field(log.participation)
                .field(log.mse);
            rounds.end_row();
        }
    }
    rounds.commit(out / "rounds.csv");

    io::CsvBuilder summary("scheme,rate,gamma0_db,m,rounds,final_mse_mean,final_mse_var");
    summary.field(aggregation::to_string(cfg.scheme.kind))
        .field(cfg.link.rate)
        .field(cfg.snr_db)
        .field(cfg.scheme.memory_depth)
        .field(mc.mean_mse.size())
        .field(mc.final_mse_mean())
        .field(mc.final_mse_variance());
    summary.end_row();
    summary.commit(out / "summary.csv");

    if (!args.quiet) {
        std::cout << "scheme=" << aggregation::to_string(cfg.scheme.kind) << " rate=" << cfg.link.rate
                  << " gamma0_db=" << cfg.snr_db << " m=" << cfg.scheme.memory_depth
                  << " rounds=" << mc.mean_mse.size() << " final_mse_mean=" << mc.final_mse_mean()
                  << " final_mse_var=" << mc.final_mse_variance() << "\n";
    }
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    io::LoadedConfig loaded = load_with_overrides(args);
    if (!loaded.sweep) throw io::ConfigError(args.config_path + ": missing 'sweep' object");
    sim::SweepSpec spec = *loaded.sweep;
    if (spec.rates.empty() || spec.snr_db.empty())
        throw io::ConfigError(args.config_path + ": sweep axes 'rates' and 'snr_db' must be nonempty");
    warn_short_blocklength(loaded.experiment, args.quiet);

    if (!args.quiet) {
        sim::SweepSpec check = spec;
        const bool dup = sim::dedup_axis(check.rates) || sim::dedup_axis(check.snr_db) ||
                         sim::dedup_axis(check.memory_depths);
        if (dup) std::cerr << "warning: duplicate sweep axis values were deduplicated\n";
    }

    const fs::path out = prepare_out_dir(args.out_dir);
    const std::vector<sim::SweepRow> rows = sim::sweep(spec, loaded.experiment);

    io::CsvBuilder csv("rate,gamma0_db,m,rounds,final_mse_mean,final_mse_var");
    for (const auto& row : rows) {
        csv.field(row.rate)
            .field(row.gamma0_db)
            .field(row.memory_depth)
            .field(row.rounds)
            .field(row.final_mse_mean)
            .field(row.final_mse_var);
        csv.end_row();
    }
    csv.commit(out / "sweep.csv");

    if (!args.quiet) std::cout << "wrote " << rows.size() << " sweep rows to " << (out / "sweep.csv").string() << "\n";
    return 0;
}

std::vector<double> parse_eps_list(const std::string& text) {
    std::vector<double> eps;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t comma = text.find(',', begin);
        const std::string item =
            text.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin);
        std::size_t consumed = 0;
        double value = 0.0;
        try {
            value = std::stod(item, &consumed);
        } catch (const std::exception&) {
            throw io::ConfigError("--eps: cannot parse '" + item + "' as a probability");
        }
        if (consumed != item.size())
            throw io::ConfigError("--eps: trailing characters in '" + item + "'");
        if (!(value >= 0.0 && value <= 1.0))
            throw io::ConfigError("--eps: " + item + " is outside [0, 1]");
        eps.push_back(value);
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    return eps;
}

int cmd_bounds(const std::string& eps_text, const CommonArgs& args) {
    const analysis::ErasureProfile profile{parse_eps_list(eps_text)};
    profile.validate();
    const analysis::LeCamReport rep = analysis::le_cam_check(profile);

    std::cout << "lambda = " << io::format_double(rep.lambda) << "\n"
              << "tv_sum = " << io::format_double(rep.tv_sum) << "\n"
              << "bound  = " << io::format_double(rep.bound) << "\n"
              << "holds  = " << (rep.holds ? "true" : "false") << "\n";

    if (args.out_dir != ".") {
        const fs::path out = prepare_out_dir(args.out_dir);
        io::CsvBuilder csv("lambda,tv_sum,bound,holds");
        csv.field(rep.lambda).field(rep.tv_sum).field(rep.bound).field(rep.holds ? 1 : 0);
        csv.end_row();
        csv.commit(out / "bounds.csv");
    }
    return rep.holds ? 0 : 1;
}

int cmd_dataset(const CommonArgs& args) {
    const io::LoadedConfig loaded = load_with_overrides(args);
    const sim::ExperimentConfig& cfg = loaded.experiment;
    const fs::path out = prepare_out_dir(args.out_dir);

    // same stream as run's replica 0, so the dump matches what a run trains on
    RngStream rng = RngStream::for_stream(cfg.base_seed, 0);
    const auto datasets = sim::generate_noniid_datasets(cfg.num_users, cfg.samples_per_user,
                                                        cfg.interval_width, cfg.noise_variance, rng);

    io::CsvBuilder csv("user,x,y");
    for (std::size_t u = 0; u < datasets.size(); ++u) {
        for (const auto& s : datasets[u].samples) {
            csv.field(u + 1).field(s.x).field(s.y);
            csv.end_row();
        }
    }
    csv.commit(out / "dataset.csv");
    if (!args.quiet)
        std::cout << "wrote " << cfg.num_users * cfg.samples_per_user << " samples to "
                  << (out / "dataset.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated averaging over packet-erasure wireless links: simulator and diagnostics"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, bounds_args, dataset_args;
    std::string eps_text;

    auto* run = app.add_subcommand("run", "run one experiment config and write rounds.csv/summary.csv");
    add_common(run, run_args, true);

    auto* sweep = app.add_subcommand("sweep", "run a rate/SNR/memory grid and write sweep.csv");
    add_common(sweep, sweep_args, true);

    auto* bounds = app.add_subcommand("bounds", "Poisson-approximation check for an erasure profile");
    bounds->add_option("--eps", eps_text, "comma-separated per-user erasure probabilities")->required();
    add_common(bounds, bounds_args, false);

    auto* dataset = app.add_subcommand("dataset", "generate the non-i.i.d. datasets and write dataset.csv");
    add_common(dataset, dataset_args, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (bounds->parsed()) return cmd_bounds(eps_text, bounds_args);
        if (dataset->parsed()) return cmd_dataset(dataset_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
