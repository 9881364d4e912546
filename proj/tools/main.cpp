#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sapit/channel.hpp"
#include "sapit/csv.hpp"
#include "sapit/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    int threads = 0;
};

int load_config(const CommonArgs& a, const char* forced_kind,
                sapit::ExperimentConfig& cfg) {
    std::string text;
    if (!a.preset.empty()) {
        try {
            text = sapit::preset_text(a.preset);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
    } else if (!a.config_path.empty()) {
        std::ifstream f(a.config_path, std::ios::binary);
        if (!f) {
            std::cerr << "config error: cannot read " << a.config_path << "\n";
            return kExitConfig;
        }
        std::ostringstream os;
        os << f.rdbuf();
        text = os.str();
    } else {
        std::cerr << "config error: provide --config or --preset\n";
        return kExitConfig;
    }
    std::vector<std::string> errors;
    cfg = sapit::parse_config_text(text, errors);
    if (a.seed_set) cfg.seed = a.seed;
    if (a.trials > 0) cfg.trials = a.trials;
    cfg.out = a.out;
    cfg.threads = a.threads;
    if (forced_kind) cfg.kind = forced_kind;
    errors = sapit::validate_config(cfg);
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "flat key = value config file");
    cmd->add_option("--preset", a.preset, "named preset");
    cmd->add_option("--out", a.out, "output directory");
    cmd->add_option("--seed", a.seed, "master seed")
        ->each([&a](const std::string&) { a.seed_set = true; });
    cmd->add_option("--trials", a.trials, "Monte Carlo trials");
    cmd->add_option("--threads", a.threads, "worker threads (0 = auto)");
}

int run_kind(const CommonArgs& a, const char* forced_kind) {
    sapit::ExperimentConfig cfg;
    int rc = load_config(a, forced_kind, cfg);
    if (rc != kExitOk) return rc;
    try {
        rc = sapit::run_experiment(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    if (rc == kExitNumerical)
        std::cerr << "numerical failure: divergence in more than 10% of trials; "
                     "see CSV diverged_frac column\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link-level simulator and analysis toolkit for simultaneous "
                 "active and passive information transfer over RIS-aided MIMO"};
    app.require_subcommand(1);

    CommonArgs sim_args, se_args, rate_args, ch_args;
    auto* sim = app.add_subcommand("simulate", "run the configured experiment");
    add_common(sim, sim_args);
    auto* se = app.add_subcommand("se", "state-evolution trajectory only");
    add_common(se, se_args);
    auto* rate = app.add_subcommand("rate", "achievable-rate computation only");
    add_common(rate, rate_args);
    auto* ch = app.add_subcommand("channels", "generate and dump a channel set");
    add_common(ch, ch_args);
    std::string ch_file = "channels.bin";
    ch->add_option("--file", ch_file, "output file name");
    auto* pr = app.add_subcommand("presets", "list available presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (pr->parsed()) {
        for (const auto& name : sapit::list_presets()) std::cout << name << "\n";
        return kExitOk;
    }
    if (sim->parsed()) return run_kind(sim_args, nullptr);
    if (se->parsed()) return run_kind(se_args, "se-only");
    if (rate->parsed()) return run_kind(rate_args, "rate-only");
    if (ch->parsed()) {
        sapit::ExperimentConfig cfg;
        int rc = load_config(ch_args, nullptr, cfg);
        if (rc != kExitOk) return rc;
        try {
            sapit::Geometry geo;
            sapit::PathLossParams pl;
            sapit::RngStream rng(cfg.seed, 1);
            sapit::ChannelSet chs = sapit::gen_channels(
                sapit::Dims{cfg.N, cfg.M, cfg.K}, geo, pl, rng);
            std::filesystem::create_directories(cfg.out);
            sapit::dump_channels(chs, cfg.seed, cfg.out + "/" + ch_file);
            sapit::CsvWriter w({"config_hash", "seed", "N", "M", "K", "G_frob2",
                                "H_frob2", "F_frob2"});
            w.add_row({sapit::CsvWriter::num(sapit::config_hash(cfg)),
                       sapit::CsvWriter::num(cfg.seed),
                       sapit::CsvWriter::num(static_cast<std::int64_t>(cfg.N)),
                       sapit::CsvWriter::num(static_cast<std::int64_t>(cfg.M)),
                       sapit::CsvWriter::num(static_cast<std::int64_t>(cfg.K)),
                       sapit::CsvWriter::num(chs.G.squaredNorm()),
                       sapit::CsvWriter::num(chs.H.squaredNorm()),
                       sapit::CsvWriter::num(chs.F.squaredNorm())});
            w.write(cfg.out + "/channels.csv");
        } catch (const std::exception& e) {
            std::cerr << "numerical failure: " << e.what() << "\n";
            return kExitNumerical;
        }
        return kExitOk;
    }
    return kExitConfig;
}
