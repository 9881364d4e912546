#include "sapit/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sapit/csv.hpp"
#include "sapit/rate_analysis.hpp"
#include "sapit/receiver.hpp"

namespace sapit {

namespace {

const std::vector<std::string> kKinds = {"mse-vs-iteration", "ber-vs-power",
                                         "rate-vs-N", "se-only", "rate-only"};
const std::vector<std::string> kModes = {"joint", "separate", "uncoded"};
const std::vector<std::string> kGenies = {"none", "known_s", "known_x"};
const std::vector<std::string> kMods = {"bpsk", "qpsk", "8psk", "16qam", "64qam"};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1" || v == "yes") { out = true; return true; }
    if (v == "false" || v == "0" || v == "no") { out = false; return true; }
    return false;
}

template <typename T>
bool parse_num(const std::string& v, T& out) {
    std::istringstream is(v);
    is >> out;
    return static_cast<bool>(is) && is.eof();
}

bool parse_double(const std::string& v, double& out) {
    if (v == "-inf") { out = -std::numeric_limits<double>::infinity(); return true; }
    return parse_num(v, out);
}

template <typename T, typename F>
bool parse_list(const std::string& v, std::vector<T>& out, F&& one) {
    out.clear();
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) return false;
        T x;
        if (!one(item, x)) return false;
        out.push_back(x);
    }
    return !out.empty();
}

}  // namespace

Constellation make_tx_constellation(const std::string& name) {
    if (name == "bpsk") return make_psk(2);
    if (name == "qpsk") return make_psk(4);
    if (name == "8psk") return make_psk(8);
    if (name == "16qam") return make_qam(16);
    if (name == "64qam") return make_qam(64);
    throw std::invalid_argument("unknown modulation: " + name);
}

ExperimentConfig parse_config_text(const std::string& text,
                                   std::vector<std::string>& errors) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    bool saw_seed = false;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || (line.front() == '[' && line.back() == ']')) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        bool ok = true;
        if (key == "kind") cfg.kind = val;
        else if (key == "N") ok = parse_num(val, cfg.N);
        else if (key == "M") ok = parse_num(val, cfg.M);
        else if (key == "K") ok = parse_num(val, cfg.K);
        else if (key == "N_P") ok = parse_num(val, cfg.N_P);
        else if (key == "Q") ok = parse_num(val, cfg.Q);
        else if (key == "T") ok = parse_num(val, cfg.T);
        else if (key == "tx_mod") cfg.tx_mod = val;
        else if (key == "ris_order") ok = parse_num(val, cfg.ris_order);
        else if (key == "coded") ok = parse_bool(val, cfg.coded);
        else if (key == "mode") cfg.mode = val;
        else if (key == "direct_link") ok = parse_bool(val, cfg.direct_link);
        else if (key == "genie") cfg.genie = val;
        else if (key == "csi_nmse_db") ok = parse_double(val, cfg.csi_nmse_db);
        else if (key == "power_dbm")
            ok = parse_list<double>(val, cfg.power_dbm, parse_double);
        else if (key == "sweep_n")
            ok = parse_list<int>(val, cfg.sweep_n,
                                 [](const std::string& s, int& x) { return parse_num(s, x); });
        else if (key == "trials") ok = parse_num(val, cfg.trials);
        else if (key == "seed") { ok = parse_num(val, cfg.seed); saw_seed = ok; }
        else if (key == "iters") ok = parse_num(val, cfg.iters);
        else if (key == "noise_var") ok = parse_double(val, cfg.noise_var);
        else if (key == "se_samples") ok = parse_num(val, cfg.se_samples);
        else if (key == "rate_paths") ok = parse_num(val, cfg.rate_paths);
        else if (key == "rate_path_points") ok = parse_num(val, cfg.rate_path_points);
        else if (key == "rate_mc") ok = parse_num(val, cfg.rate_mc);
        else if (key == "out") cfg.out = val;
        else if (key == "threads") ok = parse_num(val, cfg.threads);
        else errors.push_back("unknown config key: " + key);
        if (!ok) errors.push_back("invalid value for " + key + ": " + val);
    }
    if (!saw_seed)
        cfg.warnings.push_back("seed not specified; defaulted to " +
                               std::to_string(cfg.seed));
    auto more = validate_config(cfg);
    errors.insert(errors.end(), more.begin(), more.end());
    return cfg;
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> errs;
    auto in = [](const std::vector<std::string>& set, const std::string& v) {
        return std::find(set.begin(), set.end(), v) != set.end();
    };
    if (!in(kKinds, cfg.kind)) errs.push_back("unknown kind: " + cfg.kind);
    if (!in(kModes, cfg.mode)) errs.push_back("unknown mode: " + cfg.mode);
    if (!in(kGenies, cfg.genie)) errs.push_back("unknown genie: " + cfg.genie);
    if (!in(kMods, cfg.tx_mod)) errs.push_back("unknown tx_mod: " + cfg.tx_mod);
    if (cfg.N <= 0 || cfg.M <= 0 || cfg.K <= 0)
        errs.push_back("dimensions N, M, K must be positive");
    if (cfg.N_P < 1 || cfg.N_P >= cfg.N)
        errs.push_back("pilot rows must be fewer than N (and at least 1)");
    if (cfg.Q < 1 || cfg.T < 1) errs.push_back("Q and T must be >= 1");
    if (cfg.ris_order < 2 || (cfg.ris_order & (cfg.ris_order - 1)))
        errs.push_back("ris_order must be a power of two >= 2");
    if (cfg.trials < 1) errs.push_back("trials must be >= 1");
    if (cfg.iters < 1) errs.push_back("iters must be >= 1");
    if (cfg.power_dbm.empty()) errs.push_back("power_dbm sweep must be non-empty");
    if (cfg.kind == "rate-vs-N" && cfg.sweep_n.empty())
        errs.push_back("sweep_n must be non-empty for rate-vs-N");
    for (int n : cfg.sweep_n)
        if (n <= cfg.N_P) errs.push_back("sweep_n entries must exceed N_P");
    if (cfg.noise_var <= 0.0) errs.push_back("noise_var must be positive");
    if (cfg.trials >= 1 && cfg.se_samples < 1000)
        errs.push_back("se_samples must be >= 1000");
    return errs;
}

std::string normalized_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "kind=" << cfg.kind << "\nN=" << cfg.N << "\nM=" << cfg.M
       << "\nK=" << cfg.K << "\nN_P=" << cfg.N_P << "\nQ=" << cfg.Q
       << "\nT=" << cfg.T << "\ntx_mod=" << cfg.tx_mod
       << "\nris_order=" << cfg.ris_order << "\ncoded=" << (cfg.coded ? 1 : 0)
       << "\nmode=" << cfg.mode << "\ndirect_link=" << (cfg.direct_link ? 1 : 0)
       << "\ngenie=" << cfg.genie << "\ncsi_nmse_db=" << CsvWriter::num(cfg.csi_nmse_db)
       << "\npower_dbm=";
    for (std::size_t i = 0; i < cfg.power_dbm.size(); ++i)
        os << (i ? "," : "") << CsvWriter::num(cfg.power_dbm[i]);
    os << "\nsweep_n=";
    for (std::size_t i = 0; i < cfg.sweep_n.size(); ++i)
        os << (i ? "," : "") << cfg.sweep_n[i];
    os << "\ntrials=" << cfg.trials << "\nseed=" << cfg.seed
       << "\niters=" << cfg.iters << "\nnoise_var=" << CsvWriter::num(cfg.noise_var)
       << "\nse_samples=" << cfg.se_samples << "\nrate_paths=" << cfg.rate_paths
       << "\nrate_path_points=" << cfg.rate_path_points
       << "\nrate_mc=" << cfg.rate_mc << "\n";
    return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    return fnv1a(normalized_text(cfg));
}

namespace {

const std::map<std::string, std::string> kPresets = {
    {"fig4-left",
     "kind = mse-vs-iteration\nN = 512\nM = 512\nK = 64\nN_P = 40\nQ = 1000\nT = 1\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = false\nmode = uncoded\n"
     "direct_link = false\npower_dbm = 12\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig4-left-desk",
     "kind = mse-vs-iteration\nN = 256\nM = 256\nK = 32\nN_P = 20\nQ = 64\nT = 1\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = false\nmode = uncoded\n"
     "direct_link = false\npower_dbm = 12\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig4-right",
     "kind = mse-vs-iteration\nN = 512\nM = 512\nK = 64\nN_P = 40\nQ = 1000\nT = 1\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = false\nmode = uncoded\n"
     "direct_link = true\npower_dbm = 8\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig4-right-desk",
     "kind = mse-vs-iteration\nN = 256\nM = 256\nK = 32\nN_P = 20\nQ = 64\nT = 1\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = false\nmode = uncoded\n"
     "direct_link = true\npower_dbm = 8\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig5-left",
     "kind = ber-vs-power\nN = 512\nM = 512\nK = 64\nN_P = 40\nQ = 100\nT = 2\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = false\nmode = uncoded\n"
     "direct_link = true\npower_dbm = 0,3,6,9,12\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig5-left-desk",
     "kind = ber-vs-power\nN = 256\nM = 256\nK = 32\nN_P = 20\nQ = 16\nT = 2\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = false\nmode = uncoded\n"
     "direct_link = true\npower_dbm = 0,3,6,9,12\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig5-right",
     "kind = ber-vs-power\nN = 512\nM = 512\nK = 64\nN_P = 40\nQ = 100\nT = 2\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = true\nmode = joint\n"
     "direct_link = true\npower_dbm = 0,2,4,6,8\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig5-right-desk",
     "kind = ber-vs-power\nN = 256\nM = 256\nK = 32\nN_P = 20\nQ = 16\nT = 2\n"
     "tx_mod = qpsk\nris_order = 2\ncoded = true\nmode = joint\n"
     "direct_link = true\npower_dbm = 0,2,4,6,8\ntrials = 20\niters = 20\nseed = 1\n"},
    {"fig6-left",
     "kind = rate-vs-N\nN = 512\nM = 512\nK = 64\nN_P = 40\nQ = 1\nT = 1\n"
     "tx_mod = qpsk\nris_order = 2\nmode = joint\ndirect_link = true\n"
     "power_dbm = 12\nsweep_n = 200,400,600,800\ntrials = 1\nseed = 1\n"},
    {"fig6-left-desk",
     "kind = rate-vs-N\nN = 256\nM = 256\nK = 32\nN_P = 20\nQ = 1\nT = 1\n"
     "tx_mod = qpsk\nris_order = 2\nmode = joint\ndirect_link = true\n"
     "power_dbm = 12\nsweep_n = 64,128,192,256\ntrials = 1\nseed = 1\n"},
    {"fig6-right",
     "kind = rate-vs-N\nN = 512\nM = 512\nK = 64\nN_P = 40\nQ = 1\nT = 2\n"
     "tx_mod = qpsk\nris_order = 2\nmode = joint\ndirect_link = true\n"
     "power_dbm = 12\nsweep_n = 200,400,600,800\ntrials = 1\nseed = 1\n"},
    {"fig6-right-desk",
     "kind = rate-vs-N\nN = 256\nM = 256\nK = 32\nN_P = 20\nQ = 1\nT = 2\n"
     "tx_mod = qpsk\nris_order = 2\nmode = joint\ndirect_link = true\n"
     "power_dbm = 12\nsweep_n = 64,128,192,256\ntrials = 1\nseed = 1\n"},
};

}  // namespace

std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    for (const auto& [k, v] : kPresets) names.push_back(k);
    return names;
}

std::string preset_text(const std::string& name) {
    auto it = kPresets.find(name);
    if (it == kPresets.end()) throw std::invalid_argument("unknown preset: " + name);
    return it->second;
}

SeConfig make_se_config(const ExperimentConfig& cfg, double power_dbm) {
    Geometry geo;
    PathLossParams pl;
    double beta_g = path_loss(distance(geo.ris, geo.rx), pl, LinkKind::Ris);
    double beta_f = path_loss(distance(geo.tx, geo.ris), pl, LinkKind::Ris);
    double beta_h = path_loss(distance(geo.tx, geo.rx), pl, LinkKind::Direct);
    double g2 = static_cast<double>(cfg.M) * cfg.N * beta_g;
    double f2 = static_cast<double>(cfg.N) * cfg.K * beta_f;
    double h2 = static_cast<double>(cfg.M) * cfg.K * beta_h;
    double p_sym = dbm_to_watts(power_dbm) / cfg.K;

    SeConfig se;
    se.N = cfg.N; se.M = cfg.M; se.K = cfg.K; se.N_P = cfg.N_P; se.T = cfg.T;
    se.x_const = make_tx_constellation(cfg.tx_mod);
    se.s_phases = make_ris_phases(cfg.ris_order);
    se.direct_link = cfg.direct_link;
    if (cfg.direct_link) {
        se.zeta = g2 * f2 / (cfg.N * h2);
        se.sigma2 = cfg.noise_var * cfg.K / (h2 * p_sym);
    } else {
        se.zeta = g2 * f2 * p_sym / (static_cast<double>(cfg.N) * cfg.K);
        se.sigma2 = cfg.noise_var;
    }
    se.mc_samples = cfg.se_samples;
    se.seed = cfg.seed ^ 0x5E5E5E5Eull;
    if (cfg.coded && cfg.mode == "joint") {
        se.x_dec.kind = DecoderModel::Kind::Empirical;
        se.s_dec.kind = DecoderModel::Kind::Empirical;
    }
    if (cfg.genie == "known_s") se.s_dec.kind = DecoderModel::Kind::Genie;
    if (cfg.genie == "known_x") se.x_dec.kind = DecoderModel::Kind::Genie;
    return se;
}

namespace {

struct TrialOut {
    double ber_x = 0.0, ber_s = 0.0;
    std::vector<double> mse_x, mse_s;
    bool diverged = false;
};

FrameConfig make_frame_config(const ExperimentConfig& cfg, double power) {
    FrameConfig fc;
    fc.dims = Dims{cfg.N, cfg.M, cfg.K};
    fc.N_P = cfg.N_P;
    fc.Q = cfg.Q;
    fc.T = cfg.T;
    fc.tx_const = make_tx_constellation(cfg.tx_mod);
    fc.ris_phases = make_ris_phases(cfg.ris_order);
    fc.tx_power_dbm = power;
    fc.noise_var = cfg.noise_var;
    fc.coded = cfg.coded && cfg.mode != "uncoded";
    return fc;
}

double bit_errors_from_indices(const std::vector<int>& hat,
                               const std::vector<int>& truth,
                               const Constellation& c) {
    long err = 0;
    for (std::size_t i = 0; i < hat.size(); ++i)
        err += std::popcount(c.labels[hat[i]] ^ c.labels[truth[i]]);
    return static_cast<double>(err) /
           (static_cast<double>(hat.size()) * c.bits_per_symbol);
}

TrialOut run_trial(const ExperimentConfig& cfg, const FrameConfig& fc,
                   std::uint64_t trial) {
    Geometry geo;
    PathLossParams pl;
    RngStream ch_rng(cfg.seed, trial * 8 + 1);
    RngStream csi_rng(cfg.seed, trial * 8 + 2);
    RngStream frame_rng(cfg.seed, trial * 8 + 3);

    ChannelSet ch = gen_channels(fc.dims, geo, pl, ch_rng);
    if (!cfg.direct_link) ch.H.setZero();
    ChannelSet ch_est = perturb_csi(ch, cfg.csi_nmse_db, csi_rng);
    if (!cfg.direct_link) ch_est.H.setZero();

    Interleaver tx_pi = fc.coded
                            ? Interleaver::random(fc.tx_coded_bits(), cfg.seed ^ 0xA1)
                            : Interleaver::identity(std::max(1, fc.tx_coded_bits()));
    Interleaver ris_pi = fc.coded
                             ? Interleaver::random(fc.ris_coded_bits(), cfg.seed ^ 0xB2)
                             : Interleaver::identity(std::max(1, fc.ris_coded_bits()));

    FrameData frame = random_frame(fc, ch, tx_pi, ris_pi, frame_rng);

    ReceiverConfig rc;
    rc.mode = cfg.mode == "joint" && fc.coded ? ReceiverConfig::Mode::Joint
              : cfg.mode == "separate" && fc.coded ? ReceiverConfig::Mode::Separate
                                                   : ReceiverConfig::Mode::Uncoded;
    rc.genie = cfg.genie == "known_s"   ? ReceiverConfig::Genie::KnownS
               : cfg.genie == "known_x" ? ReceiverConfig::Genie::KnownX
                                        : ReceiverConfig::Genie::None;
    rc.direct_link = cfg.direct_link;
    rc.max_iters = cfg.iters;
    rc.stop_tol = cfg.kind == "mse-vs-iteration" ? 0.0 : 1e-4;

    Receiver rx(ch_est, fc, rc, frame.S.topRows(fc.N_P),
                fc.coded ? &tx_pi : nullptr, fc.coded ? &ris_pi : nullptr);
    DetectionResult res = rx.run(frame.Y, &frame);

    TrialOut out;
    out.diverged = res.diverged;
    for (const auto& tr : res.trace) {
        out.mse_x.push_back(tr.mse_x);
        out.mse_s.push_back(tr.mse_s);
    }
    if (fc.coded) {
        long ex = 0;
        for (std::size_t i = 0; i < res.tx_bits_hat.size(); ++i)
            ex += res.tx_bits_hat[i] != frame.tx_bits[i];
        out.ber_x = static_cast<double>(ex) / res.tx_bits_hat.size();
        long es = 0;
        for (std::size_t i = 0; i < res.ris_bits_hat.size(); ++i)
            es += res.ris_bits_hat[i] != frame.ris_bits[i];
        out.ber_s = static_cast<double>(es) / res.ris_bits_hat.size();
    } else {
        out.ber_x = bit_errors_from_indices(res.hard_x_idx, frame.tx_symbol_idx,
                                            fc.tx_const);
        out.ber_s = bit_errors_from_indices(res.hard_s_idx, frame.ris_symbol_idx,
                                            fc.ris_phases.constellation);
    }
    return out;
}

void mean_stderr(const std::vector<double>& v, double* mean, double* se) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    *mean = m;
    *se = v.size() > 1
              ? std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) / v.size())
              : 0.0;
}

void write_plot_script(const ExperimentConfig& cfg, const std::string& csv,
                       const std::string& x, const std::string& y,
                       const std::string& path, bool logy) {
    std::ofstream f(path, std::ios::binary);
    f << "# gnuplot script generated by the sapit harness\n"
      << "set datafile separator ','\nset key autotitle columnhead\n"
      << "set xlabel '" << x << "'\nset ylabel '" << y << "'\n";
    if (logy) f << "set logscale y\n";
    f << "set terminal pngcairo size 900,600\nset output '" << cfg.kind
      << ".png'\nplot '" << csv << "' using 3:4 with linespoints\n";
}

int run_mse_vs_iteration(const ExperimentConfig& cfg) {
    const double power = cfg.power_dbm.front();
    FrameConfig fc = make_frame_config(cfg, power);
    std::vector<TrialOut> trials(cfg.trials);
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < cfg.trials; ++t) trials[t] = run_trial(cfg, fc, t);

    SeConfig se = make_se_config(cfg, power);
    se.max_iters = cfg.iters;
    se.stop_tol = 0.0;
    SeResult ser = run_se(se);

    CsvWriter w({"config_hash", "seed", "iteration", "sim_mse_x", "sim_mse_x_stderr",
                 "sim_mse_s", "sim_mse_s_stderr", "se_v_x", "se_v_s", "trials"});
    std::uint64_t h = config_hash(cfg);
    int n_div = 0;
    for (const auto& t : trials) n_div += t.diverged;
    for (int it = 0; it < cfg.iters; ++it) {
        std::vector<double> mx, ms;
        for (const auto& t : trials) {
            mx.push_back(it < static_cast<int>(t.mse_x.size()) ? t.mse_x[it]
                                                               : t.mse_x.back());
            ms.push_back(it < static_cast<int>(t.mse_s.size()) ? t.mse_s[it]
                                                               : t.mse_s.back());
        }
        double mxm, mxe, msm, mse;
        mean_stderr(mx, &mxm, &mxe);
        mean_stderr(ms, &msm, &mse);
        double sx = it < static_cast<int>(ser.trace.size()) ? ser.trace[it].v_x
                                                            : ser.trace.back().v_x;
        double ss = it < static_cast<int>(ser.trace.size()) ? ser.trace[it].v_s
                                                            : ser.trace.back().v_s;
        w.add_row({CsvWriter::num(h), CsvWriter::num(cfg.seed),
                   CsvWriter::num(static_cast<std::int64_t>(it + 1)),
                   CsvWriter::num(mxm), CsvWriter::num(mxe), CsvWriter::num(msm),
                   CsvWriter::num(mse), CsvWriter::num(sx), CsvWriter::num(ss),
                   CsvWriter::num(static_cast<std::int64_t>(cfg.trials))});
    }
    std::string csv = cfg.out + "/mse-vs-iteration.csv";
    w.write(csv);
    write_plot_script(cfg, csv, "iteration", "MSE", cfg.out + "/mse-vs-iteration.gnuplot",
                      true);
    return n_div * 10 > cfg.trials ? 3 : 0;
}

int run_ber_vs_power(const ExperimentConfig& cfg) {
    CsvWriter w({"config_hash", "seed", "power_dbm", "ber_x", "ber_x_stderr",
                 "ber_s", "ber_s_stderr", "diverged_frac", "trials"});
    std::uint64_t h = config_hash(cfg);
    bool too_many_div = false;
    for (std::size_t pi = 0; pi < cfg.power_dbm.size(); ++pi) {
        double power = cfg.power_dbm[pi];
        FrameConfig fc = make_frame_config(cfg, power);
        std::vector<TrialOut> trials(cfg.trials);
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < cfg.trials; ++t)
            trials[t] = run_trial(cfg, fc, pi * 100000 + t);
        std::vector<double> bx, bs;
        int n_div = 0;
        for (const auto& t : trials) {
            bx.push_back(t.ber_x);
            bs.push_back(t.ber_s);
            n_div += t.diverged;
        }
        double bxm, bxe, bsm, bse;
        mean_stderr(bx, &bxm, &bxe);
        mean_stderr(bs, &bsm, &bse);
        double dv = static_cast<double>(n_div) / cfg.trials;
        if (dv > 0.1) too_many_div = true;
        w.add_row({CsvWriter::num(h), CsvWriter::num(cfg.seed), CsvWriter::num(power),
                   CsvWriter::num(bxm), CsvWriter::num(bxe), CsvWriter::num(bsm),
                   CsvWriter::num(bse), CsvWriter::num(dv),
                   CsvWriter::num(static_cast<std::int64_t>(cfg.trials))});
    }
    std::string csv = cfg.out + "/ber-vs-power.csv";
    w.write(csv);
    write_plot_script(cfg, csv, "transmit power (dBm)", "BER",
                      cfg.out + "/ber-vs-power.gnuplot", true);
    return too_many_div ? 3 : 0;
}

RateConfig make_rate_config(const ExperimentConfig& cfg) {
    RateConfig rc;
    rc.se = make_se_config(cfg, cfg.power_dbm.front());
    rc.se.mc_samples = cfg.rate_mc;
    rc.se.max_iters = 60;
    rc.se.stop_tol = 1e-4;
    rc.path_points = cfg.rate_path_points;
    rc.psi_s_mc = std::max(cfg.rate_mc, 10000);
    return rc;
}

int run_rate_vs_n(const ExperimentConfig& cfg) {
    CsvWriter w({"config_hash", "seed", "N", "sum_rate_bits", "separate_rate_bits",
                 "R_T_bits", "R_R_bits", "path_spread"});
    std::uint64_t h = config_hash(cfg);
    for (int n : cfg.sweep_n) {
        ExperimentConfig c2 = cfg;
        c2.N = n;
        RateConfig rc = make_rate_config(c2);
        RateResult r = sum_rate(rc, cfg.rate_paths, cfg.seed);
        RateResult sep = separate_rate(rc);
        double spread = 0.0;
        if (!r.path_values.empty()) {
            auto [mn, mx] =
                std::minmax_element(r.path_values.begin(), r.path_values.end());
            spread = *mx - *mn;
        }
        w.add_row({CsvWriter::num(h), CsvWriter::num(cfg.seed),
                   CsvWriter::num(static_cast<std::int64_t>(n)), CsvWriter::num(r.sum),
                   CsvWriter::num(sep.sum), CsvWriter::num(r.R_T),
                   CsvWriter::num(r.R_R), CsvWriter::num(spread)});
    }
    std::string csv = cfg.out + "/rate-vs-N.csv";
    w.write(csv);
    write_plot_script(cfg, csv, "RIS elements N", "sum rate (bits/channel use)",
                      cfg.out + "/rate-vs-N.gnuplot", false);
    return 0;
}

int run_se_only(const ExperimentConfig& cfg) {
    SeConfig se = make_se_config(cfg, cfg.power_dbm.front());
    se.max_iters = cfg.iters;
    SeResult r = run_se(se);
    CsvWriter w({"config_hash", "seed", "iteration", "v_x", "v_u", "v_c", "v_s",
                 "tau_d", "tau_p", "tau_o", "tau_r", "se_x_stderr", "se_s_stderr"});
    std::uint64_t h = config_hash(cfg);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const SeState& st = r.trace[i];
        w.add_row({CsvWriter::num(h), CsvWriter::num(cfg.seed),
                   CsvWriter::num(static_cast<std::int64_t>(i + 1)),
                   CsvWriter::num(st.v_x), CsvWriter::num(st.v_u),
                   CsvWriter::num(st.v_c), CsvWriter::num(st.v_s),
                   CsvWriter::num(st.tau_d), CsvWriter::num(st.tau_p),
                   CsvWriter::num(st.tau_o), CsvWriter::num(st.tau_r),
                   CsvWriter::num(st.se_x_stderr), CsvWriter::num(st.se_s_stderr)});
    }
    std::string csv = cfg.out + "/se-only.csv";
    w.write(csv);
    write_plot_script(cfg, csv, "iteration", "variance", cfg.out + "/se-only.gnuplot",
                      true);
    return 0;
}

int run_rate_only(const ExperimentConfig& cfg) {
    RateConfig rc = make_rate_config(cfg);
    RateResult r = sum_rate(rc, cfg.rate_paths, cfg.seed);
    RateResult sep = separate_rate(rc);
    CsvWriter w({"config_hash", "seed", "sum_rate_bits", "separate_rate_bits",
                 "R_T_bits", "R_R_bits", "best_path", "n_paths"});
    w.add_row({CsvWriter::num(config_hash(cfg)), CsvWriter::num(cfg.seed),
               CsvWriter::num(r.sum), CsvWriter::num(sep.sum), CsvWriter::num(r.R_T),
               CsvWriter::num(r.R_R),
               CsvWriter::num(static_cast<std::int64_t>(r.best_path)),
               CsvWriter::num(static_cast<std::int64_t>(r.path_values.size()))});
    std::string csv = cfg.out + "/rate-only.csv";
    w.write(csv);
    CsvWriter pw({"knot", "tau_x", "tau_s"});
    for (std::size_t i = 0; i < r.best_path_pts.size(); ++i)
        pw.add_row({CsvWriter::num(static_cast<std::int64_t>(i)),
                    CsvWriter::num(r.best_path_pts[i].first),
                    CsvWriter::num(r.best_path_pts[i].second)});
    pw.write(cfg.out + "/rate-only-best-path.csv");
    return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
    auto errs = validate_config(cfg);
    if (!errs.empty())
        throw std::invalid_argument("invalid config: " + errs.front());
    std::filesystem::create_directories(cfg.out);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    if (!cfg.warnings.empty()) {
        std::ofstream meta(cfg.out + "/run-metadata.txt", std::ios::binary);
        for (const auto& wmsg : cfg.warnings) meta << "warning: " << wmsg << "\n";
    }
    if (cfg.kind == "mse-vs-iteration") return run_mse_vs_iteration(cfg);
    if (cfg.kind == "ber-vs-power") return run_ber_vs_power(cfg);
    if (cfg.kind == "rate-vs-N") return run_rate_vs_n(cfg);
    if (cfg.kind == "se-only") return run_se_only(cfg);
    if (cfg.kind == "rate-only") return run_rate_only(cfg);
    throw std::invalid_argument("unknown kind: " + cfg.kind);
}

}  // namespace sapit
