#include "rewind_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rewind/bound.hpp"
#include "rewind/csv.hpp"
#include "rewind/lmg.hpp"
#include "rewind/recovery.hpp"
#include "rewind/rotor.hpp"
#include "rewind_cli/manifest.hpp"
#include "rewind_cli/svg.hpp"

namespace rewindlab::cli {

namespace {

using nlohmann::json;

struct Common {
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    unsigned threads = 1;
    std::string out;
    std::string config;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--stream", c.stream, "Random stream id")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (1 keeps runs byte-reproducible)")
        ->capture_default_str();
    sub->add_option("--out", c.out, "Output directory (default $REWIND_OUT_DIR or ./rewind-out)");
    sub->add_option("--config", c.config, "JSON object of flag values; explicit flags win");
}

std::filesystem::path out_dir(const Common& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv("REWIND_OUT_DIR"); env && *env) return env;
    return "rewind-out";
}

RunManifest start(const std::string& name, const Common& c) {
    RunManifest m(name, out_dir(c));
    m.seed = c.seed;
    m.stream = c.stream;
    m.threads = c.threads;
    return m;
}

double mean_over(std::span<const RotorPoint> curve, std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& p : curve) {
        if (p.t >= lo && p.t <= hi) {
            acc += p.r;
            ++n;
        }
    }
    return n ? acc / static_cast<double>(n) : std::nan("");
}

std::string hbar_tag(double hbar) {
    const double e = std::log2(hbar);
    if (e == std::round(e)) return "2^" + std::to_string(static_cast<long>(e));
    return csv::format(hbar);
}

// ---------------------------------------------------------------------------

struct HaarOpts {
    std::size_t d = 2;
    std::size_t bath_dim = 128;
    std::string gate = "strong";
    std::size_t samples = 100;
    std::string scrambler = "quantum";
};

int cmd_haar(const HaarOpts& o, const Common& c, std::ostream& out) {
    const EavesdropGate gate = parse_gate_spec(o.gate, o.d);
    RunManifest m = start("haar", c);
    m.params = {{"d", gate.d()},
                {"d_A", gate.ancilla_dim()},
                {"bath_dim", o.bath_dim},
                {"gate", o.gate},
                {"samples", o.samples},
                {"scrambler", o.scrambler}};
    const SeededSource src(c.seed, c.stream);
    RecoveryMc mc;
    if (o.scrambler == "quantum") {
        mc = haar_recovery_mc(o.bath_dim, gate, o.samples, src, c.threads);
    } else if (o.scrambler == "classical") {
        mc = classical_recovery_mc(gate, o.samples, src, c.threads);
    } else {
        throw std::invalid_argument("--scrambler must be quantum or classical");
    }
    std::ostringstream rows;
    write_records_csv(rows, mc.records);
    m.write_file("haar_samples.csv", rows.str());

    const PredictedRatios pr = predicted_ratios(gate);
    const json summary = {{"mean_r", mc.ratio.mean},
                          {"stderr", mc.ratio.stderr_},
                          {"samples", mc.ratio.samples},
                          {"predicted_r_q", pr.quantum},
                          {"predicted_r_c", pr.classical}};
    m.write_file("haar_summary.json", summary.dump(2) + "\n");
    m.finish();
    out << summary.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct RotorOpts {
    std::string hbars = "2^-8";
    double K = 5.0;
    double J = 1.0;
    double h = 1.0;
    std::size_t kicks = 80;
    std::size_t grid = 0;
    std::string gate = "strong";
    std::string edge_policy = "abort";
    std::string state = "random";
    std::size_t persist = 3;
};

int cmd_rotor(const RotorOpts& o, const Common& c, std::ostream& out) {
    const EavesdropGate gate = parse_gate_spec(o.gate, 2);
    const std::vector<double> hbars = parse_list(o.hbars);
    if (hbars.empty()) throw std::invalid_argument("--hbar needs at least one value");
    if (o.state != "random" && o.state != "bloch-average") {
        throw std::invalid_argument("--state must be random or bloch-average");
    }
    RunManifest m = start("rotor", c);
    m.params = {{"hbar", hbars},   {"K", o.K},         {"J", o.J},
                {"h", o.h},        {"kicks", o.kicks}, {"grid", o.grid},
                {"gate", o.gate},  {"edge_policy", o.edge_policy},
                {"state", o.state}, {"persist", o.persist}};

    SeededSource src(c.seed, c.stream);
    const PureState qubit = bloch_state(src);
    const PredictedRatios pr = predicted_ratios(gate);
    const double threshold = 0.5 * (pr.quantum + pr.classical);

    svg::Plot plot{"recovery ratio r(t)", "kicks t", "r", {}, {}};
    plot.guides = {{pr.classical, "r_c"}, {pr.quantum, "r_q"}};
    json per_hbar = json::array();
    std::vector<std::string> failures;
    for (std::size_t i = 0; i < hbars.size(); ++i) {
        RotorConfig cfg;
        cfg.hbar = hbars[i];
        cfg.K = o.K;
        cfg.J = o.J;
        cfg.h = o.h;
        cfg.kicks = o.kicks;
        cfg.grid = o.grid;
        if (o.edge_policy == "abort") {
            cfg.edge_policy = EdgePolicy::abort;
        } else if (o.edge_policy == "record") {
            cfg.edge_policy = EdgePolicy::record;
        } else {
            throw std::invalid_argument("--edge-policy must be abort or record");
        }
        cfg.validate();

        std::vector<RotorPoint> curve;
        try {
            curve = o.state == "random" ? rotor_recovery_curve(cfg, gate, qubit.amplitudes())
                                        : rotor_recovery_curve_bloch_average(cfg, gate);
        } catch (const EdgeLeakError& e) {
            failures.push_back(std::string("hbar ") + hbar_tag(cfg.hbar) + ": " + e.what());
            continue;
        }
        const std::string name = "rotor_hbar_" + hbar_tag(cfg.hbar) + ".csv";
        std::ostringstream os;
        write_rotor_csv(os, curve);
        m.write_file(name, os.str());

        double drift = 0.0, leak = 0.0;
        for (const auto& p : curve) {
            drift = std::max(drift, p.norm_drift);
            leak = std::max(leak, p.edge_leak);
        }
        if (drift >= 1e-9) failures.push_back("hbar " + hbar_tag(cfg.hbar) + ": norm drift " + csv::format(drift));
        const auto cross = crossover_time(curve, threshold, o.persist);
        per_hbar.push_back({{"hbar", cfg.hbar},
                            {"grid", cfg.resolved_grid()},
                            {"file", name},
                            {"crossover", cross ? json(*cross) : json(nullptr)},
                            {"mean_r_t3_8", mean_over(curve, 3, 8)},
                            {"mean_r_t60_80", mean_over(curve, 60, 80)},
                            {"max_norm_drift", drift},
                            {"max_edge_leak", leak}});

        svg::Series s{"hbar = " + hbar_tag(cfg.hbar), {}, {}, svg::palette(i)};
        for (const auto& p : curve) {
            s.x.push_back(static_cast<double>(p.t));
            s.y.push_back(p.r);
        }
        plot.series.push_back(std::move(s));
    }
    const json summary = {{"threshold", threshold},
                          {"predicted_r_q", pr.quantum},
                          {"predicted_r_c", pr.classical},
                          {"qubit", {{"re0", qubit.amplitudes()(0).real()},
                                     {"im0", qubit.amplitudes()(0).imag()},
                                     {"re1", qubit.amplitudes()(1).real()},
                                     {"im1", qubit.amplitudes()(1).imag()}}},
                          {"curves", per_hbar}};
    m.write_file("rotor_summary.json", summary.dump(2) + "\n");
    m.write_file("rotor.svg", svg::render(plot));
    m.failures = failures;
    m.finish();
    out << summary.dump() << '\n';
    return failures.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct BoundOpts {
    std::string mode = "scan";
    std::size_t d = 2;
    std::size_t count = 1000;
    std::size_t eps_points = 11;
    std::size_t restarts = 20;
    double tol = 1e-13;
    std::string gate;
};

svg::Series g_curve(std::size_t d) {
    svg::Series s{"g(r_q)", {}, {}, "#d62728"};
    for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        s.x.push_back(x);
        s.y.push_back(g(x, d));
    }
    return s;
}

int cmd_bound(const BoundOpts& o, const Common& c, std::ostream& out) {
    RunManifest m = start("bound", c);
    m.params = {{"mode", o.mode},         {"d", o.d},     {"count", o.count},
                {"eps_points", o.eps_points}, {"restarts", o.restarts}, {"tol", o.tol},
                {"gate", o.gate}};
    const SeededSource src(c.seed, c.stream);
    std::vector<std::string> failures;
    json summary;

    if (o.mode == "scan") {
        const auto reports = bound_sweep(o.d, o.count, src);
        std::ostringstream os;
        write_region_csv(os, reports);
        m.write_file("bound_region.csv", os.str());
        double min_margin = std::numeric_limits<double>::infinity();
        std::size_t above = 0;
        for (std::size_t k = 0; k < reports.size(); ++k) {
            min_margin = std::min(min_margin, reports[k].margin);
            if (reports[k].margin < -kMarginTol) ++above;
            for (const auto& f : reports[k].failures) failures.push_back("gate " + std::to_string(k) + ": " + f);
        }
        summary = {{"gates", reports.size()}, {"min_margin", min_margin}, {"points_above_curve", above}};
        svg::Plot plot{"admissible region, d = " + std::to_string(o.d), "r_q", "E_bar", {}, {}};
        svg::Series pts{"random gates", {}, {}, "#1f77b4", true};
        for (const auto& r : reports) {
            pts.x.push_back(r.r_q);
            pts.y.push_back(r.e_bar);
        }
        plot.series = {g_curve(o.d), pts};
        m.write_file("bound_region.svg", svg::render(plot));
    } else if (o.mode == "saturate") {
        if (o.eps_points < 2) throw std::invalid_argument("--eps-points must be >= 2");
        std::vector<double> eps;
        for (std::size_t i = 0; i < o.eps_points; ++i) {
            eps.push_back(static_cast<double>(i) / static_cast<double>(o.eps_points - 1));
        }
        const auto rows = saturation_scan(o.d, eps);
        std::ostringstream os;
        write_saturation_csv(os, rows);
        m.write_file("bound_saturation.csv", os.str());
        double worst = 0.0, resid = 0.0;
        for (const auto& r : rows) {
            worst = std::max(worst, std::abs(r.margin));
            resid = std::max(resid, r.rho_residual);
        }
        if (worst >= 1e-9) failures.push_back("saturation margin " + csv::format(worst));
        if (resid > 1e-10) failures.push_back("rho_kX residual " + csv::format(resid));
        summary = {{"max_abs_margin", worst}, {"max_rho_residual", resid}};
        svg::Plot plot{"weak measurement family, d = " + std::to_string(o.d), "r_q", "E_bar", {}, {}};
        svg::Series pts{"Fourier basis", {}, {}, "#1f77b4", true};
        for (const auto& r : rows) {
            pts.x.push_back(r.r_q);
            pts.y.push_back(r.e_bar);
        }
        plot.series = {g_curve(o.d), pts};
        m.write_file("bound_saturation.svg", svg::render(plot));
    } else if (o.mode == "ftilde") {
        std::vector<EavesdropGate> gates;
        if (!o.gate.empty()) {
            gates.push_back(parse_gate_spec(o.gate, o.d));
        } else {
            for (std::size_t k = 0; k < o.count; ++k) {
                SeededSource s = src.substream(k);
                gates.push_back(random_gate(o.d, o.d, s));
            }
        }
        std::ostringstream os;
        csv::write_header(os, {"gate_index", "E_bar", "f", "f_tilde", "converged"});
        svg::Plot plot{"optimized fidelity vs entangling power", "E_bar (computational basis)", "f~", {}, {}};
        svg::Series pts{"", {}, {}, "#1f77b4", true};
        double worst_gap = 0.0;
        bool monotone = true;
        for (std::size_t k = 0; k < gates.size(); ++k) {
            const auto& gt = gates[k];
            const double f = f_functional(gt);
            const auto ft = f_tilde(gt, o.restarts, o.tol, src.substream(1000000 + k));
            const double e = entangling_power(gt, computational_basis(gt.d()));
            csv::write_row(os, k, e, f, ft.value, ft.converged ? 1 : 0);
            worst_gap = std::min(worst_gap, ft.value - f);
            monotone = monotone && ft.monotone;
            pts.x.push_back(e);
            pts.y.push_back(ft.value);
        }
        if (worst_gap < -1e-9) failures.push_back("f_tilde below f by " + csv::format(-worst_gap));
        if (!monotone) failures.push_back("f_tilde iteration not monotone");
        m.write_file("bound_ftilde.csv", os.str());
        plot.series = {pts};
        m.write_file("bound_ftilde.svg", svg::render(plot));
        summary = {{"gates", gates.size()}, {"min_ftilde_minus_f", worst_gap}, {"monotone", monotone}};
        if (gates.size() == 1) summary["f_tilde"] = pts.y.front();
    } else {
        throw std::invalid_argument("--mode must be scan, saturate or ftilde");
    }
    m.write_file("bound_summary.json", summary.dump(2) + "\n");
    m.failures = failures;
    m.finish();
    out << summary.dump() << '\n';
    return failures.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct LmgOpts {
    int spin = 100;
    double J = 2.4;
    double h = 2.0;
    std::string bath = "mixed";
    std::string method = "exact";
    std::string times = "5,10,20,50,100";
    std::size_t samples = 300;
    std::size_t bins = 40;
    double t_max = 50.0;
    double dt = 0.5;
    std::string qubits = "up";
};

Vector named_qubit(const std::string& name) {
    const double s = 1.0 / std::numbers::sqrt2;
    Vector v(2);
    if (name == "up") {
        v << 1.0, 0.0;
    } else if (name == "down") {
        v << 0.0, 1.0;
    } else if (name == "plus") {
        v << s, s;
    } else if (name == "minus") {
        v << s, -s;
    } else {
        throw std::invalid_argument("unknown qubit state '" + name + "' (up, down, plus, minus)");
    }
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double window_stat(std::span<const TimePoint> curve, double lo, double hi, bool use_median) {
    std::vector<double> xs;
    for (const auto& p : curve) {
        if (p.t >= lo - 1e-12 && p.t <= hi + 1e-12) xs.push_back(p.r);
    }
    if (xs.empty()) return std::nan("");
    return use_median ? median(xs) : stddev(xs);
}

int cmd_lmg(const LmgOpts& o, const Common& c, std::ostream& out) {
    const EavesdropGate gate = strong_measurement(2);
    LmgConfig cfg;
    cfg.spin = o.spin;
    cfg.J = o.J;
    cfg.h = o.h;
    if (o.bath == "mixed") {
        cfg.bath = LmgBathKind::maximally_mixed;
    } else if (o.bath.rfind("coherent", 0) == 0) {
        cfg.bath = LmgBathKind::coherent;
        if (o.bath.size() > 9 && o.bath[8] == ':') {
            const auto n = parse_list(o.bath.substr(9));
            if (n.size() != 3) throw std::invalid_argument("--bath-init coherent:x,y,z needs three numbers");
            const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
            if (norm == 0.0) throw std::invalid_argument("--bath-init coherent direction is zero");
            cfg.theta = std::acos(n[2] / norm);
            cfg.phi = std::atan2(n[1], n[0]);
        }
    } else {
        throw std::invalid_argument("--bath-init must be mixed or coherent[:x,y,z]");
    }
    if (o.method == "exact") {
        cfg.method = MixedBathMethod::exact_density;
    } else if (o.method == "basis-average") {
        cfg.method = MixedBathMethod::basis_average;
    } else {
        throw std::invalid_argument("--mixed-method must be exact or basis-average");
    }
    if (!(o.dt > 0.0) || o.t_max < 0.0) throw std::invalid_argument("need dt > 0 and t-max >= 0");
    const auto steps = static_cast<std::size_t>(std::floor(o.t_max / o.dt + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) cfg.times.push_back(static_cast<double>(i) * o.dt);
    cfg.validate();

    RunManifest m = start("lmg", c);
    m.params = {{"S", o.spin},          {"J", o.J},          {"h", o.h},
                {"bath_init", o.bath},  {"mixed_method", o.method},
                {"hist_times", o.times}, {"samples", o.samples}, {"bins", o.bins},
                {"t_max", o.t_max},     {"dt", o.dt},        {"qubits", o.qubits}};

    const LmgModel model(cfg, gate);
    std::vector<svg::Plot> panels;
    svg::Plot traj{"r(t), S = " + std::to_string(o.spin), "t", "r", {}, {}};
    traj.guides = {{1.0 / 3.0, "1/3"}, {0.5, "1/2"}};
    json curves = json::array();
    const auto names = split(o.qubits, ',');
    if (names.empty()) throw std::invalid_argument("--qubits needs at least one state");

    double first_std = 0.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto curve = model.curve(named_qubit(names[i]));
        std::ostringstream os;
        write_trajectory_csv(os, curve);
        const std::string file = "lmg_trajectory_" + names[i] + ".csv";
        m.write_file(file, os.str());
        const double med = window_stat(curve, 5.0, 20.0, true);
        const double sd = window_stat(curve, 5.0, 50.0, false);
        if (i == 0) first_std = sd;
        curves.push_back({{"qubit", names[i]}, {"file", file}, {"median_r_t5_20", med}, {"stddev_r_t5_50", sd}});
        svg::Series s{names[i], {}, {}, svg::palette(i)};
        for (const auto& p : curve) {
            s.x.push_back(p.t);
            s.y.push_back(p.r);
        }
        traj.series.push_back(std::move(s));
    }
    panels.push_back(traj);

    json summary = {{"curves", curves}};
    if (cfg.bath == LmgBathKind::coherent) {
        LmgConfig ref = cfg;
        ref.bath = LmgBathKind::maximally_mixed;
        const auto ref_curve = LmgModel(ref, gate).curve(named_qubit(names.front()));
        const double ref_std = window_stat(ref_curve, 5.0, 50.0, false);
        summary["reference_mixed_stddev"] = ref_std;
        summary["oscillation"] = first_std >= 2.0 * ref_std;
    } else {
        summary["oscillation"] = false;
    }

    if (o.samples > 0) {
        const auto times = parse_list(o.times);
        const auto hists = lmg_histogram(cfg, gate, times, o.samples, SeededSource(c.seed, c.stream), o.bins);
        std::ostringstream os;
        write_histogram_csv(os, hists);
        m.write_file("lmg_histogram.csv", os.str());
        svg::Plot hp{"distribution of r over Bloch states", "r", "count", {}, {}};
        hp.height = 320;
        for (std::size_t i = 0; i < hists.size(); ++i) {
            svg::Series s{"t = " + csv::format(hists[i].t), {}, {}, svg::palette(i)};
            for (const auto& b : hists[i].bins) {
                s.x.push_back(0.5 * (b.left + b.right));
                s.y.push_back(static_cast<double>(b.count));
            }
            hp.series.push_back(std::move(s));
        }
        panels.push_back(hp);
        summary["histogram_times"] = times;
        summary["histogram_samples"] = o.samples;
    }
    m.write_file("lmg_summary.json", summary.dump(2) + "\n");
    m.write_file("lmg.svg", svg::render_panels(panels));
    m.finish();
    out << summary.dump() << '\n';
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

EavesdropGate parse_gate_spec(const std::string& spec, std::size_t d) {
    if (spec == "identity") return identity_gate(d, d);
    if (spec == "strong") return strong_measurement(d);
    if (spec.rfind("weak:", 0) == 0) {
        std::size_t pos = 0;
        const double eps = std::stod(spec.substr(5), &pos);
        if (pos + 5 != spec.size() || !(eps >= 0.0 && eps <= 1.0)) {
            throw std::invalid_argument("weak:<eps> needs eps in [0, 1]");
        }
        return weak_measurement(d, eps);
    }
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot read gate file " + path);
        return gate_from_json(json::parse(in));
    }
    throw std::invalid_argument("unknown gate spec '" + spec + "' (identity | strong | weak:<eps> | file:<path>)");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) {
        std::size_t pos = 0;
        double v;
        if (item.rfind("2^", 0) == 0) {
            v = std::ldexp(1.0, std::stoi(item.substr(2), &pos));
            pos += 2;
        } else {
            v = std::stod(item, &pos);
        }
        if (pos != item.size()) throw std::invalid_argument("bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty() || args.empty()) return args;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config " + path);
    const json cfg = json::parse(in);
    if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");

    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "config") continue;
        std::string text;
        if (value.is_boolean()) {
            if (value.get<bool>()) extra.push_back("--" + key);
            continue;
        }
        if (value.is_array()) {
            for (const auto& v : value) {
                if (!text.empty()) text += ',';
                text += v.is_string() ? v.get<std::string>() : v.dump();
            }
        } else {
            text = value.is_string() ? value.get<std::string>() : value.dump();
        }
        extra.push_back("--" + key + "=" + text);
    }
    std::vector<std::string> out{args.front()};
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scramble, eavesdrop, rewind: information recovery experiments", "rewind"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Common common;

    HaarOpts haar;
    auto* h = app.add_subcommand("haar", "Haar or classical scrambler Monte Carlo");
    add_common(h, common);
    h->add_option("--d", haar.d, "Qudit dimension for builtin gates")->capture_default_str();
    h->add_option("--bath-dim", haar.bath_dim, "Bath dimension D_B")->capture_default_str();
    h->add_option("--gate", haar.gate, "identity | strong | weak:<eps> | file:<path>")->capture_default_str();
    h->add_option("--samples", haar.samples)->capture_default_str();
    h->add_option("--scrambler", haar.scrambler, "quantum | classical")->capture_default_str();

    RotorOpts rotor;
    auto* r = app.add_subcommand("rotor", "Qubit coupled to a kicked rotor");
    add_common(r, common);
    r->add_option("--hbar", rotor.hbars, "Comma separated list, 2^k accepted")->capture_default_str();
    r->add_option("--K", rotor.K)->capture_default_str();
    r->add_option("--J", rotor.J)->capture_default_str();
    r->add_option("--h", rotor.h)->capture_default_str();
    r->add_option("--kicks", rotor.kicks)->capture_default_str();
    r->add_option("--grid", rotor.grid, "Momentum grid size; 0 picks one from hbar and kicks")
        ->capture_default_str();
    r->add_option("--gate", rotor.gate)->capture_default_str();
    r->add_option("--edge-policy", rotor.edge_policy, "abort | record")->capture_default_str();
    r->add_option("--state", rotor.state, "random (one Bloch-random qubit) | bloch-average")
        ->capture_default_str();
    r->add_option("--persist", rotor.persist, "Points above threshold required for a crossover")
        ->capture_default_str();

    BoundOpts bound;
    auto* b = app.add_subcommand("bound", "Entangling-power bound experiments");
    add_common(b, common);
    b->add_option("--mode", bound.mode, "scan | saturate | ftilde")->capture_default_str();
    b->add_option("--d", bound.d)->capture_default_str();
    b->add_option("--count", bound.count, "Random gates for scan / ftilde")->capture_default_str();
    b->add_option("--eps-points", bound.eps_points)->capture_default_str();
    b->add_option("--restarts", bound.restarts)->capture_default_str();
    b->add_option("--tol", bound.tol)->capture_default_str();
    b->add_option("--gate", bound.gate, "ftilde on one gate instead of random ones");

    LmgOpts lmg;
    auto* l = app.add_subcommand("lmg", "Qubit coupled to an LMG collective spin");
    add_common(l, common);
    l->add_option("--S", lmg.spin)->capture_default_str();
    l->add_option("--J", lmg.J)->capture_default_str();
    l->add_option("--h", lmg.h)->capture_default_str();
    l->add_option("--bath-init", lmg.bath, "mixed | coherent[:x,y,z]")->capture_default_str();
    l->add_option("--mixed-method", lmg.method, "exact | basis-average")->capture_default_str();
    l->add_option("--times", lmg.times, "Histogram times")->capture_default_str();
    l->add_option("--samples", lmg.samples, "Bloch samples per histogram (0 skips)")->capture_default_str();
    l->add_option("--bins", lmg.bins)->capture_default_str();
    l->add_option("--t-max", lmg.t_max)->capture_default_str();
    l->add_option("--dt", lmg.dt)->capture_default_str();
    l->add_option("--qubits", lmg.qubits, "Trajectory initial states: up, down, plus, minus")
        ->capture_default_str();

    try {
        std::vector<std::string> argv = expand_config(args);
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (h->parsed()) return cmd_haar(haar, common, out);
        if (r->parsed()) return cmd_rotor(rotor, common, out);
        if (b->parsed()) return cmd_bound(bound, common, out);
        if (l->parsed()) return cmd_lmg(lmg, common, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace rewindlab::cli
