// One PASS/FAIL line per acceptance criterion; exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rewind/bound.hpp"
#include "rewind/lmg.hpp"
#include "rewind/random.hpp"
#include "rewind/recovery.hpp"
#include "rewind/rotor.hpp"
#include "rewind/stats.hpp"
#include "rewind_cli/cli.hpp"

using namespace rewindlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.ok = false;
        o.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.ok) ++failures;
    std::printf("%s %2d %s:%s (%.1f s)\n", o.ok ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str(), secs);
    std::fflush(stdout);
}

double mean_r(const std::vector<RotorPoint>& c, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    int n = 0;
    for (const auto& p : c)
        if (p.t >= lo && p.t <= hi) {
            s += p.r;
            ++n;
        }
    return s / n;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

int main() {
    const SeededSource root(1, 0);

    criterion(1, "Haar quantum plateau", [&](Outcome& o) {
        const auto mc = haar_recovery_mc(128, strong_measurement(2), 100, root.substream(1));
        o.detail << " mean r " << mc.ratio.mean << " +- " << mc.ratio.stderr_;
        o.require(mc.ratio.mean >= 0.47 && mc.ratio.mean <= 0.53, "mean r in [0.47, 0.53]");
    });

    criterion(2, "classical scrambler plateau", [&](Outcome& o) {
        const auto mc = classical_recovery_mc(strong_measurement(2), 10000, root.substream(2));
        o.detail << " mean r " << mc.ratio.mean << " +- " << mc.ratio.stderr_;
        o.require(mc.ratio.mean >= 0.32 && mc.ratio.mean <= 0.35, "mean r in [0.32, 0.35]");
    });

    criterion(3, "d = 3 scaling", [&](Outcome& o) {
        const auto q = haar_recovery_mc(128, strong_measurement(3), 100, root.substream(3));
        const auto c = classical_recovery_mc(strong_measurement(3), 10000, root.substream(4));
        o.detail << " Haar " << q.ratio.mean << ", classical " << c.ratio.mean;
        o.require(std::abs(q.ratio.mean - 1.0 / 3.0) <= 0.04, "Haar within 0.04 of 1/3");
        o.require(std::abs(c.ratio.mean - 0.25) <= 0.02, "classical within 0.02 of 1/4");
    });

    criterion(4, "weak measurement formula", [&](Outcome& o) {
        std::uint64_t k = 10;
        for (double eps : {0.25, 0.5, 0.75}) {
            const auto gate = weak_measurement(2, eps);
            const double exact = (1.0 - eps) + eps / 2.0;
            const double rq = predicted_ratios(gate).quantum;
            const auto mc = haar_recovery_mc(64, gate, 200, root.substream(k++));
            const double dev = std::abs(mc.ratio.mean - rq);
            o.detail << " eps " << eps << ": r_q " << rq << ", MC " << mc.ratio.mean << ";";
            o.require(std::abs(rq - exact) < 1e-10, "r_q formula at eps " + std::to_string(eps));
            o.require(dev <= 3.0 * mc.ratio.stderr_ + 0.016, "MC at eps " + std::to_string(eps));
        }
    });

    criterion(5, "OTOC identity", [&](Outcome& o) {
        SeededSource src = root.substream(20);
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            const auto g = random_gate(2, 2, src);
            const Matrix u = haar_unitary(16, src);
            const PureState psi = haar_state(2, src);
            const PureState chi = haar_state(8, src, Role::bath);
            worst = std::max(worst, std::abs(run_protocol(psi, chi, u, g).overlap - otoc_overlap(psi, chi, u, g)));
        }
        o.detail << " max difference " << worst;
        o.require(worst < 1e-10, "agreement within 1e-10");
    });

    criterion(6, "Haar fourth moment", [&](Outcome& o) {
        const std::vector<MomentIndices> patterns{
            {0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 1, 0, 1}, {0, 0, 0, 0, 1, 0, 1, 0},
            {0, 0, 1, 1, 1, 1, 0, 0}, {0, 0, 0, 1, 1, 1, 1, 0}, {0, 1, 0, 1, 1, 0, 1, 0}, {0, 0, 1, 0, 1, 1, 0, 1},
            {1, 0, 1, 0, 0, 1, 0, 1}, {0, 1, 1, 0, 1, 0, 0, 1}};
        SeededSource src = root.substream(30);
        double worst = 0.0;
        for (std::size_t D : {2, 3, 4}) {
            for (const auto& idx : patterns) {
                const auto chk = verify_fourth_moment(D, idx, 100000, src);
                worst = std::max(worst, chk.sigmas());
            }
        }
        o.detail << " 30 checks, worst " << worst << " sigma";
        o.require(worst < 4.0, "all within 4 sigma");
    });

    criterion(7, "kicked rotor plateaus", [&](Outcome& o) {
        RotorConfig c;
        c.hbar = 1.0 / 256;
        c.K = 5.0;
        c.J = c.h = 1.0;
        c.grid = 4096;
        c.kicks = 80;
        c.edge_policy = EdgePolicy::record;
        SeededSource src(1, 0);
        const auto curve = rotor_recovery_curve(c, strong_measurement(2), bloch_state(src).amplitudes());
        const double early = mean_r(curve, 3, 8), late = mean_r(curve, 60, 80);
        double drift = 0.0;
        for (const auto& p : curve) drift = std::max(drift, p.norm_drift);
        o.detail << " early " << early << ", late " << late << ", drift " << drift;
        o.require(early >= 0.28 && early <= 0.38, "early mean in [0.28, 0.38]");
        o.require(late >= 0.42 && late <= 0.55, "late mean in [0.42, 0.55]");
        o.require(drift < 1e-9, "norm drift < 1e-9");
    });

    criterion(8, "Ehrenfest trend", [&](Outcome& o) {
        RotorConfig c;
        c.kicks = 24;
        const std::vector<double> hbars{1.0 / 64, 1.0 / 256, 1.0 / 1024};
        const auto scan = ehrenfest_scan(hbars, c, strong_measurement(2));
        std::vector<double> x, y;
        for (const auto& p : scan) {
            o.require(p.crossover.has_value(), "crossover found");
            if (!p.crossover) return;
            x.push_back(std::log(1.0 / p.hbar));
            y.push_back(static_cast<double>(*p.crossover));
            o.detail << " " << *p.crossover;
        }
        const auto fit = linear_fit(x, y);
        o.detail << "; slope " << fit.slope << ", R^2 " << fit.r_squared;
        o.require(y[0] < y[1] && y[1] < y[2], "strictly increasing");
        o.require(fit.slope > 0.0, "positive slope");
        o.require(fit.r_squared > 0.8, "R^2 > 0.8");
    });

    criterion(9, "bound sweep", [&](Outcome& o) {
        for (std::size_t d : {2, 3}) {
            const auto reps = bound_sweep(d, 1000, root.substream(40 + d));
            double min_margin = 1e300;
            bool chain = true;
            for (const auto& r : reps) {
                min_margin = std::min(min_margin, r.margin);
                chain = chain && r.r_q <= r.mean_delta + 1e-9;
                for (const auto& b : r.per_basis) chain = chain && b.delta <= b.s1 + 1e-9 && b.entropy <= b.g_delta + 1e-9;
            }
            o.detail << " d = " << d << ": min margin " << min_margin << ";";
            o.require(reps.size() == 1000, "1000 gates");
            o.require(min_margin >= -1e-9, "min margin >= -1e-9");
            o.require(chain, "proof chain at d = " + std::to_string(d));
        }
    });

    criterion(10, "saturation", [&](Outcome& o) {
        std::vector<double> eps;
        for (int k = 0; k <= 10; ++k) eps.push_back(k / 10.0);
        double worst = 0.0, resid = 0.0;
        for (std::size_t d : {2, 3}) {
            for (const auto& r : saturation_scan(d, eps)) {
                worst = std::max(worst, std::abs(r.e_bar - r.g_rq));
                resid = std::max(resid, r.rho_residual);
            }
        }
        o.detail << " max |E - g| " << worst << ", max rho residual " << resid;
        o.require(worst < 1e-9, "|E - g| < 1e-9");
        o.require(resid < 1e-10, "rho residual < 1e-10");
    });

    criterion(11, "f tilde", [&](Outcome& o) {
        const auto strong = f_tilde(strong_measurement(2), 20, 1e-14, root.substream(50));
        const double grid = f_tilde_grid_u2(strong_measurement(2), 60);
        o.detail << " strong " << strong.value << " (grid " << grid << ")";
        o.require(std::abs(strong.value - 2.0) < 1e-8 && std::abs(grid - 2.0) < 1e-8, "strong gives 2");
        o.require(strong.monotone, "monotone on strong");
        std::size_t below = 0, nonmono = 0;
        const SeededSource src = root.substream(51);
        for (std::size_t k = 0; k < 100; ++k) {
            SeededSource gs = src.substream(k);
            const auto gate = random_gate(2, 2, gs);
            const auto r = f_tilde(gate, 5, 1e-13, src.substream(1000 + k));
            below += r.value < f_functional(gate) - 1e-12;
            nonmono += !r.monotone;
        }
        o.detail << "; random gates: " << below << " below f, " << nonmono << " non-monotone";
        o.require(below == 0, "f tilde >= f");
        o.require(nonmono == 0, "monotone iteration");
    });

    criterion(12, "LMG supplement", [&](Outcome& o) {
        LmgConfig c;
        c.spin = 100;
        c.J = 2.4;
        c.h = 2.0;
        for (int t = 5; t <= 50; ++t) c.times.push_back(t);
        const Vector up = Vector::Unit(2, 0);
        const auto mixed = lmg_recovery_curve(c, strong_measurement(2), up);
        c.bath = LmgBathKind::coherent;
        c.theta = std::numbers::pi / 2;
        c.phi = 0.0;
        const auto coh = lmg_recovery_curve(c, strong_measurement(2), up);
        std::vector<double> early, rm, rc;
        for (const auto& p : mixed) {
            if (p.t <= 20.0) early.push_back(p.r);
            rm.push_back(p.r);
        }
        for (const auto& p : coh) rc.push_back(p.r);
        const double med = median(early), sm = stddev(rm), sc = stddev(rc);
        o.detail << " median " << med << ", stddev mixed " << sm << " coherent " << sc;
        o.require(med >= 0.26 && med <= 0.40, "median in [0.26, 0.40]");
        o.require(sc >= 2.0 * sm, "coherent stddev >= 2x mixed");
    });

    criterion(13, "reproducibility", [&](Outcome& o) {
        const fs::path base = fs::temp_directory_path() / "rewind_acceptance";
        fs::remove_all(base);
        const std::vector<std::vector<std::string>> runs{
            {"haar", "--bath-dim", "32", "--samples", "20"},
            {"rotor", "--hbar", "2^-6", "--kicks", "12"},
            {"bound", "--mode", "scan", "--count", "50"},
            {"lmg", "--S", "10", "--t-max", "10", "--samples", "20"}};
        std::size_t compared = 0;
        for (const auto& args : runs) {
            std::vector<fs::path> dirs;
            for (int rep = 0; rep < 2; ++rep) {
                dirs.push_back(base / (args[0] + std::to_string(rep)));
                auto a = args;
                a.insert(a.end(), {"--threads", "1", "--out", dirs.back().string()});
                std::ostringstream out, err;
                const int code = cli::run(a, out, err);
                o.require(code == 0, args[0] + " exit code " + std::to_string(code) + " " + err.str());
            }
            for (const auto& e : fs::directory_iterator(dirs[0])) {
                if (e.path().extension() != ".csv") continue;
                const fs::path twin = dirs[1] / e.path().filename();
                o.require(fs::exists(twin) && slurp(e.path()) == slurp(twin), e.path().filename().string());
                ++compared;
            }
        }
        o.detail << " " << compared << " CSV files byte identical across reruns";
        o.require(compared >= 4, "CSV files produced");
        fs::remove_all(base);
    });

    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
