#include "rewind/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rewind/csv.hpp"

namespace rewindlab {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_x(double x, std::size_t d, const char* who) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(who) + ": x outside [0, 1]");
    if (d < 2) throw std::invalid_argument(std::string(who) + ": d must be >= 2");
}

std::string fmt(const char* what, double lhs, const char* op, double rhs) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": " << lhs << ' ' << op << ' ' << rhs;
    return os.str();
}

}  // namespace

double g(double x, std::size_t d) {
    check_x(x, d, "g");
    const double dd = static_cast<double>(d);
    if (x < 1.0 / dd) return std::log(dd);
    double out = 0.0;
    if (x > 0.0) out -= x * std::log(x);
    if (x < 1.0) out -= (1.0 - x) * std::log((1.0 - x) / (dd - 1.0));
    return out;
}

double g2(double x, std::size_t d, int n, RenyiLowBranch low) {
    check_x(x, d, "g2");
    if (n < 2) throw std::invalid_argument("g2: n must be an integer >= 2");
    const double dd = static_cast<double>(d);
    if (x < 1.0 / dd) {
        return low == RenyiLowBranch::printed ? 1.0 / dd : std::pow(dd, 1.0 - n);
    }
    return std::pow(x, n) + std::pow(1.0 - x, n) / std::pow(dd - 1.0, n - 1);
}

nlohmann::json BoundReport::to_json() const {
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& b : per_basis) {
        diag.push_back({{"delta", b.delta},
                        {"delta_element", b.delta_element},
                        {"s1", b.s1},
                        {"entropy", b.entropy},
                        {"purity", b.purity},
                        {"g_delta", b.g_delta}});
    }
    return {{"gate", gate_label},
            {"d", d},
            {"d_A", ancilla_dim},
            {"basis", basis_label},
            {"r_q", r_q},
            {"E_bar", e_bar},
            {"g_of_rq", g_rq},
            {"margin", margin},
            {"mean_delta", mean_delta},
            {"mean_g_delta", mean_g_delta},
            {"g_mean_delta", g_mean_delta},
            {"mean_purity", mean_purity},
            {"g2_printed", g2_printed},
            {"g2_power", g2_power},
            {"per_basis", diag},
            {"failures", failures}};
}

BoundReport check_bound(const EavesdropGate& gate, const Matrix& basis, std::string basis_label) {
    const std::size_t d = gate.d();
    if (basis.rows() != idx(d) || basis.cols() != idx(d)) {
        throw DimensionError("check_bound: basis must be d x d");
    }
    if ((basis.adjoint() * basis - Matrix::Identity(idx(d), idx(d))).cwiseAbs().maxCoeff() > 1e-10) {
        throw DimensionError("check_bound: basis columns are not orthonormal");
    }
    const KrausSet ks = kraus(gate);
    const double dd = static_cast<double>(d);

    BoundReport rep;
    rep.gate_label = gate.label();
    rep.d = d;
    rep.ancilla_dim = gate.ancilla_dim();
    rep.basis_label = std::move(basis_label);
    rep.r_q = f_functional(ks) / (dd * dd);
    rep.g_rq = g(std::clamp(rep.r_q, 0.0, 1.0), d);

    for (std::size_t i = 0; i < d; ++i) {
        const Vector b = basis.col(idx(i));
        BasisDiagnostic diag;
        Matrix rho = Matrix::Zero(idx(d), idx(d));
        for (const auto& m : ks.ops) {
            diag.delta += std::norm(b.dot(m * b));
            const Vector mb = m * b;
            rho += mb * mb.adjoint();
        }
        diag.delta_element = b.dot(rho * b).real();
        const RealVector ev = density_eigenvalues(rho);
        diag.s1 = ev.maxCoeff();
        std::vector<double> p(ev.data(), ev.data() + ev.size());
        diag.entropy = entropy_from_probabilities(p);
        diag.purity = ev.squaredNorm();
        diag.g_delta = g(std::clamp(diag.delta, 0.0, 1.0), d);

        if (std::abs(diag.delta - diag.delta_element) > kChainTol) {
            rep.failures.push_back(fmt("delta_i vs <i|rho_i|i>", diag.delta, "!=", diag.delta_element));
        }
        if (diag.delta > diag.s1 + kChainTol) {
            rep.failures.push_back(fmt("delta_i <= s_i1", diag.delta, ">", diag.s1));
        }
        if (diag.entropy > diag.g_delta + kMarginTol) {
            rep.failures.push_back(fmt("S[Vi] <= g(delta_i)", diag.entropy, ">", diag.g_delta));
        }
        rep.e_bar += diag.entropy / dd;
        rep.mean_delta += diag.delta / dd;
        rep.mean_g_delta += diag.g_delta / dd;
        rep.mean_purity += diag.purity / dd;
        rep.per_basis.push_back(diag);
    }
    rep.g_mean_delta = g(std::clamp(rep.mean_delta, 0.0, 1.0), d);
    rep.margin = rep.g_rq - rep.e_bar;
    rep.g2_printed = g2(std::clamp(rep.r_q, 0.0, 1.0), d, 2, RenyiLowBranch::printed);
    rep.g2_power = g2(std::clamp(rep.r_q, 0.0, 1.0), d, 2, RenyiLowBranch::power);

    if (rep.r_q > rep.mean_delta + kChainTol) {
        rep.failures.push_back(fmt("r_q <= E delta_i", rep.r_q, ">", rep.mean_delta));
    }
    if (rep.mean_g_delta > rep.g_mean_delta + kMarginTol) {
        rep.failures.push_back(fmt("E g(delta_i) <= g(E delta_i)", rep.mean_g_delta, ">", rep.g_mean_delta));
    }
    if (rep.g_mean_delta > rep.g_rq + kMarginTol) {
        rep.failures.push_back(fmt("g(E delta_i) <= g(r_q)", rep.g_mean_delta, ">", rep.g_rq));
    }
    if (rep.margin < -kMarginTol) {
        rep.failures.push_back(fmt("E_bar <= g(r_q)", rep.e_bar, ">", rep.g_rq));
    }
    if (rep.mean_purity < rep.g2_printed - kMarginTol) {
        rep.failures.push_back(fmt("E Tr rho_i^2 >= g2(r_q)", rep.mean_purity, "<", rep.g2_printed));
    }
    return rep;
}

std::vector<SaturationRow> saturation_scan(std::size_t d, std::span<const double> eps_grid) {
    const Matrix fourier = fourier_basis(d);
    const double dd = static_cast<double>(d);
    std::vector<SaturationRow> rows;
    for (double eps : eps_grid) {
        if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("saturation_scan: eps outside [0, 1]");
        const EavesdropGate gate = weak_measurement(d, eps);
        const BoundReport rep = check_bound(gate, fourier, "fourier");
        const KrausSet ks = kraus(gate);
        double resid = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const Vector b = fourier.col(idx(k));
            Matrix rho = Matrix::Zero(idx(d), idx(d));
            for (const auto& m : ks.ops) {
                const Vector mb = m * b;
                rho += mb * mb.adjoint();
            }
            const Matrix expected =
                (1.0 - eps) * b * b.adjoint() + (eps / dd) * Matrix::Identity(idx(d), idx(d));
            resid = std::max(resid, (rho - expected).cwiseAbs().maxCoeff());
        }
        rows.push_back({eps, rep.r_q, rep.e_bar, rep.g_rq, rep.margin, resid});
    }
    return rows;
}

double f_rotated(const KrausSet& k, const Matrix& v) {
    double f = 0.0;
    for (const auto& m : k.ops) f += std::norm((v * m).trace());
    return f;
}

FTildeResult f_tilde(const EavesdropGate& gate, std::size_t restarts, double tol,
                     const SeededSource& src, std::size_t max_iterations) {
    if (restarts < 1) throw std::invalid_argument("f_tilde: restarts must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("f_tilde: tol must be > 0");
    const KrausSet ks = kraus(gate);
    const auto d = idx(gate.d());

    FTildeResult best;
    best.value = -std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t r = 0; r < restarts; ++r) {
        SeededSource s = src.substream(r);
        Matrix v = haar_unitary(gate.d(), s);
        double f = f_rotated(ks, v);
        bool converged = false;
        std::size_t it = 0;
        while (it < max_iterations) {
            Matrix a = Matrix::Zero(d, d);
            for (const auto& m : ks.ops) a += std::conj((v * m).trace()) * m;
            Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
            // a = X S W^dagger; Re Tr(v a) is maximal at v = W X^dagger
            Matrix next = svd.matrixV() * svd.matrixU().adjoint();
            const double fn = f_rotated(ks, next);
            worst = std::min(worst, fn - f);
            ++it;
            v = std::move(next);
            const double step = fn - f;
            f = fn;
            if (std::abs(step) < tol) {
                converged = true;
                break;
            }
        }
        if (f > best.value) {
            best.value = f;
            best.v = v;
            best.converged = converged;
            best.iterations = it;
        }
    }
    best.worst_step = worst;
    best.monotone = worst >= -1e-12;
    return best;
}

double f_tilde_grid_u2(const EavesdropGate& gate, std::size_t steps) {
    if (gate.d() != 2) throw DimensionError("f_tilde_grid_u2: d must be 2");
    if (steps < 2) throw std::invalid_argument("f_tilde_grid_u2: steps must be >= 2");
    const KrausSet ks = kraus(gate);
    const double pi = std::numbers::pi;
    double best = 0.0;
    Matrix v(2, 2);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = 0.5 * pi * static_cast<double>(i) / static_cast<double>(steps - 1);
        const double c = std::cos(t), s = std::sin(t);
        for (std::size_t j = 0; j < steps; ++j) {
            const double a = 2.0 * pi * static_cast<double>(j) / static_cast<double>(steps);
            for (std::size_t k = 0; k < steps; ++k) {
                const double b = 2.0 * pi * static_cast<double>(k) / static_cast<double>(steps);
                v(0, 0) = std::polar(c, a);
                v(0, 1) = std::polar(s, b);
                v(1, 0) = -std::polar(s, -b);
                v(1, 1) = std::polar(c, -a);
                best = std::max(best, f_rotated(ks, v));
            }
        }
    }
    return best;
}

std::vector<BoundReport> bound_sweep(std::size_t d, std::size_t count, const SeededSource& src) {
    std::vector<BoundReport> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        SeededSource s = src.substream(k);
        const EavesdropGate gate = random_gate(d, d, s);
        const Matrix basis = haar_unitary(d, s);
        out.push_back(check_bound(gate, basis, "haar"));
    }
    return out;
}

void write_region_csv(std::ostream& os, std::span<const BoundReport> reports) {
    csv::write_header(os, {"r_q", "E_bar", "g_of_rq", "margin"});
    for (const auto& r : reports) csv::write_row(os, r.r_q, r.e_bar, r.g_rq, r.margin);
}

void write_saturation_csv(std::ostream& os, std::span<const SaturationRow> rows) {
    csv::write_header(os, {"eps", "r_q", "E_bar", "g_of_rq", "margin", "rho_residual"});
    for (const auto& r : rows) csv::write_row(os, r.eps, r.r_q, r.e_bar, r.g_rq, r.margin, r.rho_residual);
}

}  // namespace rewindlab
