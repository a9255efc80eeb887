// Entangling-power bound E_bar <= g(r_q), its proof-chain quantities, the
// weak-measurement saturation family and the f~ optimizer.
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewind/eavesdrop.hpp"
#include "rewind/hilbert.hpp"
#include "rewind/random.hpp"

namespace rewindlab {

/// g(x) = -x ln x - (1-x) ln((1-x)/(d-1)) for x >= 1/d, ln d below.
/// Throws std::invalid_argument for x outside [0, 1] or d < 2.
double g(double x, std::size_t d);

enum class RenyiLowBranch {
    printed,  ///< 1/d for every n
    power,    ///< d^(1-n), the minimum purity of order n
};

/// x^n + (1-x)^n / (d-1)^(n-1) for x >= 1/d. Throws for n < 2.
double g2(double x, std::size_t d, int n, RenyiLowBranch low = RenyiLowBranch::printed);

struct BasisDiagnostic {
    double delta = 0.0;           ///< sum_a |<b_i|M_a|b_i>|^2
    double delta_element = 0.0;   ///< <b_i|rho_i|b_i>
    double s1 = 0.0;              ///< largest eigenvalue of rho_i
    double entropy = 0.0;         ///< S[V|b_i,0>]
    double purity = 0.0;          ///< Tr rho_i^2
    double g_delta = 0.0;
};

struct BoundReport {
    std::string gate_label;
    std::size_t d = 0;
    std::size_t ancilla_dim = 0;
    std::string basis_label;
    double r_q = 0.0;
    double e_bar = 0.0;
    double g_rq = 0.0;
    double margin = 0.0;  ///< g(r_q) - E_bar
    std::vector<BasisDiagnostic> per_basis;

    double mean_delta = 0.0;
    double mean_g_delta = 0.0;
    double g_mean_delta = 0.0;
    double mean_purity = 0.0;
    double g2_printed = 0.0;  ///< g2(r_q, d, 2), printed low branch
    double g2_power = 0.0;    ///< g2(r_q, d, 2), d^(1-n) low branch

    /// Human-readable descriptions of every violated inequality.
    std::vector<std::string> failures;
    bool ok() const noexcept { return failures.empty(); }

    nlohmann::json to_json() const;
};

/// Tolerances used by check_bound.
inline constexpr double kMarginTol = 1e-9;
inline constexpr double kChainTol = 1e-10;

/// Evaluates every quantity of the proof for the orthonormal basis given by
/// the columns of `basis`. Violations go to report.failures.
BoundReport check_bound(const EavesdropGate& gate, const Matrix& basis,
                        std::string basis_label = "custom");

struct SaturationRow {
    double eps = 0.0;
    double r_q = 0.0;
    double e_bar = 0.0;  ///< Fourier basis
    double g_rq = 0.0;
    double margin = 0.0;
    double rho_residual = 0.0;  ///< max |rho_kX - ((1-eps)|k_X><k_X| + eps I/d)| over k
};

std::vector<SaturationRow> saturation_scan(std::size_t d, std::span<const double> eps_grid);

struct FTildeResult {
    double value = 0.0;
    Matrix v;
    bool converged = false;
    std::size_t iterations = 0;  ///< of the best restart
    double worst_step = 0.0;     ///< most negative f(v_{k+1}) - f(v_k) seen
    bool monotone = true;        ///< worst_step >= -1e-12
};

/// f[vV] = sum_a |Tr(v M_a)|^2.
double f_rotated(const KrausSet& k, const Matrix& v);

/// Local maximum of f[vV] over v in U(d) by the SVD fixed point
/// v <- W X^dagger with A = sum_a conj(Tr(v M_a)) M_a = X S W^dagger.
/// Restart k starts from haar_unitary(d, src.substream(k)).
FTildeResult f_tilde(const EavesdropGate& gate, std::size_t restarts, double tol,
                     const SeededSource& src, std::size_t max_iterations = 10000);

/// Brute-force max of f[vV] over an SU(2) grid
/// v = [[e^{ia} c, e^{ib} s], [-e^{-ib} s, e^{-ia} c]], c = cos t, s = sin t,
/// with `steps` points per angle. d = 2 only.
double f_tilde_grid_u2(const EavesdropGate& gate, std::size_t steps);

/// Bound reports for `count` Haar-random gates (ancilla dim d) in Haar-random
/// bases; gate k uses src.substream(k).
std::vector<BoundReport> bound_sweep(std::size_t d, std::size_t count, const SeededSource& src);

/// Columns r_q, E_bar, g_of_rq, margin.
void write_region_csv(std::ostream& os, std::span<const BoundReport> reports);
void write_saturation_csv(std::ostream& os, std::span<const SaturationRow> rows);

}  // namespace rewindlab
