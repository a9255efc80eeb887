// Qubit coupled to a Lipkin-Meshkov-Glick collective spin:
//
//   H = h X_q + J Z_q Z_c / S + X_c + 2 Z_c^2 / S
//
// X_c, Z_c are spin-S matrices (Z_c = diag(S, ..., -S)); X_q, Z_q are spin-1/2
// operators with eigenvalues +-1/2. Layout: qubit first, bath second.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "rewind/eavesdrop.hpp"
#include "rewind/hilbert.hpp"
#include "rewind/random.hpp"
#include "rewind/stats.hpp"

namespace rewindlab {

enum class LmgBathKind { maximally_mixed, coherent };
/// How the maximally mixed bath is evaluated: conjugating the full density
/// matrix, or averaging the 2S+1 basis-state pure runs.
enum class MixedBathMethod { exact_density, basis_average };

struct LmgConfig {
    int spin = 100;
    double J = 2.4;
    double h = 2.0;
    std::vector<double> times;
    LmgBathKind bath = LmgBathKind::maximally_mixed;
    double theta = 0.5 * 3.14159265358979323846;  ///< coherent-state polar angle
    double phi = 0.0;                             ///< coherent-state azimuth
    MixedBathMethod method = MixedBathMethod::exact_density;

    std::size_t bath_dim() const { return static_cast<std::size_t>(2 * spin + 1); }
    /// Throws CapacityError when 2(2S+1) exceeds the dense cap.
    void validate() const;

    nlohmann::json to_json() const;
};

struct SpinMatrices {
    Matrix x, y, z;
};

/// Spin-S operators in the |S, m> basis, m = S, S-1, ..., -S.
SpinMatrices spin_matrices(int spin);

/// Hermitian matrix of side 2(2S+1) acting on factors {0: qubit, 1: bath}.
FactorOperator build_hamiltonian(const LmgConfig& config);

/// Eigenstate of n . (X_c, Y_c, Z_c) with eigenvalue S, n = (sin t cos p, sin t sin p, cos t).
Vector spin_coherent_state(int spin, double theta, double phi);

/// exp(-i H t) from one eigendecomposition of H.
class LmgPropagator {
public:
    explicit LmgPropagator(const Matrix& hamiltonian);

    Matrix evolution(double t) const;
    const RealVector& energies() const noexcept { return energies_; }
    const Matrix& eigenvectors() const noexcept { return vectors_; }

private:
    RealVector energies_;
    Matrix vectors_;
};

/// The linear map rho_qubit -> rho_f of the whole protocol at a fixed t,
/// stored as outputs on |s><s'|.
class QubitChannel {
public:
    QubitChannel() = default;
    explicit QubitChannel(std::array<Matrix, 4> images) : images_(std::move(images)) {}

    Matrix operator()(const Matrix& rho) const;
    /// Tr[rho Phi(rho)] for rho = |psi><psi|.
    double overlap(const Vector& psi) const;
    double ratio(const Vector& psi) const;

private:
    std::array<Matrix, 4> images_;  // index 2 s + s'
};

struct TimePoint {
    double t = 0.0;
    double r = 0.0;
};

class LmgModel {
public:
    LmgModel(LmgConfig config, EavesdropGate gate);

    const LmgConfig& config() const noexcept { return config_; }
    const LmgPropagator& propagator() const noexcept { return propagator_; }
    const Matrix& hamiltonian() const noexcept { return hamiltonian_; }

    /// Protocol channel at time t for the configured bath.
    QubitChannel channel(double t) const;

    /// r(t) for one qubit state at config().times.
    std::vector<TimePoint> curve(const Vector& qubit) const;

private:
    Matrix bath_root() const;
    QubitChannel channel_exact(double t, const Matrix& root) const;
    QubitChannel channel_basis_average(double t) const;

    LmgConfig config_;
    EavesdropGate gate_;
    Matrix hamiltonian_;
    LmgPropagator propagator_;
};

/// Convenience wrapper around LmgModel::curve.
std::vector<TimePoint> lmg_recovery_curve(const LmgConfig& config, const EavesdropGate& gate,
                                          const Vector& qubit);

struct LmgHistogram {
    double t = 0.0;
    std::vector<double> ratios;  ///< one per Bloch sample, in draw order
    std::vector<HistogramBin> bins;
};

/// Per-time distributions of r over Bloch-uniform qubit states. Sample k
/// draws its state from src.substream(k), shared across times.
std::vector<LmgHistogram> lmg_histogram(const LmgConfig& config, const EavesdropGate& gate,
                                        std::span<const double> times, std::size_t samples,
                                        const SeededSource& src, std::size_t bins = 40);

/// Energy <psi(t)|H|psi(t)> along a pure trajectory.
std::vector<double> energy_trajectory(const LmgModel& model, const Vector& psi,
                                      std::span<const double> times);

void write_trajectory_csv(std::ostream& os, std::span<const TimePoint> curve);
void write_histogram_csv(std::ostream& os, std::span<const LmgHistogram> hists);

}  // namespace rewindlab
