// Qubit coupled to a quantum kicked rotor.
//
//   H(t) = p^2/2 + h S_z + sum_n delta(t - n) sin(q) (K + J S_x),  S = (hbar/2) sigma
//
// One Floquet period factorizes exactly into a kick, diagonal in position,
//   U_kick = exp(-i sin(q) [K/hbar + (J/2) sigma_x]),
// and a free part, diagonal in momentum p = hbar n,
//   U_free = exp(-i hbar n^2 / 2) exp(-i (h/2) sigma_z).
// The rotor lives on an N-point ring (quasimomentum zero); momentum and
// position representations are related by FFTW transforms.
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewind/eavesdrop.hpp"
#include "rewind/hilbert.hpp"
#include "rewind/random.hpp"

namespace rewindlab {

enum class KickOrder { kick_then_free, free_then_kick };
enum class EdgePolicy { abort, record };
enum class Direction { forward, backward };

/// Thrown when the population near the momentum-grid edge passes the
/// configured threshold under EdgePolicy::abort.
class EdgeLeakError : public std::runtime_error {
public:
    EdgeLeakError(std::size_t step, double leak, double threshold);
    std::size_t step() const noexcept { return step_; }
    double leak() const noexcept { return leak_; }

private:
    std::size_t step_;
    double leak_;
};

struct RotorConfig {
    double hbar = 1.0 / 256.0;
    double K = 5.0;
    double J = 1.0;
    double h = 1.0;
    std::size_t grid = 0;  ///< momentum grid size N; 0 selects default_grid()
    std::size_t kicks = 80;
    KickOrder order = KickOrder::kick_then_free;
    EdgePolicy edge_policy = EdgePolicy::abort;
    double edge_threshold = 1e-8;

    /// Power of two >= max(2^12, 2 (8 + 8 K sqrt(kicks/2)) / hbar): room for
    /// the initial Gaussian plus eight standard deviations of diffusive
    /// momentum growth.
    std::size_t default_grid() const;
    std::size_t resolved_grid() const { return grid != 0 ? grid : default_grid(); }
    /// Throws std::invalid_argument on hbar <= 0 or a grid that is not a
    /// power of two.
    void validate() const;

    nlohmann::json to_json() const;
    static RotorConfig from_json(const nlohmann::json& j);
};

/// Joint qubit (x) rotor state in momentum space. Component s in {0: up,
/// 1: down} of sigma_z; momentum slots are in FFT order, slot k holding
/// n = k for k < N/2 and n = k - N otherwise.
class SpinorWave {
public:
    explicit SpinorWave(std::size_t grid);

    std::size_t grid() const noexcept { return grid_; }
    std::span<cplx> component(std::size_t s);
    std::span<const cplx> component(std::size_t s) const;
    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }

    /// Integer momentum of slot k.
    long momentum_index(std::size_t k) const noexcept;

    double norm_squared() const;
    /// Population with |n| in the largest 2% of the grid.
    double edge_population() const;
    /// Qubit reduced density matrix (2 x 2).
    Matrix qubit_state() const;

    /// <this|other> summed over both components.
    cplx inner(const SpinorWave& other) const;

private:
    std::size_t grid_;
    std::vector<cplx> data_;
};

/// Normalized psi(p) proportional to exp(-p^2/4) on the grid, FFT order.
/// Throws std::invalid_argument when the normalized edge probability
/// |psi(p_edge)|^2 is not below 1e-12 (grid too small).
std::vector<cplx> initial_bath(const RotorConfig& config);

/// qubit (x) initial_bath(config).
SpinorWave product_state(const RotorConfig& config, const Vector& qubit);

/// Precomputed phases and FFTW plans for one configuration. step() is safe to
/// call concurrently on distinct waves.
class FloquetPropagator {
public:
    explicit FloquetPropagator(const RotorConfig& config);
    ~FloquetPropagator();
    FloquetPropagator(const FloquetPropagator&) = delete;
    FloquetPropagator& operator=(const FloquetPropagator&) = delete;

    const RotorConfig& config() const noexcept { return config_; }
    std::size_t grid() const noexcept { return grid_; }

    /// One period forward, or its exact inverse.
    void step(SpinorWave& wave, Direction dir) const;

    void free_part(SpinorWave& wave, Direction dir) const;
    void kick_part(SpinorWave& wave, Direction dir) const;

private:
    struct Plans;
    RotorConfig config_;
    std::size_t grid_;
    std::vector<cplx> free_phase_;   // exp(-i hbar n^2/2)
    std::vector<double> kick_angle_;  // (K/hbar) sin q_j
    std::vector<double> spin_angle_;  // (J/2) sin q_j
    std::unique_ptr<Plans> plans_;
};

/// One Floquet period with a throwaway propagator; checks the edge leak.
SpinorWave floquet_step(const SpinorWave& wave, const RotorConfig& config, Direction dir);

struct RotorPoint {
    std::size_t t = 0;
    double r = 0.0;
    double norm_drift = 0.0;     ///< |Tr rho_f - 1| after forward + backward
    double edge_leak = 0.0;      ///< largest edge population seen up to t
    double entropy_qubit = 0.0;  ///< qubit-rotor entropy of the forward state
};

/// r(t) for t = 1..kicks with one qubit state. V is applied through its
/// Kraus operators: every branch M_a U(t)|psi> is rewound independently and
/// rho_f = sum_a Tr_rotor of the branch projectors.
std::vector<RotorPoint> rotor_recovery_curve(const RotorConfig& config, const EavesdropGate& gate,
                                             const Vector& qubit);

/// r(t) averaged exactly over Bloch-uniform qubit states, using
/// E[rho (x) rho] = (I + SWAP) / (d (d + 1)).
std::vector<RotorPoint> rotor_recovery_curve_bloch_average(const RotorConfig& config,
                                                           const EavesdropGate& gate);

/// First t at which r exceeds `threshold` and stays above it for `persist`
/// consecutive points.
std::optional<std::size_t> crossover_time(std::span<const RotorPoint> curve, double threshold,
                                          std::size_t persist = 3);

struct EhrenfestPoint {
    double hbar = 0.0;
    std::optional<std::size_t> crossover;
    std::vector<RotorPoint> curve;
};

/// Bloch-averaged curves for each hbar (template config otherwise), with the
/// crossover at the midpoint (r_c + r_q)/2 of the gate's predicted plateaus.
/// Throws std::invalid_argument unless hbar values are descending powers of
/// two.
std::vector<EhrenfestPoint> ehrenfest_scan(std::span<const double> hbars,
                                           const RotorConfig& config_template,
                                           const EavesdropGate& gate);

void write_rotor_csv(std::ostream& os, std::span<const RotorPoint> curve);

}  // namespace rewindlab
