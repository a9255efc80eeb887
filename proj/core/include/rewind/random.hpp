// Seeded randomness: Haar unitaries and states, Bloch-sphere qubits, and a
// Monte Carlo check of the Haar fourth-moment (Weingarten) formula.
#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "rewind/hilbert.hpp"
#include "rewind/stats.hpp"

namespace rewindlab {

/// Reproducible random stream. (seed, stream) fully determine the sequence.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq from the four
/// 32-bit halves of seed and stream; both are specified bit-exactly by the
/// standard. Floating-point draws are derived here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class SeededSource {
public:
    SeededSource(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard complex Gaussian, E|z|^2 = 1 (Box-Muller).
    cplx complex_normal();

    /// Independent source for sub-task k, deterministic in (seed, stream, k).
    SeededSource substream(std::uint64_t k) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

/// Haar-distributed n x n unitary: Ginibre matrix, QR, and the columns
/// rescaled by the phases of R's diagonal.
Matrix haar_unitary(std::size_t n, SeededSource& src);

/// Haar random unit vector, laid out as a single factor with `role`.
PureState haar_state(std::size_t n, SeededSource& src, Role role = Role::qudit);

/// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
PureState bloch_state(double theta, double phi);
/// Uniform on the Bloch sphere: cos(theta) ~ U[-1,1], phi ~ U[0, 2 pi).
PureState bloch_state(SeededSource& src);

/// Indices of E[U_{i1 j1} U*_{k1 l1} U_{i2 j2} U*_{k2 l2}].
struct MomentIndices {
    std::size_t i1, j1, k1, l1, i2, j2, k2, l2;
};

/// Closed-form Haar fourth moment over U(D).
double haar_fourth_moment(std::size_t D, const MomentIndices& idx);

struct FourthMomentCheck {
    cplx mean;           ///< Monte Carlo mean of the monomial
    double formula;      ///< closed form
    double stderr_;      ///< RMS standard error of the complex mean
    std::size_t samples;

    /// |mean - formula| in units of the standard error.
    double sigmas() const;
};

FourthMomentCheck verify_fourth_moment(std::size_t D, const MomentIndices& idx,
                                       std::size_t samples, SeededSource& src);

}  // namespace rewindlab
