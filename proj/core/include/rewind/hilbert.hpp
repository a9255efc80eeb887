// Composite Hilbert spaces: layouts, pure and mixed states, factor-local
// operators, partial traces and entropies.
//
// Flat indices are row-major over the factors in layout order: for dims
// (d0, d1, d2) the amplitude of |i0 i1 i2> lives at (i0 * d1 + i1) * d2 + i2.
// Every module and every file format uses this convention.
#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rewindlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Thrown when factor roles or positions are inconsistent.
class LayoutError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when operand dimensions do not match.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a dense object would exceed the supported size.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest side of a dense density matrix we are willing to build.
inline constexpr std::size_t kMaxDensitySide = 1200;
/// Largest dense state vector.
inline constexpr std::size_t kMaxVectorSize = std::size_t{1} << 15;

enum class Role { qudit, ancilla, bath };

std::string to_string(Role role);

struct Factor {
    std::size_t dim = 1;
    Role role = Role::bath;

    friend bool operator==(const Factor&, const Factor&) = default;
};

/// Ordered tensor factors. qudit and ancilla may appear at most once; bath
/// may span several factors.
class SpaceLayout {
public:
    SpaceLayout() = default;
    SpaceLayout(std::initializer_list<Factor> factors);
    explicit SpaceLayout(std::vector<Factor> factors);

    static SpaceLayout single(std::size_t dim, Role role);

    std::size_t size() const noexcept { return factors_.size(); }
    std::size_t dim(std::size_t position) const { return factors_.at(position).dim; }
    Role role(std::size_t position) const { return factors_.at(position).role; }
    std::span<const Factor> factors() const noexcept { return factors_; }
    std::size_t total_dim() const noexcept { return total_; }

    /// First position carrying `role`, or size() when absent.
    std::size_t find(Role role) const noexcept;

    /// Factors of *this followed by those of `other`.
    SpaceLayout concat(const SpaceLayout& other) const;

    /// Sub-layout with the given positions, in the order listed.
    SpaceLayout select(std::span<const std::size_t> positions) const;

    /// Positions not listed in `positions`, ascending.
    std::vector<std::size_t> complement(std::span<const std::size_t> positions) const;

    friend bool operator==(const SpaceLayout& a, const SpaceLayout& b) {
        return a.factors_ == b.factors_;
    }

private:
    std::vector<Factor> factors_;
    std::size_t total_ = 1;
};

/// Flat offsets of every multi-index over `positions` (row-major in the order
/// listed), with all other factor indices held at zero.
std::vector<std::size_t> factor_offsets(const SpaceLayout& layout,
                                        std::span<const std::size_t> positions);

class MixedState;

/// Normalized state vector on a layout.
class PureState {
public:
    /// Normalizes `amplitudes`; throws DimensionError on size mismatch or a
    /// zero vector.
    PureState(SpaceLayout layout, Vector amplitudes);

    static PureState basis(SpaceLayout layout, std::size_t index);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    std::size_t dim() const noexcept { return layout_.total_dim(); }

    MixedState projector() const;

private:
    SpaceLayout layout_;
    Vector amplitudes_;
};

/// Density matrix on a layout. Construction only checks the shape; use
/// is_density() for the Hermitian / unit trace / positivity invariants.
class MixedState {
public:
    MixedState(SpaceLayout layout, Matrix matrix);

    static MixedState maximally_mixed(SpaceLayout layout);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    std::size_t dim() const noexcept { return layout_.total_dim(); }

    cplx trace() const { return matrix_.trace(); }
    double hermiticity_residual() const;
    bool is_density(double tol = 1e-10) const;

private:
    SpaceLayout layout_;
    Matrix matrix_;
};

/// Operator acting on a subset of factors. The matrix is indexed row-major
/// over the target factors in the order they are listed.
class FactorOperator {
public:
    FactorOperator(std::vector<std::size_t> targets, Matrix matrix, bool unitary = false);

    const std::vector<std::size_t>& targets() const noexcept { return targets_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    bool is_unitary() const noexcept { return unitary_; }

    FactorOperator adjoint() const;

private:
    std::vector<std::size_t> targets_;
    Matrix matrix_;
    bool unitary_ = false;
};

PureState tensor(std::span<const PureState> states);
PureState tensor(const PureState& a, const PureState& b);

/// Applies op to the targets and the identity elsewhere. The result is
/// renormalized, so non-unitary operators act as (unnormalized) projections.
PureState apply(const FactorOperator& op, const PureState& state);
/// O rho O^dagger.
MixedState apply(const FactorOperator& op, const MixedState& state);

/// In-place kernel behind apply(): v <- (op on targets) v. `dims` are the
/// factor dimensions of v.
void apply_in_place(const Matrix& op, std::span<const std::size_t> dims,
                    std::span<const std::size_t> targets, Eigen::Ref<Vector> v);

/// Reduced state on `keep` (in the order listed).
MixedState partial_trace(const PureState& state, std::span<const std::size_t> keep);
MixedState partial_trace(const MixedState& state, std::span<const std::size_t> keep);

/// Eigenvalues of (rho + rho^dagger)/2, ascending.
RealVector density_eigenvalues(const Matrix& rho);

/// -sum lambda ln lambda over eigenvalues above 1e-14, in nats. Throws
/// DimensionError when rho is not Hermitian within 1e-10.
double entropy_vn(const MixedState& rho);
double entropy_from_probabilities(std::span<const double> p);

/// Tr[rho^n] for integer n >= 1.
double renyi_purity(const MixedState& rho, int n);

/// Schmidt coefficients across the cut (`part` | rest), descending.
std::vector<double> schmidt_values(const PureState& state,
                                   std::span<const std::size_t> part);

/// Re Tr[rho sigma].
double overlap(const MixedState& rho, const MixedState& sigma);

Matrix kron(const Matrix& a, const Matrix& b);
double unitarity_residual(const Matrix& u);
bool is_unitary(const Matrix& u, double tol = 1e-10);

}  // namespace rewindlab
