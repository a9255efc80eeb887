// The intruder's gate V on qudit (x) ancilla, its Kraus operators with
// respect to the ancilla reference state |0>, the fidelity functional
// f = sum_a |Tr M_a|^2, and entangling power.
//
// Matrix convention: row/column index i * d_A + a for |i>_qudit |a>_ancilla
// (qudit-major). The ancilla reference state is index 0.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rewind/hilbert.hpp"
#include "rewind/random.hpp"
#include "rewind/stats.hpp"

namespace rewindlab {

class EavesdropGate {
public:
    /// Throws DimensionError unless `matrix` is a unitary of side d * d_A.
    EavesdropGate(std::size_t d, std::size_t ancilla_dim, Matrix matrix,
                  std::string label = "custom");

    std::size_t d() const noexcept { return d_; }
    std::size_t ancilla_dim() const noexcept { return ancilla_dim_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    const std::string& label() const noexcept { return label_; }

    /// V (|psi> (x) |0>), length d * d_A.
    Vector act_on_reference(const Vector& qudit) const;

    /// The gate as an operator on (qudit_pos, ancilla_pos) of a larger layout.
    FactorOperator as_operator(std::size_t qudit_pos, std::size_t ancilla_pos) const;

private:
    std::size_t d_;
    std::size_t ancilla_dim_;
    Matrix matrix_;
    std::string label_;
};

struct KrausSet {
    std::size_t d = 0;
    std::size_t ancilla_dim = 0;
    std::vector<Matrix> ops;  ///< (M_a)_{ij} = <i,a|V|j,0>

    /// max |sum_a M_a^dagger M_a - I|
    double completeness_residual() const;
};

EavesdropGate identity_gate(std::size_t d, std::size_t ancilla_dim);

/// V|i>|0> = |i>|i>, completed as the controlled shift |i>|a> -> |i>|a+i mod d>.
EavesdropGate strong_measurement(std::size_t d);

/// V|i>|0> = |i>|a_i> with <a_i|a_j> = (1 - eps) + eps delta_ij, the a_i being
/// columns of the principal square root of that Gram matrix.
EavesdropGate weak_measurement(std::size_t d, double eps);
EavesdropGate weak_measurement(std::size_t d, double eps, SeededSource& completion);

/// v (x) I_A.
EavesdropGate local_gate(const Matrix& v, std::size_t ancilla_dim);

/// Haar-random unitary on the full qudit (x) ancilla space.
EavesdropGate random_gate(std::size_t d, std::size_t ancilla_dim, SeededSource& src);

/// Extends the (d*d_A) x d isometry whose column j is V|j,0> to a unitary that
/// sends |j,0> to exactly that column. Throws DimensionError if the columns
/// are not orthonormal within 1e-10.
Matrix complete_to_unitary(const Matrix& isometry, std::size_t d, std::size_t ancilla_dim,
                           SeededSource& src);

KrausSet kraus(const EavesdropGate& gate);

double f_functional(const KrausSet& k);
double f_functional(const EavesdropGate& gate);

/// Eq.-4 double sum sum_{i,j,a} <j,0|V^dag|j,a><i,a|V|i,0> evaluated in the
/// qudit basis given by the columns of `qudit_basis` and the ancilla basis
/// given by the columns of `ancilla_basis`.
double f_functional_in_basis(const EavesdropGate& gate, const Matrix& qudit_basis,
                             const Matrix& ancilla_basis);

Matrix computational_basis(std::size_t d);
/// Columns |k_X> = d^{-1/2} sum_i e^{2 pi i ik/d} |i>.
Matrix fourier_basis(std::size_t d);

/// S[V|b_k,0>] for each basis column b_k (qudit-ancilla entropy, nats).
std::vector<double> output_entropies(const EavesdropGate& gate, const Matrix& basis);

/// (1/d) sum_k S[V|b_k,0>]. Throws DimensionError unless `basis` is d x d
/// with orthonormal columns within 1e-10.
double entangling_power(const EavesdropGate& gate, const Matrix& basis);

/// Monte Carlo average of S[V|psi,0>] over Haar psi.
McEstimate entangling_power_sphere(const EavesdropGate& gate, std::size_t samples,
                                   SeededSource& src);

/// {d, d_A, matrix: [[re, im], ...] row-major}
nlohmann::json to_json(const EavesdropGate& gate);
EavesdropGate gate_from_json(const nlohmann::json& j);

}  // namespace rewindlab
