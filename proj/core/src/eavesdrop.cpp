#include "rewind/eavesdrop.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rewindlab {

namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr double kGramFloor = 1e-12;
constexpr std::uint64_t kCompletionSeed = 0x72657769'6e64ULL;

double orthonormality_residual(const Matrix& cols) {
    return (cols.adjoint() * cols - Matrix::Identity(cols.cols(), cols.cols()))
        .cwiseAbs()
        .maxCoeff();
}

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

EavesdropGate::EavesdropGate(std::size_t d, std::size_t ancilla_dim, Matrix matrix,
                             std::string label)
    : d_(d), ancilla_dim_(ancilla_dim), matrix_(std::move(matrix)), label_(std::move(label)) {
    if (d_ < 1 || ancilla_dim_ < 1) {
        throw DimensionError("EavesdropGate: dimensions must be positive");
    }
    const auto side = idx(d_ * ancilla_dim_);
    if (matrix_.rows() != side || matrix_.cols() != side) {
        throw DimensionError("EavesdropGate: matrix side must be d * d_A = " +
                             std::to_string(side));
    }
    if (!is_unitary(matrix_, kUnitaryTol)) {
        throw DimensionError("EavesdropGate: matrix is not unitary (residual " +
                             std::to_string(unitarity_residual(matrix_)) + ")");
    }
}

Vector EavesdropGate::act_on_reference(const Vector& qudit) const {
    if (qudit.size() != idx(d_)) {
        throw DimensionError("EavesdropGate::act_on_reference: expected a d-dimensional vector");
    }
    Vector out = Vector::Zero(matrix_.rows());
    for (std::size_t j = 0; j < d_; ++j) {
        out += qudit(idx(j)) * matrix_.col(idx(j * ancilla_dim_));
    }
    return out;
}

FactorOperator EavesdropGate::as_operator(std::size_t qudit_pos, std::size_t ancilla_pos) const {
    return FactorOperator({qudit_pos, ancilla_pos}, matrix_, true);
}

double KrausSet::completeness_residual() const {
    Matrix acc = Matrix::Zero(idx(d), idx(d));
    for (const auto& m : ops) acc += m.adjoint() * m;
    return (acc - Matrix::Identity(idx(d), idx(d))).cwiseAbs().maxCoeff();
}

EavesdropGate identity_gate(std::size_t d, std::size_t ancilla_dim) {
    const auto n = idx(d * ancilla_dim);
    return EavesdropGate(d, ancilla_dim, Matrix::Identity(n, n), "identity");
}

EavesdropGate strong_measurement(std::size_t d) {
    if (d < 2) throw std::invalid_argument("strong_measurement: d must be >= 2");
    const auto n = idx(d * d);
    Matrix v = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            v(idx(i * d + (a + i) % d), idx(i * d + a)) = 1.0;
        }
    }
    return EavesdropGate(d, d, std::move(v), "strong");
}

EavesdropGate weak_measurement(std::size_t d, double eps) {
    SeededSource completion(kCompletionSeed, d);
    return weak_measurement(d, eps, completion);
}

EavesdropGate weak_measurement(std::size_t d, double eps, SeededSource& completion) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw std::invalid_argument("weak_measurement: eps must lie in [0, 1]");
    }
    if (d < 1) throw std::invalid_argument("weak_measurement: d must be >= 1");
    const auto n = idx(d);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Constant(n, n, 1.0 - eps);
    gram.diagonal().array() = 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    Eigen::VectorXd root = es.eigenvalues();
    for (Eigen::Index i = 0; i < root.size(); ++i) {
        root(i) = root(i) > kGramFloor ? std::sqrt(root(i)) : 0.0;
    }
    const Eigen::MatrixXd sqrt_gram =
        es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();

    Matrix iso = Matrix::Zero(n * n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index a = 0; a < n; ++a) {
            iso(j * n + a, j) = sqrt_gram(a, j);
        }
    }
    Matrix v = complete_to_unitary(iso, d, d, completion);
    return EavesdropGate(d, d, std::move(v), "weak:" + std::to_string(eps));
}

EavesdropGate local_gate(const Matrix& v, std::size_t ancilla_dim) {
    if (v.rows() != v.cols()) throw DimensionError("local_gate: matrix not square");
    const auto d = static_cast<std::size_t>(v.rows());
    return EavesdropGate(d, ancilla_dim,
                         kron(v, Matrix::Identity(idx(ancilla_dim), idx(ancilla_dim))), "local");
}

EavesdropGate random_gate(std::size_t d, std::size_t ancilla_dim, SeededSource& src) {
    return EavesdropGate(d, ancilla_dim, haar_unitary(d * ancilla_dim, src), "haar");
}

Matrix complete_to_unitary(const Matrix& isometry, std::size_t d, std::size_t ancilla_dim,
                           SeededSource& src) {
    const auto n = idx(d * ancilla_dim);
    if (isometry.rows() != n || isometry.cols() != idx(d)) {
        throw DimensionError("complete_to_unitary: expected a (d*d_A) x d matrix");
    }
    if (orthonormality_residual(isometry) > kUnitaryTol) {
        throw DimensionError("complete_to_unitary: columns are not orthonormal");
    }
    if (ancilla_dim == 1) return isometry;

    const auto k = idx(d);
    Matrix seed_cols(n, n);
    seed_cols.leftCols(k) = isometry;
    for (Eigen::Index j = k; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) seed_cols(i, j) = src.complex_normal();
    }
    Eigen::HouseholderQR<Matrix> qr(seed_cols);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);

    Matrix out(n, n);
    Eigen::Index extra = k;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t a = 0; a < ancilla_dim; ++a) {
            const auto col = idx(i * ancilla_dim + a);
            if (a == 0) {
                out.col(col) = isometry.col(idx(i));
            } else {
                out.col(col) = q.col(extra++);
            }
        }
    }
    return out;
}

KrausSet kraus(const EavesdropGate& gate) {
    const std::size_t d = gate.d();
    const std::size_t da = gate.ancilla_dim();
    KrausSet set{d, da, {}};
    set.ops.reserve(da);
    for (std::size_t a = 0; a < da; ++a) {
        Matrix m(idx(d), idx(d));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                m(idx(i), idx(j)) = gate.matrix()(idx(i * da + a), idx(j * da));
            }
        }
        set.ops.push_back(std::move(m));
    }
    return set;
}

double f_functional(const KrausSet& k) {
    double f = 0.0;
    for (const auto& m : k.ops) f += std::norm(m.trace());
    return f;
}

double f_functional(const EavesdropGate& gate) { return f_functional(kraus(gate)); }

double f_functional_in_basis(const EavesdropGate& gate, const Matrix& qudit_basis,
                             const Matrix& ancilla_basis) {
    const std::size_t d = gate.d();
    const std::size_t da = gate.ancilla_dim();
    if (qudit_basis.rows() != idx(d) || qudit_basis.cols() != idx(d) ||
        ancilla_basis.rows() != idx(da) || ancilla_basis.cols() != idx(da)) {
        throw DimensionError("f_functional_in_basis: basis shape mismatch");
    }
    // t_a = sum_i <b_i, c_a| V |b_i, 0>
    double f = 0.0;
    for (std::size_t a = 0; a < da; ++a) {
        cplx t = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const Vector out = gate.act_on_reference(qudit_basis.col(idx(i)));
            const Vector bra = kron(qudit_basis.col(idx(i)), ancilla_basis.col(idx(a)));
            t += bra.dot(out);
        }
        f += std::norm(t);
    }
    return f;
}

Matrix computational_basis(std::size_t d) { return Matrix::Identity(idx(d), idx(d)); }

Matrix fourier_basis(std::size_t d) {
    Matrix b(idx(d), idx(d));
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((i * k) % d) /
                                 static_cast<double>(d);
            b(idx(i), idx(k)) = std::polar(norm, angle);
        }
    }
    return b;
}

std::vector<double> output_entropies(const EavesdropGate& gate, const Matrix& basis) {
    const SpaceLayout layout{{gate.d(), Role::qudit}, {gate.ancilla_dim(), Role::ancilla}};
    const std::size_t qudit_only[] = {0};
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(basis.cols()));
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        if (gate.ancilla_dim() == 1) {
            out.push_back(0.0);
            continue;
        }
        const PureState state(layout, gate.act_on_reference(basis.col(k)));
        auto s = schmidt_values(state, qudit_only);
        for (double& x : s) x *= x;
        out.push_back(entropy_from_probabilities(s));
    }
    return out;
}

double entangling_power(const EavesdropGate& gate, const Matrix& basis) {
    if (basis.rows() != idx(gate.d()) || basis.cols() != idx(gate.d())) {
        throw DimensionError("entangling_power: basis must be d x d");
    }
    if (orthonormality_residual(basis) > kUnitaryTol) {
        throw DimensionError("entangling_power: basis is not orthonormal");
    }
    const auto s = output_entropies(gate, basis);
    double acc = 0.0;
    for (double x : s) acc += x;
    return acc / static_cast<double>(gate.d());
}

McEstimate entangling_power_sphere(const EavesdropGate& gate, std::size_t samples,
                                   SeededSource& src) {
    if (samples < 1) throw std::invalid_argument("entangling_power_sphere: samples >= 1");
    RunningStats stats;
    for (std::size_t s = 0; s < samples; ++s) {
        const PureState psi = haar_state(gate.d(), src);
        Matrix col = psi.amplitudes();
        stats.add(output_entropies(gate, col).front());
    }
    return stats.estimate();
}

nlohmann::json to_json(const EavesdropGate& gate) {
    nlohmann::json entries = nlohmann::json::array();
    const Matrix& m = gate.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            entries.push_back({m(i, j).real(), m(i, j).imag()});
        }
    }
    return {{"d", gate.d()}, {"d_A", gate.ancilla_dim()}, {"label", gate.label()},
            {"layout", "qudit-major"}, {"matrix", std::move(entries)}};
}

EavesdropGate gate_from_json(const nlohmann::json& j) {
    const auto d = j.at("d").get<std::size_t>();
    const auto da = j.at("d_A").get<std::size_t>();
    const auto& entries = j.at("matrix");
    const std::size_t n = d * da;
    if (!entries.is_array() || entries.size() != n * n) {
        throw DimensionError("gate_from_json: matrix must hold (d*d_A)^2 [re, im] pairs");
    }
    Matrix m(idx(n), idx(n));
    for (std::size_t k = 0; k < n * n; ++k) {
        const auto& e = entries[k];
        if (!e.is_array() || e.size() != 2) {
            throw DimensionError("gate_from_json: entries must be [re, im] pairs");
        }
        m(idx(k / n), idx(k % n)) = cplx(e[0].get<double>(), e[1].get<double>());
    }
    return EavesdropGate(d, da, std::move(m), j.value("label", std::string("file")));
}

}  // namespace rewindlab
