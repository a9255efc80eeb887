#include "rewind/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rewindlab {

namespace {

constexpr double kEntropyCutoff = 1e-14;
constexpr double kHermitianTol = 1e-10;

void check_positions(const SpaceLayout& layout, std::span<const std::size_t> positions,
                     const char* what) {
    std::vector<bool> seen(layout.size(), false);
    for (auto p : positions) {
        if (p >= layout.size()) {
            throw LayoutError(std::string(what) + ": factor position " + std::to_string(p) +
                              " out of range");
        }
        if (seen[p]) {
            throw LayoutError(std::string(what) + ": factor position " + std::to_string(p) +
                              " listed twice");
        }
        seen[p] = true;
    }
}

std::vector<std::size_t> strides_of(std::span<const std::size_t> dims) {
    std::vector<std::size_t> strides(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) {
        strides[k - 1] = strides[k] * dims[k];
    }
    return strides;
}

std::vector<std::size_t> offsets_of(std::span<const std::size_t> dims,
                                    std::span<const std::size_t> positions) {
    const auto strides = strides_of(dims);
    std::vector<std::size_t> offsets{0};
    for (auto p : positions) {
        std::vector<std::size_t> next;
        next.reserve(offsets.size() * dims[p]);
        for (auto base : offsets) {
            for (std::size_t i = 0; i < dims[p]; ++i) {
                next.push_back(base + i * strides[p]);
            }
        }
        offsets = std::move(next);
    }
    return offsets;
}

std::vector<std::size_t> dims_of(const SpaceLayout& layout) {
    std::vector<std::size_t> dims;
    dims.reserve(layout.size());
    for (const auto& f : layout.factors()) {
        dims.push_back(f.dim);
    }
    return dims;
}

void check_keep(const SpaceLayout& layout, std::span<const std::size_t> keep) {
    if (keep.empty()) {
        throw LayoutError("partial_trace: keep set is empty");
    }
    check_positions(layout, keep, "partial_trace");
}

}  // namespace

std::string to_string(Role role) {
    switch (role) {
    case Role::qudit:
        return "qudit";
    case Role::ancilla:
        return "ancilla";
    case Role::bath:
        return "bath";
    }
    return "unknown";
}

SpaceLayout::SpaceLayout(std::initializer_list<Factor> factors)
    : SpaceLayout(std::vector<Factor>(factors)) {}

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    bool qudit = false;
    bool ancilla = false;
    for (const auto& f : factors_) {
        if (f.dim == 0) {
            throw LayoutError("SpaceLayout: factor dimension must be positive");
        }
        if (f.role == Role::qudit) {
            if (qudit) throw LayoutError("SpaceLayout: duplicate qudit factor");
            qudit = true;
        } else if (f.role == Role::ancilla) {
            if (ancilla) throw LayoutError("SpaceLayout: duplicate ancilla factor");
            ancilla = true;
        }
        total_ *= f.dim;
    }
}

SpaceLayout SpaceLayout::single(std::size_t dim, Role role) {
    return SpaceLayout{Factor{dim, role}};
}

std::size_t SpaceLayout::find(Role role) const noexcept {
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        if (factors_[k].role == role) return k;
    }
    return factors_.size();
}

SpaceLayout SpaceLayout::concat(const SpaceLayout& other) const {
    std::vector<Factor> all = factors_;
    all.insert(all.end(), other.factors_.begin(), other.factors_.end());
    return SpaceLayout(std::move(all));
}

SpaceLayout SpaceLayout::select(std::span<const std::size_t> positions) const {
    check_positions(*this, positions, "SpaceLayout::select");
    std::vector<Factor> picked;
    picked.reserve(positions.size());
    for (auto p : positions) picked.push_back(factors_[p]);
    return SpaceLayout(std::move(picked));
}

std::vector<std::size_t> SpaceLayout::complement(std::span<const std::size_t> positions) const {
    std::vector<bool> used(factors_.size(), false);
    for (auto p : positions) {
        if (p < used.size()) used[p] = true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        if (!used[k]) rest.push_back(k);
    }
    return rest;
}

std::vector<std::size_t> factor_offsets(const SpaceLayout& layout,
                                        std::span<const std::size_t> positions) {
    check_positions(layout, positions, "factor_offsets");
    const auto dims = dims_of(layout);
    return offsets_of(dims, positions);
}

// ---------------------------------------------------------------------------

PureState::PureState(SpaceLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != layout_.total_dim()) {
        throw DimensionError("PureState: amplitude count " + std::to_string(amplitudes_.size()) +
                             " does not match layout dimension " +
                             std::to_string(layout_.total_dim()));
    }
    if (layout_.total_dim() > kMaxVectorSize) {
        throw CapacityError("PureState: dimension above dense vector cap");
    }
    const double norm = amplitudes_.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DimensionError("PureState: amplitudes have zero or non-finite norm");
    }
    amplitudes_ /= norm;
}

PureState PureState::basis(SpaceLayout layout, std::size_t index) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    if (index >= layout.total_dim()) {
        throw DimensionError("PureState::basis: index out of range");
    }
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(std::move(layout), std::move(v));
}

MixedState PureState::projector() const {
    return MixedState(layout_, amplitudes_ * amplitudes_.adjoint());
}

MixedState::MixedState(SpaceLayout layout, Matrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto side = static_cast<Eigen::Index>(layout_.total_dim());
    if (matrix_.rows() != side || matrix_.cols() != side) {
        throw DimensionError("MixedState: matrix side does not match layout dimension");
    }
}

MixedState MixedState::maximally_mixed(SpaceLayout layout) {
    const auto side = static_cast<Eigen::Index>(layout.total_dim());
    if (layout.total_dim() > kMaxDensitySide) {
        throw CapacityError("MixedState: dimension above dense density-matrix cap");
    }
    Matrix m = Matrix::Identity(side, side) / static_cast<double>(side);
    return MixedState(std::move(layout), std::move(m));
}

double MixedState::hermiticity_residual() const {
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

bool MixedState::is_density(double tol) const {
    if (hermiticity_residual() > tol) return false;
    if (std::abs(trace() - cplx(1.0, 0.0)) > tol) return false;
    const RealVector ev = density_eigenvalues(matrix_);
    return ev.minCoeff() >= -tol;
}

FactorOperator::FactorOperator(std::vector<std::size_t> targets, Matrix matrix, bool unitary)
    : targets_(std::move(targets)), matrix_(std::move(matrix)), unitary_(unitary) {
    if (targets_.empty()) {
        throw LayoutError("FactorOperator: no target factors");
    }
    if (matrix_.rows() != matrix_.cols()) {
        throw DimensionError("FactorOperator: matrix is not square");
    }
    if (unitary_ && !rewindlab::is_unitary(matrix_, 1e-10)) {
        throw DimensionError("FactorOperator: matrix flagged unitary but O^dagger O != I");
    }
}

FactorOperator FactorOperator::adjoint() const {
    return FactorOperator(targets_, matrix_.adjoint(), unitary_);
}

// ---------------------------------------------------------------------------

PureState tensor(std::span<const PureState> states) {
    if (states.empty()) {
        throw LayoutError("tensor: no states given");
    }
    SpaceLayout layout = states.front().layout();
    Vector amps = states.front().amplitudes();
    for (std::size_t k = 1; k < states.size(); ++k) {
        layout = layout.concat(states[k].layout());
        const Vector& b = states[k].amplitudes();
        Vector next(amps.size() * b.size());
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            next.segment(i * b.size(), b.size()) = amps(i) * b;
        }
        amps = std::move(next);
    }
    return PureState(std::move(layout), std::move(amps));
}

PureState tensor(const PureState& a, const PureState& b) {
    const PureState both[] = {a, b};
    return tensor(std::span<const PureState>(both));
}

void apply_in_place(const Matrix& op, std::span<const std::size_t> dims,
                    std::span<const std::size_t> targets, Eigen::Ref<Vector> v) {
    std::size_t target_dim = 1;
    std::vector<bool> seen(dims.size(), false);
    for (auto t : targets) {
        if (t >= dims.size() || seen[t]) {
            throw LayoutError("apply: invalid or repeated target factor");
        }
        seen[t] = true;
        target_dim *= dims[t];
    }
    if (static_cast<std::size_t>(op.rows()) != target_dim ||
        static_cast<std::size_t>(op.cols()) != target_dim) {
        throw DimensionError("apply: operator side " + std::to_string(op.rows()) +
                             " does not match target dimension " + std::to_string(target_dim));
    }
    const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                              std::multiplies<>());
    if (static_cast<std::size_t>(v.size()) != total) {
        throw DimensionError("apply: vector size does not match factor dimensions");
    }

    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (!seen[k]) rest.push_back(k);
    }
    const auto t_off = offsets_of(dims, targets);
    const auto r_off = offsets_of(dims, rest);

    Vector x(static_cast<Eigen::Index>(target_dim));
    Vector y(static_cast<Eigen::Index>(target_dim));
    for (auto base : r_off) {
        for (std::size_t c = 0; c < target_dim; ++c) {
            x(static_cast<Eigen::Index>(c)) = v(static_cast<Eigen::Index>(base + t_off[c]));
        }
        y.noalias() = op * x;
        for (std::size_t c = 0; c < target_dim; ++c) {
            v(static_cast<Eigen::Index>(base + t_off[c])) = y(static_cast<Eigen::Index>(c));
        }
    }
}

PureState apply(const FactorOperator& op, const PureState& state) {
    check_positions(state.layout(), op.targets(), "apply");
    const auto dims = dims_of(state.layout());
    Vector v = state.amplitudes();
    apply_in_place(op.matrix(), dims, op.targets(), v);
    return PureState(state.layout(), std::move(v));
}

MixedState apply(const FactorOperator& op, const MixedState& state) {
    check_positions(state.layout(), op.targets(), "apply");
    const auto dims = dims_of(state.layout());
    // O rho, then O (O rho)^dagger = O rho^dagger O^dagger, then adjoint.
    Matrix a = state.matrix();
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        apply_in_place(op.matrix(), dims, op.targets(), a.col(c));
    }
    Matrix b = a.adjoint();
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        apply_in_place(op.matrix(), dims, op.targets(), b.col(c));
    }
    return MixedState(state.layout(), b.adjoint());
}

MixedState partial_trace(const PureState& state, std::span<const std::size_t> keep) {
    check_keep(state.layout(), keep);
    const auto dims = dims_of(state.layout());
    const auto rest = state.layout().complement(keep);
    const auto k_off = offsets_of(dims, keep);
    const auto r_off = offsets_of(dims, rest);

    const auto dk = static_cast<Eigen::Index>(k_off.size());
    const auto dr = static_cast<Eigen::Index>(r_off.size());
    Matrix psi(dk, dr);
    const Vector& amps = state.amplitudes();
    for (Eigen::Index i = 0; i < dk; ++i) {
        for (Eigen::Index j = 0; j < dr; ++j) {
            psi(i, j) = amps(static_cast<Eigen::Index>(k_off[i] + r_off[j]));
        }
    }
    return MixedState(state.layout().select(keep), psi * psi.adjoint());
}

MixedState partial_trace(const MixedState& state, std::span<const std::size_t> keep) {
    check_keep(state.layout(), keep);
    const auto dims = dims_of(state.layout());
    const auto rest = state.layout().complement(keep);
    const auto k_off = offsets_of(dims, keep);
    const auto r_off = offsets_of(dims, rest);

    const auto dk = static_cast<Eigen::Index>(k_off.size());
    const Matrix& rho = state.matrix();
    Matrix out = Matrix::Zero(dk, dk);
    for (Eigen::Index i = 0; i < dk; ++i) {
        for (Eigen::Index j = 0; j < dk; ++j) {
            cplx acc = 0.0;
            for (auto r : r_off) {
                acc += rho(static_cast<Eigen::Index>(k_off[i] + r),
                           static_cast<Eigen::Index>(k_off[j] + r));
            }
            out(i, j) = acc;
        }
    }
    return MixedState(state.layout().select(keep), std::move(out));
}

RealVector density_eigenvalues(const Matrix& rho) {
    const Matrix sym = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double entropy_from_probabilities(std::span<const double> p) {
    double s = 0.0;
    for (double x : p) {
        if (x > kEntropyCutoff) s -= x * std::log(x);
    }
    return s;
}

double entropy_vn(const MixedState& rho) {
    if (rho.hermiticity_residual() > kHermitianTol) {
        throw DimensionError("entropy_vn: matrix is not Hermitian");
    }
    const RealVector ev = density_eigenvalues(rho.matrix());
    return entropy_from_probabilities(std::span<const double>(ev.data(), ev.size()));
}

double renyi_purity(const MixedState& rho, int n) {
    if (n < 1) {
        throw std::invalid_argument("renyi_purity: order must be >= 1");
    }
    const RealVector ev = density_eigenvalues(rho.matrix());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        acc += std::pow(std::max(ev(i), 0.0), n);
    }
    return acc;
}

std::vector<double> schmidt_values(const PureState& state, std::span<const std::size_t> part) {
    const auto& layout = state.layout();
    if (part.empty() || part.size() >= layout.size()) {
        throw LayoutError("schmidt_values: cut must leave both sides nonempty");
    }
    check_positions(layout, part, "schmidt_values");
    const auto dims = dims_of(layout);
    const auto rest = layout.complement(part);
    const auto a_off = offsets_of(dims, part);
    const auto b_off = offsets_of(dims, rest);

    Matrix psi(static_cast<Eigen::Index>(a_off.size()), static_cast<Eigen::Index>(b_off.size()));
    for (std::size_t i = 0; i < a_off.size(); ++i) {
        for (std::size_t j = 0; j < b_off.size(); ++j) {
            psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                state.amplitudes()(static_cast<Eigen::Index>(a_off[i] + b_off[j]));
        }
    }
    Eigen::JacobiSVD<Matrix> svd(psi);
    const RealVector s = svd.singularValues();
    std::vector<double> out(s.data(), s.data() + s.size());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

double overlap(const MixedState& rho, const MixedState& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw DimensionError("overlap: dimension mismatch");
    }
    // Tr[rho sigma] = sum_ij rho_ij sigma_ji
    return rho.matrix().cwiseProduct(sigma.matrix().transpose()).sum().real();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double unitarity_residual(const Matrix& u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

bool is_unitary(const Matrix& u, double tol) {
    return unitarity_residual(u) <= tol;
}

}  // namespace rewindlab
