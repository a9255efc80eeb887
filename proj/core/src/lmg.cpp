#include "rewind/lmg.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rewind/csv.hpp"
#include "rewind/recovery.hpp"

namespace rewindlab {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

/// Tr[A B] = sum_ij A_ij B_ji
cplx trace_product(const Matrix& a, const Matrix& b) {
    return a.cwiseProduct(b.transpose()).sum();
}

/// (M (x) I_D) A (M (x) I_D)^dagger for a 2 x 2 qubit operator M, with A
/// split into 2 x 2 blocks of side D.
Matrix conjugate_qubit(const Matrix& m, const Matrix& a, Eigen::Index bath) {
    Matrix out = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index x = 0; x < 2; ++x)
        for (Eigen::Index y = 0; y < 2; ++y)
            for (Eigen::Index s = 0; s < 2; ++s)
                for (Eigen::Index sp = 0; sp < 2; ++sp) {
                    const cplx c = m(x, s) * std::conj(m(y, sp));
                    if (c == cplx(0.0)) continue;
                    out.block(x * bath, y * bath, bath, bath) +=
                        c * a.block(s * bath, sp * bath, bath, bath);
                }
    return out;
}

}  // namespace

void LmgConfig::validate() const {
    if (spin < 1) throw std::invalid_argument("LmgConfig: spin must be >= 1");
    if (2 * bath_dim() > kMaxDensitySide) {
        throw CapacityError("LmgConfig: qubit (x) bath dimension " + std::to_string(2 * bath_dim()) +
                            " exceeds the dense cap");
    }
}

nlohmann::json LmgConfig::to_json() const {
    return {{"S", spin},
            {"J", J},
            {"h", h},
            {"times", times},
            {"bath_init", bath == LmgBathKind::maximally_mixed ? "maximally-mixed" : "coherent"},
            {"theta", theta},
            {"phi", phi},
            {"mixed_method", method == MixedBathMethod::exact_density ? "exact" : "basis-average"}};
}

SpinMatrices spin_matrices(int spin) {
    if (spin < 1) throw std::invalid_argument("spin_matrices: spin must be >= 1");
    const auto n = idx(static_cast<std::size_t>(2 * spin + 1));
    const double s = spin;
    Matrix raise = Matrix::Zero(n, n);
    Matrix z = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double m = s - static_cast<double>(k);
        z(k, k) = m;
        if (k > 0) raise(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
    }
    const Matrix lower = raise.adjoint();
    return {(raise + lower) / 2.0, (raise - lower) / cplx(0.0, 2.0), z};
}

FactorOperator build_hamiltonian(const LmgConfig& config) {
    config.validate();
    const auto spins = spin_matrices(config.spin);
    const double s = config.spin;
    const auto d = idx(config.bath_dim());

    Matrix xq(2, 2);
    xq << 0.0, 0.5, 0.5, 0.0;
    Matrix zq(2, 2);
    zq << 0.5, 0.0, 0.0, -0.5;

    const Matrix lmg = spins.x + 2.0 * spins.z * spins.z / s;
    Matrix h = kron(config.h * xq, Matrix::Identity(d, d)) +
               kron(zq, spins.z) * (config.J / s) + kron(Matrix::Identity(2, 2), lmg);
    return FactorOperator({0, 1}, std::move(h));
}

Vector spin_coherent_state(int spin, double theta, double phi) {
    const auto spins = spin_matrices(spin);
    const Matrix n_dot = std::sin(theta) * std::cos(phi) * spins.x +
                         std::sin(theta) * std::sin(phi) * spins.y + std::cos(theta) * spins.z;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (n_dot + n_dot.adjoint()));
    Vector v = es.eigenvectors().col(es.eigenvalues().size() - 1);
    return v / v.norm();
}

LmgPropagator::LmgPropagator(const Matrix& hamiltonian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hamiltonian + hamiltonian.adjoint()));
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

Matrix LmgPropagator::evolution(double t) const {
    Vector phases(energies_.size());
    for (Eigen::Index k = 0; k < energies_.size(); ++k) phases(k) = std::polar(1.0, -energies_(k) * t);
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

Matrix QubitChannel::operator()(const Matrix& rho) const {
    Matrix out = Matrix::Zero(2, 2);
    for (Eigen::Index s = 0; s < 2; ++s)
        for (Eigen::Index sp = 0; sp < 2; ++sp) out += rho(s, sp) * images_[static_cast<std::size_t>(2 * s + sp)];
    return out;
}

double QubitChannel::overlap(const Vector& psi) const {
    const Vector p = psi / psi.norm();
    const Matrix rho = p * p.adjoint();
    return p.dot((*this)(rho) * p).real();
}

double QubitChannel::ratio(const Vector& psi) const { return recovery_ratio(overlap(psi), 2); }

// ---------------------------------------------------------------------------

LmgModel::LmgModel(LmgConfig config, EavesdropGate gate)
    : config_(std::move(config)),
      gate_(std::move(gate)),
      hamiltonian_(build_hamiltonian(config_).matrix()),
      propagator_(hamiltonian_) {
    if (gate_.d() != 2) throw DimensionError("LmgModel: gate must act on the qubit (d = 2)");
}

Matrix LmgModel::bath_root() const {
    if (config_.bath == LmgBathKind::maximally_mixed) return Matrix();
    return spin_coherent_state(config_.spin, config_.theta, config_.phi);
}

// <x|Phi(|s><s'|)|y> = sum_a Tr[ P(|y><x|) K_a A(|s><s'|) K_a^dagger ] with
// P(Y) = U (Y (x) I) U^dagger, A(X) = U (X (x) rho_B) U^dagger, K_a = M_a (x) I.
// rho_B = root root^dagger; an empty root stands for I/D.
QubitChannel LmgModel::channel_exact(double t, const Matrix& root) const {
    const Matrix u = propagator_.evolution(t);
    const auto d = idx(config_.bath_dim());
    const KrausSet ks = kraus(gate_);
    const Matrix w[2] = {u.middleCols(0, d), u.middleCols(d, d)};

    std::array<Matrix, 4> probe;  // P(|a><b|), index 2 a + b
    probe[0] = w[0] * w[0].adjoint();
    probe[1] = w[0] * w[1].adjoint();
    probe[2] = probe[1].adjoint();
    probe[3] = w[1] * w[1].adjoint();

    std::array<Matrix, 4> input;  // A(|s><s'|), index 2 s + s'
    if (root.size() == 0) {
        for (std::size_t k = 0; k < 4; ++k) input[k] = probe[k] / static_cast<double>(d);
    } else {
        const Matrix wr[2] = {w[0] * root, w[1] * root};
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) input[2 * a + b] = wr[a] * wr[b].adjoint();
    }

    std::array<Matrix, 4> images;
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            Matrix kicked = Matrix::Zero(2 * d, 2 * d);
            for (const auto& m : ks.ops) kicked += conjugate_qubit(m, input[2 * s + sp], d);
            Matrix img(2, 2);
            for (std::size_t x = 0; x < 2; ++x)
                for (std::size_t y = 0; y < 2; ++y)
                    img(idx(x), idx(y)) = trace_product(probe[2 * y + x], kicked);
            images[2 * s + sp] = std::move(img);
        }
    }
    return QubitChannel(std::move(images));
}

QubitChannel LmgModel::channel_basis_average(double t) const {
    const auto d = idx(config_.bath_dim());
    std::array<Matrix, 4> acc;
    for (auto& m : acc) m = Matrix::Zero(2, 2);
    for (Eigen::Index b = 0; b < d; ++b) {
        const QubitChannel c = channel_exact(t, Vector::Unit(d, b));
        for (std::size_t k = 0; k < 4; ++k) {
            Matrix unit = Matrix::Zero(2, 2);
            unit(idx(k / 2), idx(k % 2)) = 1.0;
            acc[k] += c(unit);
        }
    }
    for (auto& m : acc) m /= static_cast<double>(d);
    return QubitChannel(std::move(acc));
}

QubitChannel LmgModel::channel(double t) const {
    if (config_.bath == LmgBathKind::maximally_mixed &&
        config_.method == MixedBathMethod::basis_average) {
        return channel_basis_average(t);
    }
    return channel_exact(t, bath_root());
}

std::vector<TimePoint> LmgModel::curve(const Vector& qubit) const {
    std::vector<TimePoint> out;
    out.reserve(config_.times.size());
    for (double t : config_.times) out.push_back({t, channel(t).ratio(qubit)});
    return out;
}

std::vector<TimePoint> lmg_recovery_curve(const LmgConfig& config, const EavesdropGate& gate,
                                          const Vector& qubit) {
    return LmgModel(config, gate).curve(qubit);
}

std::vector<LmgHistogram> lmg_histogram(const LmgConfig& config, const EavesdropGate& gate,
                                        std::span<const double> times, std::size_t samples,
                                        const SeededSource& src, std::size_t bins) {
    if (samples < 1) throw std::invalid_argument("lmg_histogram: samples must be >= 1");
    const LmgModel model(config, gate);
    std::vector<Vector> states;
    states.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        SeededSource s = src.substream(k);
        states.push_back(bloch_state(s).amplitudes());
    }
    std::vector<LmgHistogram> out;
    for (double t : times) {
        const QubitChannel c = model.channel(t);
        LmgHistogram hist;
        hist.t = t;
        hist.ratios.reserve(samples);
        for (const auto& psi : states) hist.ratios.push_back(c.ratio(psi));
        // r lies in [-1, 1] for a qubit
        hist.bins = histogram(hist.ratios, -1.0, 1.0, bins);
        out.push_back(std::move(hist));
    }
    return out;
}

std::vector<double> energy_trajectory(const LmgModel& model, const Vector& psi,
                                      std::span<const double> times) {
    std::vector<double> out;
    out.reserve(times.size());
    const Matrix& h = model.hamiltonian();
    for (double t : times) {
        const Vector v = model.propagator().evolution(t) * psi;
        out.push_back(v.dot(h * v).real() / v.squaredNorm());
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, std::span<const TimePoint> curve) {
    csv::write_header(os, {"t", "r"});
    for (const auto& p : curve) csv::write_row(os, p.t, p.r);
}

void write_histogram_csv(std::ostream& os, std::span<const LmgHistogram> hists) {
    csv::write_header(os, {"t", "bin_left", "bin_right", "count"});
    for (const auto& h : hists) {
        for (const auto& b : h.bins) csv::write_row(os, h.t, b.left, b.right, b.count);
    }
}

}  // namespace rewindlab
