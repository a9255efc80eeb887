#include "rewind/recovery.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "rewind/csv.hpp"

namespace rewindlab {

namespace {

constexpr double kTraceTol = 1e-10;
constexpr double kWeightFloor = 1e-15;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

/// Reduced qudit matrix of the protocol output for one (possibly
/// unnormalized) bath vector.
Matrix pure_bath_run(const Vector& psi, const Vector& bath, const Matrix& scrambler,
                     const EavesdropGate& gate) {
    const std::size_t d = static_cast<std::size_t>(psi.size());
    const std::size_t db = static_cast<std::size_t>(bath.size());
    const std::size_t da = gate.ancilla_dim();
    const std::size_t dims[] = {d, db, da};
    const std::size_t system[] = {0, 1};
    const std::size_t coupled[] = {0, 2};

    Vector v = Vector::Zero(idx(d * db * da));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t b = 0; b < db; ++b) {
            v(idx((i * db + b) * da)) = psi(idx(i)) * bath(idx(b));
        }
    }
    apply_in_place(scrambler, dims, system, v);
    apply_in_place(gate.matrix(), dims, coupled, v);
    apply_in_place(scrambler.adjoint(), dims, system, v);

    // Tr over (bath, ancilla): rows i, columns (b, a) flattened.
    const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        psi_mat(v.data(), idx(d), idx(db * da));
    return psi_mat * psi_mat.adjoint();
}

void check_protocol_inputs(const PureState& psi, std::size_t bath_dim, const Matrix& scrambler,
                           const EavesdropGate& gate) {
    if (psi.dim() != gate.d()) {
        throw DimensionError("run_protocol: qudit state dimension differs from gate d");
    }
    const auto n = idx(gate.d() * bath_dim);
    if (scrambler.rows() != n || scrambler.cols() != n) {
        throw DimensionError("run_protocol: scrambler side must be d * D_B = " +
                             std::to_string(n));
    }
}

std::size_t bath_dimension(const BathState& bath) {
    return std::visit([](const auto& s) { return s.dim(); }, bath);
}

Matrix psd_sqrt(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    RealVector ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix final_state_matrix(const PureState& psi, const BathState& bath, const Matrix& scrambler,
                          const EavesdropGate& gate, const MixedBathPolicy& policy) {
    if (const auto* pure = std::get_if<PureState>(&bath)) {
        return pure_bath_run(psi.amplitudes(), pure->amplitudes(), scrambler, gate);
    }
    const auto& mixed = std::get<MixedState>(bath);
    if (std::abs(mixed.trace() - cplx(1.0, 0.0)) > kTraceTol) {
        throw DimensionError("run_protocol: bath density matrix does not have unit trace");
    }
    if (mixed.hermiticity_residual() > kTraceTol) {
        throw DimensionError("run_protocol: bath density matrix is not Hermitian");
    }
    const std::size_t db = mixed.dim();
    Matrix acc = Matrix::Zero(idx(gate.d()), idx(gate.d()));
    if (db <= policy.exact_threshold) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (mixed.matrix() + mixed.matrix().adjoint()));
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            const double w = es.eigenvalues()(k);
            if (w <= kWeightFloor) continue;
            acc += w * pure_bath_run(psi.amplitudes(), es.eigenvectors().col(k), scrambler, gate);
        }
        return acc;
    }
    if (policy.samples == 0) throw std::invalid_argument("MixedBathPolicy: samples must be >= 1");
    const Matrix root = psd_sqrt(mixed.matrix()) * std::sqrt(static_cast<double>(db));
    SeededSource src(policy.seed, db);
    for (std::size_t s = 0; s < policy.samples; ++s) {
        const PureState chi = haar_state(db, src, Role::bath);
        const Vector w = root * chi.amplitudes();
        acc += pure_bath_run(psi.amplitudes(), w, scrambler, gate);
    }
    return acc / static_cast<double>(policy.samples);
}

RecoveryRecord make_record(const PureState& psi, const Matrix& rho_f, std::size_t bath_dim,
                           const EavesdropGate& gate) {
    RecoveryRecord rec;
    rec.d = gate.d();
    rec.ancilla_dim = gate.ancilla_dim();
    rec.bath_dim = bath_dim;
    rec.gate = gate.label();
    const Vector& a = psi.amplitudes();
    rec.overlap = a.dot(rho_f * a).real();
    rec.ratio = recovery_ratio(rec.overlap, gate.d());
    return rec;
}

template <typename SampleFn>
RecoveryMc run_samples(std::size_t samples, unsigned threads, SampleFn&& fn) {
    if (samples < 1) throw std::invalid_argument("recovery Monte Carlo: samples must be >= 1");
    RecoveryMc out;
    out.records.resize(samples);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(samples)));
    auto work = [&](unsigned w) {
        for (std::size_t k = w; k < samples; k += workers) {
            const auto t0 = std::chrono::steady_clock::now();
            RecoveryRecord rec = fn(k);
            rec.sample_index = k;
            rec.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.records[k] = std::move(rec);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    RunningStats stats;
    for (const auto& r : out.records) stats.add(r.ratio);
    out.ratio = stats.estimate();
    return out;
}

}  // namespace

std::string to_string(ScramblerKind kind) {
    switch (kind) {
    case ScramblerKind::haar_full:
        return "haar-full";
    case ScramblerKind::haar_qudit_only:
        return "haar-qudit-only";
    case ScramblerKind::supplied:
        return "supplied";
    }
    return "unknown";
}

nlohmann::json RecoveryRecord::to_json() const {
    return {{"d", d},
            {"d_A", ancilla_dim},
            {"bath_dim", bath_dim},
            {"scrambler", rewindlab::to_string(scrambler)},
            {"gate", gate},
            {"sample_index", sample_index},
            {"seed", seed},
            {"stream", stream},
            {"overlap", overlap},
            {"r", ratio},
            {"wall_seconds", wall_seconds}};
}

double recovery_ratio(double overlap, std::size_t d) {
    if (d < 2) throw std::invalid_argument("recovery_ratio: d must be >= 2");
    const double inv = 1.0 / static_cast<double>(d);
    return (overlap - inv) / (1.0 - inv);
}

MixedState final_qudit_state(const PureState& psi, const BathState& bath, const Matrix& scrambler,
                             const EavesdropGate& gate, const MixedBathPolicy& policy) {
    check_protocol_inputs(psi, bath_dimension(bath), scrambler, gate);
    if (!is_unitary(scrambler, 1e-10)) {
        throw DimensionError("run_protocol: scrambler is not unitary");
    }
    return MixedState(SpaceLayout::single(gate.d(), Role::qudit),
                      final_state_matrix(psi, bath, scrambler, gate, policy));
}

RecoveryRecord run_protocol(const PureState& psi, const BathState& bath, const Matrix& scrambler,
                            const EavesdropGate& gate, const MixedBathPolicy& policy) {
    const auto t0 = std::chrono::steady_clock::now();
    const MixedState rho_f = final_qudit_state(psi, bath, scrambler, gate, policy);
    RecoveryRecord rec = make_record(psi, rho_f.matrix(), bath_dimension(bath), gate);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

double otoc_overlap(const PureState& psi, const BathState& bath, const Matrix& scrambler,
                    const EavesdropGate& gate) {
    const std::size_t db = bath_dimension(bath);
    check_protocol_inputs(psi, db, scrambler, gate);
    const std::size_t d = gate.d();
    const std::size_t da = gate.ancilla_dim();
    const std::size_t n = d * db * da;
    if (n > kMaxDensitySide) {
        throw CapacityError("otoc_overlap: total dimension " + std::to_string(n) +
                            " exceeds the dense cap " + std::to_string(kMaxDensitySide));
    }
    const Matrix id_a = Matrix::Identity(idx(da), idx(da));
    const Matrix id_b = Matrix::Identity(idx(db), idx(db));

    // V acts on factors 0 and 2 with the bath in between.
    Matrix v_full = Matrix::Zero(idx(n), idx(n));
    const Matrix& v = gate.matrix();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t a = 0; a < da; ++a)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t c = 0; c < da; ++c) {
                    const cplx x = v(idx(i * da + a), idx(j * da + c));
                    if (x == cplx(0.0)) continue;
                    for (std::size_t b = 0; b < db; ++b) {
                        v_full(idx((i * db + b) * da + a), idx((j * db + b) * da + c)) = x;
                    }
                }

    const Matrix u_full = kron(scrambler, id_a);
    const Matrix v_t = u_full.adjoint() * v_full * u_full;

    const Matrix rho_i = psi.amplitudes() * psi.amplitudes().adjoint();
    const Matrix rho_b = std::visit(
        [](const auto& s) -> Matrix {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PureState>) {
                return s.amplitudes() * s.amplitudes().adjoint();
            } else {
                return s.matrix();
            }
        },
        bath);
    Matrix ref = Matrix::Zero(idx(da), idx(da));
    ref(0, 0) = 1.0;

    const Matrix initial = kron(kron(rho_i, rho_b), ref);
    const Matrix probe = kron(kron(rho_i, id_b), id_a);
    return (probe * v_t * initial * v_t.adjoint()).trace().real();
}

PredictedRatios predicted_ratios(const EavesdropGate& gate) {
    const double d = static_cast<double>(gate.d());
    if (gate.d() < 2) throw std::invalid_argument("predicted_ratios: d must be >= 2");
    const double f = f_functional(gate);
    return {f / (d * d), (f - 1.0) / (d * d - 1.0)};
}

RecoveryMc haar_recovery_mc(std::size_t bath_dim, const EavesdropGate& gate, std::size_t samples,
                            const SeededSource& src, unsigned threads) {
    if (bath_dim < 2) throw std::invalid_argument("haar_recovery_mc: bath dimension must be >= 2");
    const std::size_t d = gate.d();
    return run_samples(samples, threads, [&](std::size_t k) {
        SeededSource s = src.substream(k);
        const Matrix u = haar_unitary(d * bath_dim, s);
        const PureState psi = haar_state(d, s);
        const PureState phi = haar_state(bath_dim, s, Role::bath);
        const Matrix rho_f = pure_bath_run(psi.amplitudes(), phi.amplitudes(), u, gate);
        RecoveryRecord rec = make_record(psi, rho_f, bath_dim, gate);
        rec.scrambler = ScramblerKind::haar_full;
        rec.seed = s.seed();
        rec.stream = s.stream();
        return rec;
    });
}

RecoveryMc classical_recovery_mc(const EavesdropGate& gate, std::size_t samples,
                                 const SeededSource& src, unsigned threads) {
    const std::size_t d = gate.d();
    const Vector trivial_bath = Vector::Ones(1);
    return run_samples(samples, threads, [&](std::size_t k) {
        SeededSource s = src.substream(k);
        const Matrix u = haar_unitary(d, s);
        const PureState psi = haar_state(d, s);
        const Matrix rho_f = pure_bath_run(psi.amplitudes(), trivial_bath, u, gate);
        RecoveryRecord rec = make_record(psi, rho_f, 1, gate);
        rec.scrambler = ScramblerKind::haar_qudit_only;
        rec.seed = s.seed();
        rec.stream = s.stream();
        return rec;
    });
}

void write_records_jsonl(std::ostream& os, const std::vector<RecoveryRecord>& records) {
    for (const auto& r : records) os << r.to_json().dump() << '\n';
}

void write_records_csv(std::ostream& os, const std::vector<RecoveryRecord>& records) {
    csv::write_header(os, {"sample_index", "overlap", "r", "seed", "stream"});
    for (const auto& r : records) {
        csv::write_row(os, r.sample_index, r.overlap, r.ratio, r.seed, r.stream);
    }
}

}  // namespace rewindlab
