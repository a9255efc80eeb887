#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracle.hpp"
#include "rewind/recovery.hpp"

using namespace rewindlab;

namespace {

PureState qudit(const Vector& v) { return PureState(SpaceLayout::single(v.size(), Role::qudit), v); }
PureState bath_pure(const Vector& v) { return PureState(SpaceLayout::single(v.size(), Role::bath), v); }
MixedState bath_mixed(const Matrix& m) {
    return MixedState(SpaceLayout::single(static_cast<std::size_t>(m.rows()), Role::bath), m);
}

// Exact Haar average over U(d D) of the overlap for a pure bath, from the
// second-moment formula E[U^dag X U B U^dag Y U].
double exact_finite_ratio(double f, double d, double D) {
    const double ov = (D * D * f - 1.0 + D * D * d - D * D * f / d) / (d * d * D * D - 1.0);
    return (ov - 1.0 / d) / (1.0 - 1.0 / d);
}

double tolerance(const McEstimate& e, double floor) { return std::max(3.0 * e.stderr_, floor); }

}  // namespace

TEST_CASE("recovery ratio") {
    CHECK(recovery_ratio(1.0, 2) == 1.0);
    CHECK(recovery_ratio(0.5, 2) == 0.0);
    CHECK(std::abs(recovery_ratio(0.0, 3) + 0.5) < 1e-15);
    CHECK_THROWS_AS(recovery_ratio(0.5, 1), std::invalid_argument);
}

TEST_CASE("run_protocol trivial cases") {
    SeededSource src(1, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix u = haar_unitary(2 * 8, src);
        const auto rec = run_protocol(haar_state(2, src), haar_state(8, src, Role::bath), u, identity_gate(2, 2));
        CHECK(std::abs(rec.ratio - 1.0) < 1e-10);
    }
    const Matrix id = Matrix::Identity(6, 6);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const PureState basis = qudit(Vector::Unit(3, i));
        const auto out = final_qudit_state(basis, MixedState::maximally_mixed(SpaceLayout::single(2, Role::bath)),
                                           id, strong_measurement(3));
        CHECK(oracle::max_abs(out.matrix() - Vector::Unit(3, i) * Vector::Unit(3, i).adjoint()) < 1e-12);
        const auto rec = run_protocol(basis, haar_state(2, src, Role::bath), id, strong_measurement(3));
        CHECK(std::abs(rec.ratio - 1.0) < 1e-12);
    }
}

TEST_CASE("run_protocol errors") {
    SeededSource src(2, 0);
    const Matrix u = haar_unitary(8, src);
    const auto g = strong_measurement(2);
    CHECK_THROWS_AS(run_protocol(haar_state(3, src), haar_state(4, src, Role::bath), u, g), DimensionError);
    CHECK_THROWS_AS(run_protocol(haar_state(2, src), haar_state(3, src, Role::bath), u, g), DimensionError);
    Matrix heavy = Matrix::Identity(4, 4) * 0.5;
    CHECK_THROWS_AS(run_protocol(haar_state(2, src), bath_mixed(heavy), u, g), DimensionError);
    Matrix not_unitary = u;
    not_unitary(0, 0) += 0.5;
    CHECK_THROWS_AS(run_protocol(haar_state(2, src), haar_state(4, src, Role::bath), not_unitary, g),
                    DimensionError);
}

TEST_CASE("oracle overlaps") {
    for (const auto& e : oracle::data()["recovery"]) {
        const auto d = e["d"].get<std::size_t>();
        const auto da = e["d_A"].get<std::size_t>();
        const EavesdropGate g(d, da, oracle::mat(e["V"]));
        const Matrix us = oracle::mat(e["U_s"]);
        const PureState psi = qudit(oracle::vec(e["psi"]));
        const PureState chi = bath_pure(oracle::vec(e["chi"]));
        const MixedState rho = bath_mixed(oracle::mat(e["rho_B"]));
        const double pure = e["overlap_pure"].get<double>();
        const double mixed = e["overlap_mixed"].get<double>();
        CHECK(std::abs(run_protocol(psi, chi, us, g).overlap - pure) < 1e-10);
        CHECK(std::abs(run_protocol(psi, rho, us, g).overlap - mixed) < 1e-10);
        CHECK(std::abs(otoc_overlap(psi, chi, us, g) - pure) < 1e-10);
        CHECK(std::abs(otoc_overlap(psi, rho, us, g) - mixed) < 1e-10);
    }
}

TEST_CASE("run_protocol agrees with otoc_overlap") {
    SeededSource src(3, 0);
    // d = 2, bath 4, ancilla 2
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_gate(2, 2, src);
        const Matrix u = haar_unitary(8, src);
        const PureState psi = haar_state(2, src);
        const PureState chi = haar_state(4, src, Role::bath);
        CHECK(std::abs(run_protocol(psi, chi, u, g).overlap - otoc_overlap(psi, chi, u, g)) < 1e-10);
    }
    // d = 2, bath 8, assorted gates and mixed baths
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = trial % 2 ? random_gate(2, 3, src) : weak_measurement(2, 0.3 + 0.05 * trial);
        const Matrix u = haar_unitary(16, src);
        const PureState psi = haar_state(2, src);
        Matrix a(8, 8);
        for (auto& x : a.reshaped()) x = src.complex_normal();
        Matrix rho = a * a.adjoint();
        rho /= rho.trace().real();
        const MixedState mb = bath_mixed(rho);
        CHECK(std::abs(run_protocol(psi, mb, u, g).overlap - otoc_overlap(psi, mb, u, g)) < 1e-10);
    }
    // identity gate: overlap 1
    const Matrix u = haar_unitary(8, src);
    CHECK(std::abs(otoc_overlap(haar_state(2, src), haar_state(4, src, Role::bath), u, identity_gate(2, 2)) - 1.0) <
          1e-10);
}

TEST_CASE("otoc capacity") {
    SeededSource src(4, 0);
    const std::size_t db = kMaxDensitySide / 4 + 1;
    const Matrix u = Matrix::Identity(static_cast<Eigen::Index>(2 * db), static_cast<Eigen::Index>(2 * db));
    CHECK_THROWS_AS(otoc_overlap(haar_state(2, src), PureState::basis(SpaceLayout::single(db, Role::bath), 0), u,
                                 strong_measurement(2)),
                    CapacityError);
}

TEST_CASE("completely scrambling gate sends the overlap to 1/d") {
    // V = (x (x) I): f = 0, and averaging over Haar U_s gives overlap
    // (1 - 1 + D^2 d) / (d^2 D^2 - 1) ~ 1/d
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    const auto g = local_gate(x, 2);
    SeededSource src(5, 0);
    RunningStats ov;
    for (int k = 0; k < 400; ++k) {
        const Matrix u = haar_unitary(2 * 16, src);
        ov.add(otoc_overlap(haar_state(2, src), haar_state(16, src, Role::bath), u, g));
    }
    CHECK(std::abs(ov.mean() - 0.5) < std::max(3.0 * ov.estimate().stderr_, 0.01));
}

TEST_CASE("mixed bath linearity") {
    SeededSource src(6, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto g = random_gate(2, 2, src);
        const Matrix u = haar_unitary(12, src);
        const PureState psi = haar_state(2, src);
        Matrix a(6, 6);
        for (auto& x : a.reshaped()) x = src.complex_normal();
        Matrix rho = a * a.adjoint();
        rho /= rho.trace().real();
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
        double combo = 0.0;
        for (Eigen::Index k = 0; k < 6; ++k) {
            combo += es.eigenvalues()(k) * run_protocol(psi, bath_pure(es.eigenvectors().col(k)), u, g).overlap;
        }
        CHECK(std::abs(run_protocol(psi, bath_mixed(rho), u, g).overlap - combo) < 1e-10);
    }
}

TEST_CASE("mixed bath sampling above the threshold") {
    SeededSource src(7, 0);
    const auto g = random_gate(2, 2, src);
    const Matrix u = haar_unitary(2 * 16, src);
    const PureState psi = haar_state(2, src);
    const MixedState mm = MixedState::maximally_mixed(SpaceLayout::single(16, Role::bath));
    const double exact = run_protocol(psi, mm, u, g).overlap;
    MixedBathPolicy sampled;
    sampled.exact_threshold = 4;
    sampled.samples = 4000;
    const double approx = run_protocol(psi, mm, u, g, sampled).overlap;
    CHECK(std::abs(approx - exact) < 0.02);
}

TEST_CASE("predicted ratios") {
    const auto s = predicted_ratios(strong_measurement(2));
    CHECK(std::abs(s.quantum - 0.5) < 1e-12);
    CHECK(std::abs(s.classical - 1.0 / 3.0) < 1e-12);
    const auto id = predicted_ratios(identity_gate(3, 2));
    CHECK(std::abs(id.quantum - 1.0) < 1e-12);
    CHECK(std::abs(id.classical - 1.0) < 1e-12);
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    const auto tl = predicted_ratios(local_gate(z, 2));
    CHECK(std::abs(tl.quantum) < 1e-15);
    CHECK(std::abs(tl.classical + 1.0 / 3.0) < 1e-15);

    SeededSource src(8, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto p = predicted_ratios(random_gate(2 + trial % 3, 1 + trial % 3, src));
        CHECK(p.classical <= p.quantum + 1e-12);
    }
}

TEST_CASE("haar plateaus") {
    {
        const auto mc = haar_recovery_mc(128, strong_measurement(2), 100, SeededSource(10, 0));
        CHECK(std::abs(mc.ratio.mean - 0.5) < tolerance(mc.ratio, 0.03));
    }
    {
        const auto mc = haar_recovery_mc(81, strong_measurement(3), 200, SeededSource(11, 0));
        CHECK(std::abs(mc.ratio.mean - 1.0 / 3.0) < tolerance(mc.ratio, 0.04));
    }
    {
        const auto mc = haar_recovery_mc(64, weak_measurement(2, 0.5), 100, SeededSource(12, 0));
        CHECK(std::abs(mc.ratio.mean - 0.75) < tolerance(mc.ratio, 0.05));
    }
    CHECK_THROWS_AS(haar_recovery_mc(1, strong_measurement(2), 10, SeededSource(1, 0)), std::invalid_argument);
    CHECK_THROWS_AS(haar_recovery_mc(4, strong_measurement(2), 0, SeededSource(1, 0)), std::invalid_argument);
}

TEST_CASE("classical plateaus") {
    {
        const auto mc = classical_recovery_mc(strong_measurement(2), 10000, SeededSource(13, 0));
        CHECK(std::abs(mc.ratio.mean - 1.0 / 3.0) < tolerance(mc.ratio, 0.02));
    }
    {
        const auto mc = classical_recovery_mc(strong_measurement(3), 10000, SeededSource(14, 0));
        CHECK(std::abs(mc.ratio.mean - 0.25) < 3.0 * mc.ratio.stderr_);
    }
    {
        const auto mc = classical_recovery_mc(identity_gate(2, 2), 200, SeededSource(15, 0));
        for (const auto& r : mc.records) CHECK(std::abs(r.ratio - 1.0) < 1e-10);
    }
}

TEST_CASE("exact finite-D average") {
    // small bath, where the O(1/D^2) correction is visible
    SeededSource gs(16, 0);
    const auto g = random_gate(2, 2, gs);
    const double f = f_functional(g);
    const auto mc = haar_recovery_mc(2, g, 20000, SeededSource(17, 0));
    CHECK(std::abs(mc.ratio.mean - exact_finite_ratio(f, 2.0, 2.0)) < 3.0 * mc.ratio.stderr_);
    CHECK(std::abs(exact_finite_ratio(f, 2.0, 1e6) - f / 4.0) < 1e-10);
}

TEST_CASE("deviation from r_q shrinks with the bath") {
    double small = 0.0, large = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        SeededSource gs(18, k);
        const auto g = random_gate(2, 2, gs);
        const double rq = predicted_ratios(g).quantum;
        small += std::abs(haar_recovery_mc(16, g, 8, SeededSource(19, k)).ratio.mean - rq);
        large += std::abs(haar_recovery_mc(256, g, 8, SeededSource(20, k)).ratio.mean - rq);
    }
    MESSAGE("mean |deviation| D_B=16: " << small / 20 << ", D_B=256: " << large / 20);
    CHECK(small > large);
}

TEST_CASE("records and thread determinism") {
    const auto g = strong_measurement(2);
    const auto one = haar_recovery_mc(8, g, 30, SeededSource(21, 3), 1);
    const auto two = haar_recovery_mc(8, g, 30, SeededSource(21, 3), 2);
    REQUIRE(one.records.size() == 30);
    for (std::size_t k = 0; k < 30; ++k) {
        CHECK(one.records[k].overlap == two.records[k].overlap);
        CHECK(one.records[k].sample_index == k);
        CHECK(one.records[k].ratio == recovery_ratio(one.records[k].overlap, 2));
        CHECK(one.records[k].ratio >= -1.0 - 1e-12);
        CHECK(one.records[k].ratio <= 1.0 + 1e-10);
    }
    CHECK(one.ratio.mean == two.ratio.mean);

    std::ostringstream jl, cs;
    write_records_jsonl(jl, one.records);
    write_records_csv(cs, one.records);
    std::istringstream lines(jl.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["sample_index"] == n);
        CHECK(j["overlap"].get<double>() == one.records[n].overlap);
        ++n;
    }
    CHECK(n == 30);
    CHECK(cs.str().rfind("sample_index,overlap,r,seed,stream\n", 0) == 0);
}
