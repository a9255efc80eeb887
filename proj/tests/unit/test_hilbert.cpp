#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "rewind/hilbert.hpp"
#include "rewind/random.hpp"

using namespace rewindlab;

namespace {

SpaceLayout baths(std::initializer_list<std::size_t> dims) {
    std::vector<Factor> f;
    for (auto d : dims) f.push_back({d, Role::bath});
    return SpaceLayout(std::move(f));
}

PureState random_state(const SpaceLayout& layout, SeededSource& src) {
    Vector v(static_cast<Eigen::Index>(layout.total_dim()));
    for (auto& x : v) x = src.complex_normal();
    return PureState(layout, v);
}

MixedState random_density(std::size_t n, SeededSource& src) {
    Matrix a(n, n);
    for (auto& x : a.reshaped()) x = src.complex_normal();
    Matrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return MixedState(SpaceLayout::single(n, Role::bath), rho);
}

Vector ket(std::initializer_list<cplx> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (auto x : xs) v(k++) = x;
    return v;
}

}  // namespace

TEST_CASE("layout invariants") {
    const SpaceLayout l{{2, Role::qudit}, {3, Role::bath}, {4, Role::bath}, {2, Role::ancilla}};
    CHECK(l.total_dim() == 48);
    CHECK(l.find(Role::ancilla) == 3);
    CHECK_THROWS_AS(SpaceLayout({{2, Role::qudit}, {2, Role::qudit}}), LayoutError);
    CHECK_THROWS_AS(SpaceLayout({{0, Role::bath}}), LayoutError);
}

TEST_CASE("tensor") {
    const auto q = SpaceLayout::single(2, Role::qudit);
    const auto a = SpaceLayout::single(2, Role::ancilla);
    const PureState zz = tensor(PureState::basis(q, 0), PureState::basis(a, 0));
    CHECK(oracle::max_abs(zz.amplitudes() - ket({1, 0, 0, 0})) < 1e-15);

    const double s = 1.0 / std::sqrt(2.0);
    const PureState plus_one = tensor(PureState(q, ket({1, 1})), PureState::basis(a, 1));
    CHECK(oracle::max_abs(plus_one.amplitudes() - ket({0, s, 0, s})) < 1e-15);

    CHECK_THROWS_AS(tensor(PureState::basis(q, 0), PureState::basis(q, 1)), LayoutError);

    const auto& o = oracle::data()["tensor_2x3"];
    const PureState t = tensor(PureState(q, oracle::vec(o["a"])), PureState(baths({3}), oracle::vec(o["b"])));
    CHECK(oracle::max_abs(t.amplitudes() - oracle::vec(o["expected"])) < 1e-14);
}

TEST_CASE("apply") {
    SeededSource src(11, 0);
    const auto l = baths({2, 3, 2});
    const PureState psi = random_state(l, src);

    const PureState same = apply(FactorOperator({1}, Matrix::Identity(3, 3), true), psi);
    CHECK(oracle::max_abs(same.amplitudes() - psi.amplitudes()) < 1e-15);

    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    const auto two = baths({2, 2});
    const PureState flipped = apply(FactorOperator({0}, x, true), PureState::basis(two, 0));
    CHECK(oracle::max_abs(flipped.amplitudes() - ket({0, 0, 1, 0})) < 1e-15);

    const auto& o = oracle::data()["apply_factor1_232"];
    const PureState in(l, oracle::vec(o["psi"]));
    const PureState res = apply(FactorOperator({1}, oracle::mat(o["u"]), true), in);
    CHECK(oracle::max_abs(res.amplitudes() - oracle::vec(o["expected"])) < 1e-12);

    // dense Kronecker cross-check with the library's own random unitary
    const Matrix u = haar_unitary(3, src);
    const Matrix dense = kron(kron(Matrix::Identity(2, 2), u), Matrix::Identity(2, 2));
    const PureState r2 = apply(FactorOperator({1}, u, true), psi);
    CHECK(oracle::max_abs(r2.amplitudes() - dense * psi.amplitudes()) < 1e-12);

    // mixed: O rho O^dagger
    const MixedState rho = psi.projector();
    const MixedState rr = apply(FactorOperator({1}, u, true), rho);
    CHECK(oracle::max_abs(rr.matrix() - dense * rho.matrix() * dense.adjoint()) < 1e-12);

    CHECK_THROWS_AS(apply(FactorOperator({1}, Matrix::Identity(2, 2)), psi), DimensionError);
    CHECK_THROWS_AS(FactorOperator({0}, Matrix::Ones(2, 2), true), DimensionError);
}

TEST_CASE("pure states stay normalized") {
    SeededSource src(12, 0);
    const auto l = baths({2, 3});
    PureState psi = random_state(l, src);
    Matrix proj = Matrix::Zero(3, 3);
    proj(0, 0) = 1.0;
    proj(2, 1) = 0.3;
    for (int k = 0; k < 5; ++k) {
        psi = apply(FactorOperator({1}, proj), psi);
        CHECK(std::abs(psi.amplitudes().norm() - 1.0) < 1e-12);
        psi = apply(FactorOperator({0, 1}, haar_unitary(6, src), true), psi);
        CHECK(std::abs(psi.amplitudes().norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("partial trace") {
    const double s = 1.0 / std::sqrt(2.0);
    const auto two = baths({2, 2});
    const PureState bell(two, ket({s, 0, 0, s}));
    const std::vector<std::size_t> first{0};
    CHECK(oracle::max_abs(partial_trace(bell, first).matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-15);

    SeededSource src(13, 0);
    const PureState a = random_state(baths({2}), src);
    const PureState b = random_state(baths({3}), src);
    const MixedState red = partial_trace(tensor(a, b), first);
    CHECK(oracle::max_abs(red.matrix() - a.amplitudes() * a.amplitudes().adjoint()) < 1e-14);

    const auto& o = oracle::data()["ptrace_223"];
    const PureState psi(baths({2, 2, 3}), oracle::vec(o["psi"]));
    const std::vector<std::size_t> k2{2}, k02{0, 2};
    CHECK(oracle::max_abs(partial_trace(psi, k2).matrix() - oracle::mat(o["keep2"])) < 1e-12);
    CHECK(oracle::max_abs(partial_trace(psi, k02).matrix() - oracle::mat(o["keep02"])) < 1e-12);
    CHECK(oracle::max_abs(partial_trace(psi.projector(), k02).matrix() - oracle::mat(o["keep02"])) < 1e-12);

    CHECK_THROWS_AS(partial_trace(psi, std::vector<std::size_t>{}), LayoutError);

    // composition: drop factor 1, then factor 0 of the remainder == keep {2}
    for (int trial = 0; trial < 10; ++trial) {
        const PureState r = random_state(baths({2, 3, 2}), src);
        const MixedState step = partial_trace(r, k02);
        const MixedState twice = partial_trace(step, std::vector<std::size_t>{1});
        const MixedState once = partial_trace(r, k2);
        CHECK(oracle::max_abs(twice.matrix() - once.matrix()) < 1e-12);
        CHECK(std::abs(step.trace().real() - 1.0) < 1e-12);
        CHECK(step.hermiticity_residual() < 1e-12);
    }
}

TEST_CASE("entropy") {
    SeededSource src(14, 0);
    const PureState p = random_state(baths({4}), src);
    CHECK(std::abs(entropy_vn(p.projector())) < 1e-10);
    CHECK(std::abs(entropy_vn(MixedState::maximally_mixed(baths({2}))) - std::log(2.0)) < 1e-12);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.7;
    d(1, 1) = 0.3;
    CHECK(std::abs(entropy_vn(MixedState(baths({2}), d)) - (-0.7 * std::log(0.7) - 0.3 * std::log(0.3))) <
          1e-14);
    Matrix bad = d;
    bad(0, 1) = 0.2;
    CHECK_THROWS_AS(entropy_vn(MixedState(baths({2}), bad)), DimensionError);

    for (int trial = 0; trial < 10; ++trial) {
        const PureState r = random_state(baths({2, 3}), src);
        const double s0 = entropy_vn(partial_trace(r, std::vector<std::size_t>{0}));
        const double s1 = entropy_vn(partial_trace(r, std::vector<std::size_t>{1}));
        CHECK(std::abs(s0 - s1) < 1e-10);
        CHECK(s0 >= 0.0);
        CHECK(s0 <= std::log(2.0) + 1e-12);
    }
}

TEST_CASE("schmidt values") {
    const auto two = baths({2, 2});
    const std::vector<std::size_t> first{0};
    const auto prod = schmidt_values(PureState::basis(two, 3), first);
    CHECK(std::abs(prod[0] - 1.0) < 1e-15);
    CHECK(std::abs(prod[1]) < 1e-15);

    const double s = 1.0 / std::sqrt(2.0);
    const auto bell = schmidt_values(PureState(two, ket({s, 0, 0, s})), first);
    CHECK(std::abs(bell[0] - s) < 1e-15);
    CHECK(std::abs(bell[1] - s) < 1e-15);

    const auto& o = oracle::data()["schmidt_23"];
    const PureState psi(baths({2, 3}), oracle::vec(o["psi"]));
    const auto sv = schmidt_values(psi, first);
    REQUIRE(sv.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(sv[k] - o["expected"][k].get<double>()) < 1e-12);
    CHECK(sv[0] >= sv[1]);

    const RealVector ev = density_eigenvalues(partial_trace(psi, first).matrix());
    CHECK(std::abs(ev(1) - sv[0] * sv[0]) < 1e-12);
    CHECK(std::abs(ev(0) - sv[1] * sv[1]) < 1e-12);
    CHECK(std::abs(sv[0] * sv[0] + sv[1] * sv[1] - 1.0) < 1e-12);

    CHECK_THROWS(schmidt_values(psi, std::vector<std::size_t>{}));
    CHECK_THROWS(schmidt_values(psi, std::vector<std::size_t>{0, 1}));
}

TEST_CASE("overlap") {
    SeededSource src(15, 0);
    const PureState p = random_state(baths({3}), src);
    CHECK(std::abs(overlap(p.projector(), p.projector()) - 1.0) < 1e-14);
    const auto half = MixedState::maximally_mixed(baths({2}));
    CHECK(std::abs(overlap(half, half) - 0.5) < 1e-15);

    const auto& o = oracle::data()["overlap_pair"];
    const MixedState rho(baths({3}), oracle::mat(o["rho"]));
    const MixedState sigma(baths({3}), oracle::mat(o["sigma"]));
    CHECK(std::abs(overlap(rho, sigma) - o["expected"].get<double>()) < 1e-14);

    CHECK_THROWS_AS(overlap(rho, half), DimensionError);

    for (int trial = 0; trial < 10; ++trial) {
        const MixedState a = random_density(3, src);
        const MixedState b = random_density(3, src);
        const FactorOperator u({0}, haar_unitary(3, src), true);
        CHECK(std::abs(overlap(apply(u, a), apply(u, b)) - overlap(a, b)) < 1e-12);
    }
}

TEST_CASE("density invariants") {
    SeededSource src(16, 0);
    const MixedState r = random_density(4, src);
    CHECK(r.is_density());
    CHECK(std::abs(renyi_purity(r, 2) - (r.matrix() * r.matrix()).trace().real()) < 1e-14);
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.2;
    neg(1, 1) = -0.2;
    CHECK_FALSE(MixedState(baths({2}), neg).is_density());
}
