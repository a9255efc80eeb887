#include "rewind/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rewindlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed & 0xffffffffULL),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream & 0xffffffffULL),
        static_cast<std::uint32_t>(stream >> 32),
    };
    return std::mt19937_64(seq);
}

}  // namespace

SeededSource::SeededSource(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

double SeededSource::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

cplx SeededSource::complex_normal() {
    // u1 in (0, 1] keeps the log finite. |z|^2 = -ln u1 is Exp(1).
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

SeededSource SeededSource::substream(std::uint64_t k) const {
    return SeededSource(seed_, splitmix64(stream_ ^ splitmix64(k + 0x632be59bd9b4e019ULL)));
}

Matrix haar_unitary(std::size_t n, SeededSource& src) {
    if (n == 0) throw std::invalid_argument("haar_unitary: dimension must be >= 1");
    const auto m = static_cast<Eigen::Index>(n);
    Matrix z(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            z(i, j) = src.complex_normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(m, m);
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < m; ++j) {
        const cplx d = r(j, j);
        const double mag = std::abs(d);
        if (mag > 0.0) q.col(j) *= d / mag;
    }
    return q;
}

PureState haar_state(std::size_t n, SeededSource& src, Role role) {
    if (n == 0) throw std::invalid_argument("haar_state: dimension must be >= 1");
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = src.complex_normal();
    return PureState(SpaceLayout::single(n, role), std::move(v));
}

PureState bloch_state(double theta, double phi) {
    Vector v(2);
    v(0) = std::cos(theta / 2.0);
    v(1) = std::polar(std::sin(theta / 2.0), phi);
    return PureState(SpaceLayout::single(2, Role::qudit), std::move(v));
}

PureState bloch_state(SeededSource& src) {
    const double cos_theta = 2.0 * src.uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * src.uniform();
    return bloch_state(std::acos(cos_theta), phi);
}

double haar_fourth_moment(std::size_t D, const MomentIndices& x) {
    if (D < 2) throw std::invalid_argument("haar_fourth_moment: D must be >= 2");
    for (auto v : {x.i1, x.j1, x.k1, x.l1, x.i2, x.j2, x.k2, x.l2}) {
        if (v >= D) throw std::out_of_range("haar_fourth_moment: index out of range");
    }
    auto delta = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
    const double dd = static_cast<double>(D);
    const double direct = delta(x.i1, x.k1) * delta(x.i2, x.k2);
    const double crossed = delta(x.i1, x.k2) * delta(x.i2, x.k1);
    const double j_direct = delta(x.j1, x.l1) * delta(x.j2, x.l2);
    const double j_crossed = delta(x.j1, x.l2) * delta(x.j2, x.l1);
    return (direct * j_direct + crossed * j_crossed) / (dd * dd - 1.0) -
           (direct * j_crossed + crossed * j_direct) / ((dd * dd - 1.0) * dd);
}

double FourthMomentCheck::sigmas() const {
    const double dev = std::abs(mean - cplx(formula, 0.0));
    if (stderr_ > 0.0) return dev / stderr_;
    return dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

FourthMomentCheck verify_fourth_moment(std::size_t D, const MomentIndices& x,
                                       std::size_t samples, SeededSource& src) {
    const double formula = haar_fourth_moment(D, x);  // validates indices
    if (samples < 2) throw std::invalid_argument("verify_fourth_moment: need >= 2 samples");
    cplx sum = 0.0;
    double sum_sq = 0.0;
    auto at = [](const Matrix& u, std::size_t r, std::size_t c) {
        return u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    };
    for (std::size_t s = 0; s < samples; ++s) {
        const Matrix u = haar_unitary(D, src);
        const cplx val = at(u, x.i1, x.j1) * std::conj(at(u, x.k1, x.l1)) * at(u, x.i2, x.j2) *
                         std::conj(at(u, x.k2, x.l2));
        sum += val;
        sum_sq += std::norm(val);
    }
    const auto n = static_cast<double>(samples);
    const cplx mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * std::norm(mean)) / (n - 1.0));
    return {mean, formula, std::sqrt(var / n), samples};
}

}  // namespace rewindlab
