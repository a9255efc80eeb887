#include "rewind/rotor.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>

#include "rewind/csv.hpp"
#include "rewind/recovery.hpp"

namespace rewindlab {

namespace {

constexpr double kBathTailLimit = 1e-12;
constexpr double kCrossTol = 1e-9;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(double x) {
    std::size_t n = 1;
    while (static_cast<double>(n) < x) n <<= 1;
    return n;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

const char* to_cstr(KickOrder o) {
    return o == KickOrder::kick_then_free ? "kick-then-free" : "free-then-kick";
}

const char* to_cstr(EdgePolicy p) { return p == EdgePolicy::abort ? "abort" : "record"; }

/// Applies the 2x2 matrix m to the spinor components.
void apply_qubit_op(const Matrix& m, SpinorWave& w) {
    auto up = w.component(0);
    auto down = w.component(1);
    const cplx a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    for (std::size_t k = 0; k < up.size(); ++k) {
        const cplx u = up[k];
        const cplx v = down[k];
        up[k] = a * u + b * v;
        down[k] = c * u + d * v;
    }
}

/// sum_n x_s(n) conj(y_s'(n)) for the four (s, s') pairs: the bath-traced
/// |x><y| as a 2 x 2 matrix.
Matrix traced_outer(const SpinorWave& x, const SpinorWave& y) {
    Matrix out(2, 2);
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            const auto xs = x.component(s);
            const auto ys = y.component(sp);
            cplx acc = 0.0;
            for (std::size_t k = 0; k < xs.size(); ++k) acc += xs[k] * std::conj(ys[k]);
            out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(sp)) = acc;
        }
    }
    return out;
}

class LeakTracker {
public:
    explicit LeakTracker(const RotorConfig& c) : policy_(c.edge_policy), threshold_(c.edge_threshold) {}

    void observe(const SpinorWave& w, std::size_t step) {
        const double leak = w.edge_population();
        max_ = std::max(max_, leak);
        if (policy_ == EdgePolicy::abort && leak > threshold_) {
            throw EdgeLeakError(step, leak, threshold_);
        }
    }
    double max() const noexcept { return max_; }

private:
    EdgePolicy policy_;
    double threshold_;
    double max_ = 0.0;
};

double qubit_entropy(const SpinorWave& w) {
    const Matrix rho = w.qubit_state() / w.norm_squared();
    const RealVector ev = density_eigenvalues(rho);
    return entropy_from_probabilities(std::span<const double>(ev.data(), ev.size()));
}

SpinorWave rewind_branch(const FloquetPropagator& prop, const SpinorWave& forward,
                         const Matrix& kraus_op, std::size_t t, LeakTracker& leak) {
    SpinorWave b = forward;
    apply_qubit_op(kraus_op, b);
    for (std::size_t s = 0; s < t; ++s) {
        prop.step(b, Direction::backward);
        leak.observe(b, t);
    }
    return b;
}

}  // namespace

EdgeLeakError::EdgeLeakError(std::size_t step, double leak, double threshold)
    : std::runtime_error("rotor: edge population " + std::to_string(leak) + " exceeds " +
                         std::to_string(threshold) + " at kick " + std::to_string(step) +
                         "; enlarge the momentum grid"),
      step_(step),
      leak_(leak) {}

// ---------------------------------------------------------------------------

std::size_t RotorConfig::default_grid() const {
    const double p_max = 8.0 + 8.0 * K * std::sqrt(static_cast<double>(kicks) / 2.0);
    return std::max<std::size_t>(std::size_t{1} << 12, next_power_of_two(2.0 * p_max / hbar));
}

void RotorConfig::validate() const {
    if (!(hbar > 0.0)) throw std::invalid_argument("RotorConfig: hbar must be positive");
    const std::size_t n = resolved_grid();
    if (!is_power_of_two(n) || n < 8) {
        throw std::invalid_argument("RotorConfig: grid size must be a power of two >= 8");
    }
    if (!(edge_threshold > 0.0)) {
        throw std::invalid_argument("RotorConfig: edge threshold must be positive");
    }
}

nlohmann::json RotorConfig::to_json() const {
    return {{"hbar", hbar},
            {"K", K},
            {"J", J},
            {"h", h},
            {"N", resolved_grid()},
            {"kicks", kicks},
            {"kick_ordering", to_cstr(order)},
            {"edge_policy", to_cstr(edge_policy)},
            {"edge_threshold", edge_threshold}};
}

RotorConfig RotorConfig::from_json(const nlohmann::json& j) {
    RotorConfig c;
    c.hbar = j.value("hbar", c.hbar);
    c.K = j.value("K", c.K);
    c.J = j.value("J", c.J);
    c.h = j.value("h", c.h);
    c.grid = j.value("N", c.grid);
    c.kicks = j.value("kicks", c.kicks);
    c.edge_threshold = j.value("edge_threshold", c.edge_threshold);
    const auto order = j.value("kick_ordering", std::string(to_cstr(c.order)));
    if (order == "kick-then-free") {
        c.order = KickOrder::kick_then_free;
    } else if (order == "free-then-kick") {
        c.order = KickOrder::free_then_kick;
    } else {
        throw std::invalid_argument("RotorConfig: unknown kick_ordering '" + order + "'");
    }
    const auto policy = j.value("edge_policy", std::string(to_cstr(c.edge_policy)));
    if (policy == "abort") {
        c.edge_policy = EdgePolicy::abort;
    } else if (policy == "record") {
        c.edge_policy = EdgePolicy::record;
    } else {
        throw std::invalid_argument("RotorConfig: unknown edge_policy '" + policy + "'");
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------

SpinorWave::SpinorWave(std::size_t grid) : grid_(grid), data_(2 * grid, cplx(0.0)) {}

std::span<cplx> SpinorWave::component(std::size_t s) {
    return std::span<cplx>(data_).subspan(s * grid_, grid_);
}

std::span<const cplx> SpinorWave::component(std::size_t s) const {
    return std::span<const cplx>(data_).subspan(s * grid_, grid_);
}

long SpinorWave::momentum_index(std::size_t k) const noexcept {
    const auto n = static_cast<long>(grid_);
    const auto kk = static_cast<long>(k);
    return kk < n / 2 ? kk : kk - n;
}

double SpinorWave::norm_squared() const {
    double acc = 0.0;
    for (const auto& x : data_) acc += std::norm(x);
    return acc;
}

double SpinorWave::edge_population() const {
    const double cut = 0.98 * static_cast<double>(grid_) / 2.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < grid_; ++k) {
        if (std::abs(static_cast<double>(momentum_index(k))) > cut) {
            acc += std::norm(data_[k]) + std::norm(data_[grid_ + k]);
        }
    }
    return acc;
}

Matrix SpinorWave::qubit_state() const { return traced_outer(*this, *this); }

cplx SpinorWave::inner(const SpinorWave& other) const {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k) acc += std::conj(data_[k]) * other.data_[k];
    return acc;
}

std::vector<cplx> initial_bath(const RotorConfig& config) {
    config.validate();
    const std::size_t n = config.resolved_grid();
    std::vector<cplx> phi(n);
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const long m = k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
        const double p = config.hbar * static_cast<double>(m);
        const double a = std::exp(-p * p / 4.0);
        phi[k] = a;
        norm += a * a;
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& x : phi) x *= scale;
    if (std::norm(phi[n / 2]) >= kBathTailLimit) {
        throw std::invalid_argument("initial_bath: grid too small, edge probability " +
                                    std::to_string(std::norm(phi[n / 2])) + " >= 1e-12");
    }
    return phi;
}

SpinorWave product_state(const RotorConfig& config, const Vector& qubit) {
    if (qubit.size() != 2) throw DimensionError("product_state: qubit state must have 2 entries");
    const auto phi = initial_bath(config);
    const double norm = qubit.norm();
    SpinorWave w(phi.size());
    for (std::size_t s = 0; s < 2; ++s) {
        auto comp = w.component(s);
        const cplx amp = qubit(static_cast<Eigen::Index>(s)) / norm;
        for (std::size_t k = 0; k < phi.size(); ++k) comp[k] = amp * phi[k];
    }
    return w;
}

// ---------------------------------------------------------------------------

struct FloquetPropagator::Plans {
    fftw_plan to_position = nullptr;  // FFTW_BACKWARD: c_n -> psi(q_j)
    fftw_plan to_momentum = nullptr;  // FFTW_FORWARD, scaled by 1/N afterwards

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (to_position) fftw_destroy_plan(to_position);
        if (to_momentum) fftw_destroy_plan(to_momentum);
    }
};

FloquetPropagator::FloquetPropagator(const RotorConfig& config)
    : config_(config), grid_(config.resolved_grid()), plans_(std::make_unique<Plans>()) {
    config_.validate();
    free_phase_.resize(grid_);
    kick_angle_.resize(grid_);
    spin_angle_.resize(grid_);
    for (std::size_t k = 0; k < grid_; ++k) {
        const long m = k < grid_ / 2 ? static_cast<long>(k)
                                     : static_cast<long>(k) - static_cast<long>(grid_);
        const double n = static_cast<double>(m);
        free_phase_[k] = std::polar(1.0, -config_.hbar * n * n / 2.0);
        const double q = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid_);
        kick_angle_[k] = config_.K / config_.hbar * std::sin(q);
        spin_angle_[k] = config_.J / 2.0 * std::sin(q);
    }

    std::vector<cplx> scratch(2 * grid_);
    const int n = static_cast<int>(grid_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    plans_->to_position = fftw_plan_many_dft(1, &n, 2, as_fftw(scratch.data()), nullptr, 1, n,
                                             as_fftw(scratch.data()), nullptr, 1, n,
                                             FFTW_BACKWARD, flags);
    plans_->to_momentum = fftw_plan_many_dft(1, &n, 2, as_fftw(scratch.data()), nullptr, 1, n,
                                             as_fftw(scratch.data()), nullptr, 1, n,
                                             FFTW_FORWARD, flags);
    if (!plans_->to_position || !plans_->to_momentum) {
        throw std::runtime_error("FloquetPropagator: FFTW planning failed");
    }
}

FloquetPropagator::~FloquetPropagator() = default;

void FloquetPropagator::free_part(SpinorWave& wave, Direction dir) const {
    const double sign = dir == Direction::forward ? 1.0 : -1.0;
    const cplx zeeman_up = std::polar(1.0, -sign * config_.h / 2.0);
    const cplx zeeman_down = std::conj(zeeman_up);
    auto up = wave.component(0);
    auto down = wave.component(1);
    for (std::size_t k = 0; k < grid_; ++k) {
        const cplx f = dir == Direction::forward ? free_phase_[k] : std::conj(free_phase_[k]);
        up[k] *= f * zeeman_up;
        down[k] *= f * zeeman_down;
    }
}

void FloquetPropagator::kick_part(SpinorWave& wave, Direction dir) const {
    cplx* data = wave.data().data();
    fftw_execute_dft(plans_->to_position, as_fftw(data), as_fftw(data));

    // exp(-i s [kappa + alpha sigma_x]) = e^{-i s kappa} (cos alpha - i s sin alpha sigma_x)
    const double sign = dir == Direction::forward ? 1.0 : -1.0;
    const double scale = 1.0 / static_cast<double>(grid_);
    auto up = wave.component(0);
    auto down = wave.component(1);
    for (std::size_t j = 0; j < grid_; ++j) {
        const cplx phase = std::polar(scale, -sign * kick_angle_[j]);
        const double c = std::cos(spin_angle_[j]);
        const cplx s(0.0, -sign * std::sin(spin_angle_[j]));
        const cplx u = up[j];
        const cplx v = down[j];
        up[j] = phase * (c * u + s * v);
        down[j] = phase * (s * u + c * v);
    }

    fftw_execute_dft(plans_->to_momentum, as_fftw(data), as_fftw(data));
}

void FloquetPropagator::step(SpinorWave& wave, Direction dir) const {
    if (wave.grid() != grid_) throw DimensionError("FloquetPropagator: grid size mismatch");
    const bool kick_first = (config_.order == KickOrder::kick_then_free) == (dir == Direction::forward);
    if (kick_first) {
        kick_part(wave, dir);
        free_part(wave, dir);
    } else {
        free_part(wave, dir);
        kick_part(wave, dir);
    }
}

SpinorWave floquet_step(const SpinorWave& wave, const RotorConfig& config, Direction dir) {
    RotorConfig c = config;
    c.grid = wave.grid();
    const FloquetPropagator prop(c);
    SpinorWave out = wave;
    prop.step(out, dir);
    LeakTracker leak(c);
    leak.observe(out, 1);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<RotorPoint> rotor_recovery_curve(const RotorConfig& config, const EavesdropGate& gate,
                                             const Vector& qubit) {
    if (gate.d() != 2) throw DimensionError("rotor_recovery_curve: gate must act on a qubit");
    const FloquetPropagator prop(config);
    const KrausSet ks = kraus(gate);
    const Vector q = qubit / qubit.norm();
    LeakTracker leak(config);

    SpinorWave w = product_state(config, q);
    std::vector<RotorPoint> curve;
    curve.reserve(config.kicks);
    for (std::size_t t = 1; t <= config.kicks; ++t) {
        prop.step(w, Direction::forward);
        leak.observe(w, t);

        Matrix rho = Matrix::Zero(2, 2);
        for (const auto& m : ks.ops) {
            const SpinorWave b = rewind_branch(prop, w, m, t, leak);
            rho += traced_outer(b, b);
        }
        RotorPoint pt;
        pt.t = t;
        const double ov = q.dot(rho * q).real();
        pt.r = recovery_ratio(ov, 2);
        pt.norm_drift = std::abs(rho.trace().real() - 1.0);
        pt.edge_leak = leak.max();
        pt.entropy_qubit = qubit_entropy(w);
        curve.push_back(pt);
    }
    return curve;
}

std::vector<RotorPoint> rotor_recovery_curve_bloch_average(const RotorConfig& config,
                                                           const EavesdropGate& gate) {
    if (gate.d() != 2) throw DimensionError("rotor_recovery_curve: gate must act on a qubit");
    const FloquetPropagator prop(config);
    const KrausSet ks = kraus(gate);
    LeakTracker leak(config);

    std::vector<SpinorWave> w;
    w.push_back(product_state(config, Vector::Unit(2, 0)));
    w.push_back(product_state(config, Vector::Unit(2, 1)));

    std::vector<RotorPoint> curve;
    curve.reserve(config.kicks);
    for (std::size_t t = 1; t <= config.kicks; ++t) {
        for (auto& x : w) {
            prop.step(x, Direction::forward);
            leak.observe(x, t);
        }
        // channel[s][s'] = Phi(|s><s'|)
        Matrix channel[2][2];
        for (auto& row : channel)
            for (auto& m : row) m = Matrix::Zero(2, 2);
        for (const auto& m : ks.ops) {
            const SpinorWave b0 = rewind_branch(prop, w[0], m, t, leak);
            const SpinorWave b1 = rewind_branch(prop, w[1], m, t, leak);
            const SpinorWave* b[2] = {&b0, &b1};
            for (std::size_t s = 0; s < 2; ++s)
                for (std::size_t sp = 0; sp < 2; ++sp) channel[s][sp] += traced_outer(*b[s], *b[sp]);
        }
        cplx acc = 0.0;
        for (std::size_t s = 0; s < 2; ++s) acc += channel[s][s].trace();
        for (Eigen::Index i = 0; i < 2; ++i)
            for (Eigen::Index j = 0; j < 2; ++j) acc += channel[j][i](j, i);
        const double mean_overlap = acc.real() / 6.0;

        RotorPoint pt;
        pt.t = t;
        pt.r = recovery_ratio(mean_overlap, 2);
        pt.norm_drift = std::max(std::abs(channel[0][0].trace().real() - 1.0),
                                 std::abs(channel[1][1].trace().real() - 1.0));
        pt.edge_leak = leak.max();
        pt.entropy_qubit = qubit_entropy(w[0]);
        curve.push_back(pt);
    }
    return curve;
}

std::optional<std::size_t> crossover_time(std::span<const RotorPoint> curve, double threshold,
                                          std::size_t persist) {
    if (persist == 0) persist = 1;
    std::size_t run = 0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].r > threshold + kCrossTol) {
            if (++run == persist) return curve[i + 1 - persist].t;
        } else {
            run = 0;
        }
    }
    return std::nullopt;
}

std::vector<EhrenfestPoint> ehrenfest_scan(std::span<const double> hbars,
                                           const RotorConfig& config_template,
                                           const EavesdropGate& gate) {
    for (std::size_t i = 0; i < hbars.size(); ++i) {
        const double e = std::log2(hbars[i]);
        if (!(hbars[i] > 0.0) || e != std::round(e)) {
            throw std::invalid_argument("ehrenfest_scan: hbar values must be powers of two");
        }
        if (i > 0 && !(hbars[i] < hbars[i - 1])) {
            throw std::invalid_argument("ehrenfest_scan: hbar values must be descending");
        }
    }
    const PredictedRatios pred = predicted_ratios(gate);
    const double midpoint = 0.5 * (pred.quantum + pred.classical);

    std::vector<EhrenfestPoint> out;
    for (double hb : hbars) {
        RotorConfig c = config_template;
        c.hbar = hb;
        if (config_template.grid == 0) c.grid = 0;
        EhrenfestPoint p;
        p.hbar = hb;
        p.curve = rotor_recovery_curve_bloch_average(c, gate);
        p.crossover = crossover_time(p.curve, midpoint);
        out.push_back(std::move(p));
    }
    return out;
}

void write_rotor_csv(std::ostream& os, std::span<const RotorPoint> curve) {
    csv::write_header(os, {"t", "r", "norm_drift", "edge_leak", "entropy_qubit"});
    for (const auto& p : curve) {
        csv::write_row(os, p.t, p.r, p.norm_drift, p.edge_leak, p.entropy_qubit);
    }
}

}  // namespace rewindlab
