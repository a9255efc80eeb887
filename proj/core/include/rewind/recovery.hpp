// Scramble -> eavesdrop -> rewind protocol.
//
// The qudit (dimension d) and bath (dimension D_B) are scrambled by U_s, the
// intruder couples an ancilla in |0> through V, and U_s^{-1} is applied. The
// recovery ratio is r = (Tr[rho_i rho_f] - 1/d) / (1 - 1/d); negative values
// are reported as computed.
//
// Layout used throughout: qudit, bath, ancilla (ancilla last).
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rewind/eavesdrop.hpp"
#include "rewind/hilbert.hpp"
#include "rewind/random.hpp"
#include "rewind/stats.hpp"

namespace rewindlab {

enum class ScramblerKind { haar_full, haar_qudit_only, supplied };

std::string to_string(ScramblerKind kind);

struct RecoveryRecord {
    std::size_t d = 0;
    std::size_t ancilla_dim = 0;
    std::size_t bath_dim = 0;
    ScramblerKind scrambler = ScramblerKind::supplied;
    std::string gate;
    std::size_t sample_index = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    double overlap = 0.0;
    double ratio = 0.0;
    double wall_seconds = 0.0;

    nlohmann::json to_json() const;
};

/// (overlap - 1/d) / (1 - 1/d)
double recovery_ratio(double overlap, std::size_t d);

using BathState = std::variant<PureState, MixedState>;

/// How a mixed bath is reduced to pure-bath runs. Up to `exact_threshold`
/// the bath is eigendecomposed and the runs are combined with the
/// eigenvalues as weights; above it `samples` vectors sqrt(D rho_B)|chi>
/// with Haar |chi> are averaged (unbiased since the overlap is linear in
/// rho_B).
struct MixedBathPolicy {
    std::size_t exact_threshold = 64;
    std::size_t samples = 256;
    std::uint64_t seed = 0x6261746855ULL;
};

/// rho_f = Tr_{bath, ancilla}[W (rho_i (x) rho_B (x) |0><0|) W^dagger] with
/// W = (U_s^dagger (x) I_A) V (U_s (x) I_A).
MixedState final_qudit_state(const PureState& psi, const BathState& bath, const Matrix& scrambler,
                             const EavesdropGate& gate, const MixedBathPolicy& policy = {});

RecoveryRecord run_protocol(const PureState& psi, const BathState& bath, const Matrix& scrambler,
                            const EavesdropGate& gate, const MixedBathPolicy& policy = {});

/// Tr[rho_i V(t) (rho_i (x) rho_B) V(t)^dagger] with V(t) = U_s^{-1} V U_s,
/// built as dense matrices on the whole qudit (x) bath (x) ancilla space.
/// Throws CapacityError above kMaxDensitySide.
double otoc_overlap(const PureState& psi, const BathState& bath, const Matrix& scrambler,
                    const EavesdropGate& gate);

struct PredictedRatios {
    double quantum = 0.0;    ///< f / d^2
    double classical = 0.0;  ///< (f - 1) / (d^2 - 1)
};

PredictedRatios predicted_ratios(const EavesdropGate& gate);

struct RecoveryMc {
    McEstimate ratio;
    std::vector<RecoveryRecord> records;  ///< ordered by sample index
};

/// Haar U_s on U(d * D_B); each sample also draws a Haar qudit state and a
/// Haar pure bath state. Sample k uses src.substream(k), so results do not
/// depend on `threads`.
RecoveryMc haar_recovery_mc(std::size_t bath_dim, const EavesdropGate& gate, std::size_t samples,
                            const SeededSource& src, unsigned threads = 1);

/// Scrambler u in U(d) acting on the qudit alone (bath dimension 1).
RecoveryMc classical_recovery_mc(const EavesdropGate& gate, std::size_t samples,
                                 const SeededSource& src, unsigned threads = 1);

/// One JSON object per line.
void write_records_jsonl(std::ostream& os, const std::vector<RecoveryRecord>& records);
/// sample_index,overlap,r,seed,stream
void write_records_csv(std::ostream& os, const std::vector<RecoveryRecord>& records);

}  // namespace rewindlab
