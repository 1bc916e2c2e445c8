// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spacor/beampattern.hpp"
#include "spacor/config.hpp"
#include "spacor/radar.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spacor {

enum class ExperimentKind { Beampattern, Resolve, Hitrate, Ber, Mi };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment(std::string_view name);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Beampattern;
    SystemConfig config;
    /// SNR (dB) for resolve/ber/mi, SCR (dB) for hitrate; ignored by
    /// beampattern. Empty means the kind's default sweep.
    std::vector<double> sweep;
    /// Monte Carlo trials per sweep point (symbols for ber). 0 means the
    /// kind's default.
    std::uint64_t trials = 0;
    std::uint64_t seed = 1;
    /// Radar SNR for hitrate and the beam-pattern grid sizes.
    double radar_snr_db = 0.0;
    std::size_t grid_tau_points = 101;
    std::size_t grid_f_points = 101;
    /// Extra delay cells on each side of the scene in the recovery grid.
    int grid_margin_cells = 5;
    /// Scene for resolve; the two-target scene when unset.
    std::optional<TargetScene> scene;
};

std::vector<double> default_sweep(ExperimentKind kind);
std::uint64_t default_trials(ExperimentKind kind);

struct ResultRow {
    double sweep = 0.0;
    std::string scheme; // scheme for radar kinds, link label for comm kinds
    std::string metric;
    double value = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    int rate_bits = 0; // comm kinds only
};

/// Rows ordered by sweep value, then scheme.
struct ResultTable {
    ExperimentKind kind = ExperimentKind::Beampattern;
    std::string sweep_name;
    std::vector<ResultRow> rows;
};

/// Radar kinds: `<sweep>,scheme,metric,value,trials,seed`.
/// Comm kinds: `snr_db,mode,rate_bits,ber|mi_bits,n_symbols,seed`.
void write_csv(std::ostream& out, const ResultTable& table);

/// Validated configuration for one scheme: Full uses all M elements for
/// radar, every other scheme keeps the base split.
CheckedConfig scheme_config(const SystemConfig& base, SchemeId scheme);

/// Scenes used when none is given: two equal targets in one delay cell at
/// +-3 pi / 8, and three such pairs at different delays.
TargetScene two_target_scene(const CheckedConfig& cfg);
TargetScene six_target_scene(const CheckedConfig& cfg);

struct BeampatternResult {
    ResultTable table;
    /// Normalized surfaces: Full, SpaCoR realization, Fix1, Fix2
    /// realization, SpaCoR Monte Carlo mean, SpaCoR closed-form mean.
    std::vector<std::pair<std::string, BeamPatternSurface>> surfaces;
};

struct ResolveResult {
    ResultTable table;
    /// First trial of the first sweep point per scheme.
    std::vector<std::pair<std::string, RecoveredScene>> examples;
};

BeampatternResult run_beampattern(const ExperimentSpec& spec);
ResolveResult run_resolve(const ExperimentSpec& spec);
ResultTable run_hitrate(const ExperimentSpec& spec);
ResultTable run_ber(const ExperimentSpec& spec);
ResultTable run_mi(const ExperimentSpec& spec);

/// Hit statistics of one scheme at one operating point, shared by
/// run_resolve and run_hitrate.
struct HitStats {
    std::uint64_t trials = 0;
    std::uint64_t all_hit = 0;     // trials where every scored target was hit
    std::uint64_t target_hits = 0; // sum of per-target hits
};

/// Runs `trials` seeded trials: random allocation, echo with noise sigma,
/// optional clutter around the first target, OMP with one atom per
/// scatterer, hit test on the original targets. Trial t uses stream
/// derive_seed(seed, t).
HitStats run_hit_trials(const TargetScene& scene, SchemeId scheme, const SystemConfig& base, double noise_sigma,
                        std::optional<double> scr_db, std::uint64_t trials, std::uint64_t seed,
                        int margin_cells, RecoveredScene* first = nullptr);

} // namespace spacor
