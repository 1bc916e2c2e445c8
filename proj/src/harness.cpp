// SPDX-License-Identifier: Apache-2.0
#include "spacor/harness.hpp"

#include "spacor/allocation.hpp"
#include "spacor/comm.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace spacor {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<SchemeId, 4> kRadarSchemes{SchemeId::Full, SchemeId::SpaCoR, SchemeId::Fix2, SchemeId::Fix1};

std::string fmt(double v)
{
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return ec == std::errc{} ? std::string(buf.data(), ptr) : std::string("nan");
}

std::vector<double> steps(double lo, double hi, double step)
{
    std::vector<double> v;
    for (int i = 0; lo + i * step <= hi + 1e-9; ++i) {
        v.push_back(lo + i * step);
    }
    return v;
}

std::uint64_t trials_of(const ExperimentSpec& spec)
{
    return spec.trials == 0 ? default_trials(spec.kind) : spec.trials;
}

std::vector<double> sweep_of(const ExperimentSpec& spec)
{
    return spec.sweep.empty() ? default_sweep(spec.kind) : spec.sweep;
}

// Delay the default scenes sit at: 2 T_r, or the middle of the valid delay
// range when the receive window is shorter.
double scene_delay(const CheckedConfig& cfg)
{
    const double lo = cfg.params().pulse_width;
    const double hi = cfg.sample_time(cfg.receive_samples()) - lo;
    return std::min(2.0 * lo, 0.5 * (lo + hi));
}

DelayAngleGrid grid_for(const TargetScene& scene, const CheckedConfig& cfg, int margin)
{
    if (scene.targets.empty()) {
        throw std::invalid_argument("scene has no targets");
    }
    const auto [lo, hi] = std::minmax_element(scene.targets.begin(), scene.targets.end(),
                                              [](const Target& a, const Target& b) { return a.tau < b.tau; });
    auto g = DelayAngleGrid::centered(lo->tau, margin, cfg);
    const long span = std::lround((hi->tau - lo->tau) / g.delay_step());
    g.P += static_cast<int>(span);
    g.tau_max = g.tau_min + g.P * g.delay_step();
    return g;
}

// First local minimum of |surface| along f_theta > 0 on the row closest to
// tau_d = 0.
double first_null(const BeamPatternSurface& s)
{
    const auto& g = s.grid;
    std::size_t row = 0;
    for (std::size_t i = 1; i < g.tau_d.size(); ++i) {
        if (std::abs(g.tau_d[i]) < std::abs(g.tau_d[row])) {
            row = i;
        }
    }
    for (std::size_t j = 1; j + 1 < g.f_theta.size(); ++j) {
        if (g.f_theta[j] <= 0.0) {
            continue;
        }
        const double v = s.magnitude(row, j);
        if (v <= s.magnitude(row, j - 1) && v <= s.magnitude(row, j + 1)) {
            return g.f_theta[j];
        }
    }
    return g.f_theta.back();
}

double peak_magnitude(const BeamPatternSurface& s)
{
    double p = 0.0;
    for (const auto& v : s.values) {
        p = std::max(p, std::abs(v));
    }
    return p;
}

// max | |a| - |b| | / max |b|
double max_peak_error(const BeamPatternSurface& a, const BeamPatternSurface& b)
{
    double err = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        err = std::max(err, std::abs(std::abs(a.values[i]) - std::abs(b.values[i])));
    }
    return err / peak_magnitude(b);
}

} // namespace

std::string_view to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::Beampattern:
        return "beampattern";
    case ExperimentKind::Resolve:
        return "resolve";
    case ExperimentKind::Hitrate:
        return "hitrate";
    case ExperimentKind::Ber:
        return "ber";
    case ExperimentKind::Mi:
        return "mi";
    }
    return "?";
}

ExperimentKind parse_experiment(std::string_view name)
{
    for (auto k : {ExperimentKind::Beampattern, ExperimentKind::Resolve, ExperimentKind::Hitrate,
                   ExperimentKind::Ber, ExperimentKind::Mi}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

std::vector<double> default_sweep(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::Beampattern:
        return {0.0};
    case ExperimentKind::Resolve:
        return {0.0};
    case ExperimentKind::Hitrate:
        return steps(-10.0, 20.0, 3.0);
    case ExperimentKind::Ber:
    case ExperimentKind::Mi:
        return steps(-10.0, 30.0, 2.0);
    }
    return {};
}

std::uint64_t default_trials(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::Beampattern:
        return 10000;
    case ExperimentKind::Resolve:
        return 100;
    case ExperimentKind::Hitrate:
        return 4000;
    case ExperimentKind::Ber:
        return 100000;
    case ExperimentKind::Mi:
        return 10000;
    }
    return 1;
}

void write_csv(std::ostream& out, const ResultTable& table)
{
    const bool comm = table.kind == ExperimentKind::Ber || table.kind == ExperimentKind::Mi;
    if (comm) {
        out << "snr_db,mode,rate_bits," << (table.kind == ExperimentKind::Ber ? "ber" : "mi_bits")
            << ",n_symbols,seed\n";
        for (const auto& r : table.rows) {
            out << fmt(r.sweep) << ',' << r.scheme << ',' << r.rate_bits << ',' << fmt(r.value) << ','
                << r.trials << ',' << r.seed << '\n';
        }
        return;
    }
    out << table.sweep_name << ",scheme,metric,value,trials,seed\n";
    for (const auto& r : table.rows) {
        out << fmt(r.sweep) << ',' << r.scheme << ',' << r.metric << ',' << fmt(r.value) << ',' << r.trials
            << ',' << r.seed << '\n';
    }
}

CheckedConfig scheme_config(const SystemConfig& base, SchemeId scheme)
{
    SystemConfig c = base;
    c.scheme = scheme;
    if (scheme == SchemeId::Full) {
        c.num_radar_tx = c.num_elements;
        c.num_comm_tx = 0;
    }
    return validate_config(c);
}

TargetScene two_target_scene(const CheckedConfig& cfg)
{
    const double tau = scene_delay(cfg);
    return {{{tau, -3.0 * kPi / 8.0, {1.0, 0.0}}, {tau, 3.0 * kPi / 8.0, {1.0, 0.0}}}};
}

TargetScene six_target_scene(const CheckedConfig& cfg)
{
    const double tau = scene_delay(cfg);
    const double step = 15.0 / (5.0 * cfg.params().bandwidth);
    TargetScene s;
    const std::array<std::pair<double, double>, 3> pairs{
        {{-3.0 / 8.0, 3.0 / 8.0}, {-7.0 / 8.0, -1.0 / 8.0}, {1.0 / 8.0, 7.0 / 8.0}}};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double t = tau + static_cast<double>(i) * step;
        s.targets.push_back({t, pairs[i].first * kPi, {1.0, 0.0}});
        s.targets.push_back({t, pairs[i].second * kPi, {1.0, 0.0}});
    }
    return s;
}

BeampatternResult run_beampattern(const ExperimentSpec& spec)
{
    const auto trials = trials_of(spec);
    const auto base = validate_config(spec.config);
    const double tr = 1.0 / base.params().bandwidth;
    const auto grid = BeamGrid::uniform(-3.0 * tr, 3.0 * tr, spec.grid_tau_points, -kPi, kPi, spec.grid_f_points);
    const auto table = slot_correlation_table(base, grid, default_reference_delay(base));
    const std::size_t nf = grid.f_theta.size();
    const auto K = static_cast<std::size_t>(base.K());

    BeampatternResult res;
    res.table.kind = ExperimentKind::Beampattern;
    res.table.sweep_name = "grid";
    auto row = [&](SchemeId s, std::string metric, double value, std::uint64_t n) {
        res.table.rows.push_back({0.0, std::string(to_string(s)), std::move(metric), value, n, spec.seed, 0});
    };

    for (std::size_t si = 0; si < kRadarSchemes.size(); ++si) {
        const SchemeId scheme = kRadarSchemes[si];
        const auto cfg = scheme_config(spec.config, scheme);
        Rng rng = make_rng(spec.seed, si);
        const auto realization = normalized(beampattern_instant(make_allocation(scheme, cfg, rng), table), cfg);
        row(scheme, "peak", peak_magnitude(realization), 1);
        row(scheme, "first_null_rad", first_null(realization), 1);
        res.surfaces.emplace_back(std::string(to_string(scheme)), realization);

        if (scheme != SchemeId::SpaCoR && scheme != SchemeId::Fix2) {
            continue;
        }
        // chi_T is linear in the transmit gains, so the Monte Carlo mean
        // only needs the mean gain per slot and direction.
        std::vector<cdouble> mean_gain(K * nf);
        for (std::uint64_t t = 0; t < trials; ++t) {
            Rng trng = make_rng(derive_seed(spec.seed, 100 + si), t);
            const auto alloc = make_allocation(scheme, cfg, trng);
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t j = 0; j < nf; ++j) {
                    mean_gain[k * nf + j] += transmit_gain(alloc.radar_set(static_cast<int>(k)), grid.f_theta[j]);
                }
            }
        }
        BeamPatternSurface mean = realization;
        mean.kind = SurfaceKind::Mean;
        for (std::size_t i = 0; i < grid.tau_d.size(); ++i) {
            for (std::size_t j = 0; j < nf; ++j) {
                cdouble acc{};
                for (std::size_t k = 0; k < K; ++k) {
                    acc += mean_gain[k * nf + j] * table.eta[i * K + k];
                }
                mean.value(i, j) = acc / static_cast<double>(trials);
            }
        }
        mean = normalized(mean, cfg);
        const auto closed = normalized(beampattern_expected_closed(cfg, grid), cfg);
        row(scheme, "mean_first_null_rad", first_null(mean), trials);
        row(scheme, "mean_max_error", max_peak_error(mean, closed), trials);
        if (scheme == SchemeId::SpaCoR) {
            res.surfaces.emplace_back("SpaCoR_mean", mean);
            res.surfaces.emplace_back("SpaCoR_mean_closed", closed);
        }
    }
    return res;
}

HitStats run_hit_trials(const TargetScene& scene, SchemeId scheme, const SystemConfig& base, double noise_sigma,
                        std::optional<double> scr_db, std::uint64_t trials, std::uint64_t seed,
                        int margin_cells, RecoveredScene* first)
{
    const auto cfg = scheme_config(base, scheme);
    for (const auto& t : scene.targets) {
        check_target(t, cfg);
    }
    const auto grid = grid_for(scene, cfg, margin_cells);
    grid.check(cfg);
    const auto window = ReceiveWindow::gate(grid, cfg);

    HitStats st;
    st.trials = trials;
    std::optional<SensingOperator> op;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, t);
        const auto alloc = make_allocation(scheme, cfg, rng);
        const TargetScene echo_scene = scr_db ? generate_clutter(scene, cfg, *scr_db, rng) : scene;
        if (op) {
            op->set_allocation(alloc);
        } else {
            op.emplace(grid, alloc, cfg, window);
        }
        const auto y = synthesize_echo(echo_scene, alloc, cfg, noise_sigma, rng, window);
        OmpOptions opts;
        opts.max_atoms = static_cast<int>(echo_scene.targets.size());
        const auto rec = omp_recover(y, *op, opts);
        if (t == 0 && first != nullptr) {
            *first = rec;
        }
        const auto hits = hit_test(scene, rec, grid);
        const auto n = static_cast<std::uint64_t>(std::count(hits.begin(), hits.end(), true));
        st.target_hits += n;
        st.all_hit += n == hits.size() ? 1 : 0;
    }
    return st;
}

ResolveResult run_resolve(const ExperimentSpec& spec)
{
    const auto trials = trials_of(spec);
    const auto sweep = sweep_of(spec);
    const auto base = validate_config(spec.config);
    const TargetScene scene = spec.scene ? *spec.scene : two_target_scene(base);
    if (scene.targets.empty()) {
        throw std::invalid_argument("resolve needs a scene with at least one target");
    }
    for (const auto& t : scene.targets) {
        check_target(t, base);
    }

    ResolveResult res;
    res.table.kind = ExperimentKind::Resolve;
    res.table.sweep_name = "snr_db";
    for (std::size_t pi = 0; pi < sweep.size(); ++pi) {
        const double sigma = noise_sigma_for_snr(base, sweep[pi]);
        for (std::size_t si = 0; si < kRadarSchemes.size(); ++si) {
            const SchemeId scheme = kRadarSchemes[si];
            RecoveredScene example;
            const auto st = run_hit_trials(scene, scheme, spec.config, sigma, std::nullopt, trials,
                                           derive_seed(derive_seed(spec.seed, pi), si), spec.grid_margin_cells,
                                           pi == 0 ? &example : nullptr);
            const std::string name(to_string(scheme));
            const double per_target = static_cast<double>(st.target_hits) /
                                      (static_cast<double>(trials) * static_cast<double>(scene.targets.size()));
            res.table.rows.push_back({sweep[pi], name, "all_hit_rate",
                                      static_cast<double>(st.all_hit) / static_cast<double>(trials), trials,
                                      spec.seed, 0});
            res.table.rows.push_back({sweep[pi], name, "target_hit_rate", per_target, trials, spec.seed, 0});
            if (pi == 0) {
                res.examples.emplace_back(name, std::move(example));
            }
        }
    }
    return res;
}

ResultTable run_hitrate(const ExperimentSpec& spec)
{
    const auto trials = trials_of(spec);
    const auto sweep = sweep_of(spec);
    const auto base = validate_config(spec.config);
    const double sigma = noise_sigma_for_snr(base, spec.radar_snr_db);
    const TargetScene scene{{{scene_delay(base), base.steer_spatial_frequency(), {1.0, 0.0}}}};

    ResultTable table;
    table.kind = ExperimentKind::Hitrate;
    table.sweep_name = "scr_db";
    for (std::size_t pi = 0; pi < sweep.size(); ++pi) {
        for (std::size_t si = 0; si < kRadarSchemes.size(); ++si) {
            const SchemeId scheme = kRadarSchemes[si];
            const auto st = run_hit_trials(scene, scheme, spec.config, sigma, sweep[pi], trials,
                                           derive_seed(derive_seed(spec.seed, pi), si), spec.grid_margin_cells);
            table.rows.push_back({sweep[pi], std::string(to_string(scheme)), "hit_rate",
                                  static_cast<double>(st.all_hit) / static_cast<double>(trials), trials, spec.seed,
                                  0});
        }
    }
    return table;
}

namespace {

std::vector<CommSetup> comm_setups(const SystemConfig& config)
{
    const auto cfg = validate_config(config);
    auto gsm = gsm_setup(cfg);
    std::vector<CommSetup> out;
    for (int order : {gsm.order, 2 * gsm.order}) {
        gsm.order = order;
        out.push_back(gsm);
        out.push_back(matched_smx(gsm));
    }
    return out;
}

ResultTable run_comm(const ExperimentSpec& spec, bool ber)
{
    const auto trials = trials_of(spec);
    const auto sweep = sweep_of(spec);
    const auto setups = comm_setups(spec.config);

    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < setups.size(); ++i) {
        const auto seed = derive_seed(spec.seed, i);
        values.push_back(ber ? ber_experiment(setups[i], sweep, trials, seed)
                             : mi_estimate(setups[i], sweep, trials, seed));
    }
    ResultTable table;
    table.kind = ber ? ExperimentKind::Ber : ExperimentKind::Mi;
    table.sweep_name = "snr_db";
    for (std::size_t p = 0; p < sweep.size(); ++p) {
        for (std::size_t i = 0; i < setups.size(); ++i) {
            table.rows.push_back({sweep[p], setups[i].label(), ber ? "ber" : "mi_bits", values[i][p], trials,
                                  spec.seed, setups[i].rate_bits()});
        }
    }
    return table;
}

} // namespace

ResultTable run_ber(const ExperimentSpec& spec)
{
    return run_comm(spec, true);
}

ResultTable run_mi(const ExperimentSpec& spec)
{
    return run_comm(spec, false);
}

} // namespace spacor
