// SPDX-License-Identifier: Apache-2.0
#include "spacor/beampattern.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace spacor {

namespace {

constexpr double kPi = std::numbers::pi;

BeamPatternSurface make_surface(const BeamGrid& grid, SurfaceKind kind)
{
    grid.check();
    BeamPatternSurface s;
    s.grid = grid;
    s.kind = kind;
    s.values.assign(grid.tau_d.size() * grid.f_theta.size(), {});
    return s;
}

// Echo at delay tau must be fully inside the receive window [T_r, T_r + N_rec T_s).
void check_echo_delay(const CheckedConfig& cfg, double tau, const char* what)
{
    const double lo = cfg.params().pulse_width;
    const double hi = cfg.sample_time(cfg.receive_samples()) - cfg.params().pulse_width;
    const double tol = 1e-9 * cfg.sample_period();
    if (tau < lo - tol || tau > hi + tol) {
        throw std::invalid_argument(std::string(what) + " delay outside the receive window");
    }
}

} // namespace

BeamGrid BeamGrid::uniform(double tau_lo, double tau_hi, std::size_t n_tau, double f_lo, double f_hi,
                           std::size_t n_f)
{
    auto axis = [](double lo, double hi, std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        return v;
    };
    BeamGrid g{axis(tau_lo, tau_hi, n_tau), axis(f_lo, f_hi, n_f)};
    g.check();
    return g;
}

void BeamGrid::check() const
{
    auto increasing = [](const std::vector<double>& v) {
        return !v.empty() && std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
    };
    if (!increasing(tau_d) || !increasing(f_theta)) {
        throw std::invalid_argument("beam grid axes must be nonempty and strictly increasing");
    }
}

double sinc(double x) noexcept
{
    if (std::abs(x) < 1e-12) {
        return 1.0;
    }
    return std::sin(kPi * x) / (kPi * x);
}

double dirichlet(double f, int n) noexcept
{
    const double den = std::sin(f / 2.0);
    if (std::abs(den) < 1e-9) {
        return static_cast<double>(n);
    }
    return std::sin(n * f / 2.0) / den;
}

cdouble transmit_gain(std::span<const int> radar_indices, double f_theta) noexcept
{
    cdouble acc{};
    for (int m : radar_indices) {
        acc += std::polar(1.0, m * f_theta);
    }
    return acc;
}

double default_reference_delay(const CheckedConfig& cfg)
{
    return 2.0 * cfg.params().pulse_width;
}

std::vector<cdouble> slot_correlations(const CheckedConfig& cfg, double tau_d, double tau_ref)
{
    const auto& p = cfg.params();
    const auto chirp = ChirpParams::from(cfg);
    std::vector<cdouble> eta(static_cast<std::size_t>(cfg.K()));

    // Only samples where the reference echo is nonzero contribute.
    const double fs = p.sample_rate;
    const long first = std::max<long>(0, static_cast<long>(std::floor((tau_ref - p.pulse_width) * fs)) - 1);
    const long last = std::min<long>(cfg.receive_samples() - 1,
                                     static_cast<long>(std::ceil((tau_ref) * fs)) + 1);
    for (long n = first; n <= last; ++n) {
        const double t = cfg.sample_time(n);
        const cdouble ref = chirp_sample(chirp, t - tau_ref);
        if (ref == cdouble{}) {
            continue;
        }
        const double shifted = t - tau_d - tau_ref;
        const int k = slot_of(shifted, p.symbol_duration, cfg.K());
        if (k < 0) {
            continue;
        }
        eta[static_cast<std::size_t>(k)] += chirp_sample(chirp, shifted) * std::conj(ref);
    }
    return eta;
}

SlotCorrelationTable slot_correlation_table(const CheckedConfig& cfg, const BeamGrid& grid, double tau_ref)
{
    grid.check();
    check_echo_delay(cfg, tau_ref, "reference");
    check_echo_delay(cfg, tau_ref + grid.tau_d.front(), "grid");
    check_echo_delay(cfg, tau_ref + grid.tau_d.back(), "grid");
    SlotCorrelationTable t;
    t.grid = grid;
    t.num_slots = cfg.K();
    t.eta.reserve(grid.tau_d.size() * static_cast<std::size_t>(cfg.K()));
    for (double tau : grid.tau_d) {
        const auto eta = slot_correlations(cfg, tau, tau_ref);
        t.eta.insert(t.eta.end(), eta.begin(), eta.end());
    }
    return t;
}

BeamPatternSurface beampattern_instant(const AllocationPattern& alloc, const SlotCorrelationTable& table)
{
    if (alloc.num_slots() != table.num_slots) {
        throw std::invalid_argument("allocation slot count does not match the correlation table");
    }
    auto s = make_surface(table.grid, SurfaceKind::Instant);
    const auto& grid = table.grid;
    const std::size_t nf = grid.f_theta.size();
    const auto K = static_cast<std::size_t>(table.num_slots);
    std::vector<cdouble> gains(K * nf);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < nf; ++j) {
            gains[k * nf + j] = transmit_gain(alloc.radar_set(static_cast<int>(k)), grid.f_theta[j]);
        }
    }
    for (std::size_t i = 0; i < grid.tau_d.size(); ++i) {
        const cdouble* eta = table.eta.data() + i * K;
        for (std::size_t j = 0; j < nf; ++j) {
            cdouble acc{};
            for (std::size_t k = 0; k < K; ++k) {
                acc += gains[k * nf + j] * eta[k];
            }
            s.value(i, j) = acc;
        }
    }
    return s;
}

BeamPatternSurface beampattern_instant(const AllocationPattern& alloc, const CheckedConfig& cfg,
                                       const BeamGrid& grid, double tau_ref)
{
    if (alloc.num_slots() != cfg.K() || alloc.num_elements() != cfg.M()) {
        throw std::invalid_argument("allocation shape does not match the configuration");
    }
    return beampattern_instant(alloc, slot_correlation_table(cfg, grid, tau_ref));
}

BeamPatternSurface beampattern_instant(const AllocationPattern& alloc, const CheckedConfig& cfg,
                                       const BeamGrid& grid)
{
    return beampattern_instant(alloc, cfg, grid, default_reference_delay(cfg));
}

namespace {

template <typename F>
BeamPatternSurface closed_surface(const BeamGrid& grid, SurfaceKind kind, F&& f)
{
    auto s = make_surface(grid, kind);
    for (std::size_t i = 0; i < grid.tau_d.size(); ++i) {
        for (std::size_t j = 0; j < grid.f_theta.size(); ++j) {
            s.value(i, j) = f(grid.tau_d[i], grid.f_theta[j]);
        }
    }
    return s;
}

} // namespace

BeamPatternSurface full_array_closed(const CheckedConfig& cfg, const BeamGrid& grid)
{
    const double nr = cfg.pulse_samples();
    const double br = cfg.params().bandwidth;
    const int M = cfg.M();
    return closed_surface(grid, SurfaceKind::ClosedForm, [&](double tau, double f) {
        return nr * std::abs(sinc(br * tau)) * std::abs(dirichlet(f, M));
    });
}

BeamPatternSurface fix1_closed(const CheckedConfig& cfg, const BeamGrid& grid)
{
    const double nr = cfg.pulse_samples();
    const double br = cfg.params().bandwidth;
    const int mr = cfg.radar_tx();
    return closed_surface(grid, SurfaceKind::ClosedForm, [&](double tau, double f) {
        return nr * std::abs(sinc(br * tau)) * std::abs(dirichlet(f, mr));
    });
}

BeamPatternSurface beampattern_expected_closed(const CheckedConfig& cfg, const BeamGrid& grid)
{
    const double scale = static_cast<double>(cfg.radar_tx()) * cfg.pulse_samples() / cfg.M();
    const double br = cfg.params().bandwidth;
    const int M = cfg.M();
    return closed_surface(grid, SurfaceKind::Mean, [&](double tau, double f) {
        return scale * std::abs(sinc(br * tau)) * std::abs(dirichlet(f, M));
    });
}

BeamPatternSurface beampattern_variance_closed(const CheckedConfig& cfg, const BeamGrid& grid,
                                               SchemeId scheme)
{
    if (scheme != SchemeId::SpaCoR && scheme != SchemeId::Fix2) {
        throw std::invalid_argument("variance closed form applies to SpaCoR and Fix2 only");
    }
    const double M = cfg.M();
    const double mr = cfg.radar_tx();
    const double br = cfg.params().bandwidth;
    const double K = scheme == SchemeId::SpaCoR ? cfg.K() : 1.0;
    const double a = (mr - M) / (mr * M * M * (M - 1.0));
    const double b = (M - mr) / (mr * (M - 1.0));
    return closed_surface(grid, SurfaceKind::Variance, [&](double tau, double f) {
        const double s = sinc(br * tau / K);
        const double gamma = s * s / K;
        const double d = dirichlet(f, cfg.M());
        // The bracket vanishes at f = 0 up to rounding; keep the surface
        // nonnegative.
        return std::max(0.0, gamma * (a * d * d + b));
    });
}

BeamPatternSurface normalized(BeamPatternSurface s, const CheckedConfig& cfg)
{
    const double peak = static_cast<double>(cfg.radar_tx()) * cfg.pulse_samples();
    const double scale = s.kind == SurfaceKind::Variance ? 1.0 : 1.0 / peak;
    for (auto& v : s.values) {
        v *= scale;
    }
    return s;
}

double angular_resolution(SchemeId scheme, const CheckedConfig& cfg)
{
    const int n = scheme == SchemeId::Fix1 ? cfg.radar_tx() : cfg.M();
    return 2.0 * kPi / n;
}

void write_surface_csv(std::ostream& out, const BeamPatternSurface& s)
{
    const auto flags = out.flags();
    out << "tau_d_s,f_theta_rad,value\n" << std::setprecision(12);
    for (std::size_t i = 0; i < s.grid.tau_d.size(); ++i) {
        for (std::size_t j = 0; j < s.grid.f_theta.size(); ++j) {
            const double v = s.kind == SurfaceKind::Instant ? s.magnitude(i, j) : s.value(i, j).real();
            out << s.grid.tau_d[i] << ',' << s.grid.f_theta[j] << ',' << v << '\n';
        }
    }
    out.flags(flags);
}

} // namespace spacor
