// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spacor/allocation.hpp"
#include "spacor/config.hpp"
#include "spacor/waveform.hpp"

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

namespace spacor {

/// Delay offsets tau_d (s) by spatial-frequency offsets f_theta (rad).
/// Both axes strictly increasing.
struct BeamGrid {
    std::vector<double> tau_d;
    std::vector<double> f_theta;

    /// n_tau points spanning [tau_lo, tau_hi] and n_f points spanning
    /// [f_lo, f_hi], endpoints included.
    static BeamGrid uniform(double tau_lo, double tau_hi, std::size_t n_tau, double f_lo, double f_hi,
                            std::size_t n_f);
    void check() const;
};

enum class SurfaceKind { Instant, Mean, Variance, ClosedForm };

/// Values over a BeamGrid, row-major by delay: value(i, j) belongs to
/// (tau_d[i], f_theta[j]). Real-valued kinds store zero imaginary parts.
struct BeamPatternSurface {
    BeamGrid grid;
    SurfaceKind kind = SurfaceKind::Instant;
    std::vector<cdouble> values;

    cdouble value(std::size_t i, std::size_t j) const { return values[i * grid.f_theta.size() + j]; }
    cdouble& value(std::size_t i, std::size_t j) { return values[i * grid.f_theta.size() + j]; }
    double magnitude(std::size_t i, std::size_t j) const { return std::abs(value(i, j)); }
};

/// Normalized sinc, sin(pi x) / (pi x).
double sinc(double x) noexcept;

/// sin(n f / 2) / sin(f / 2), replaced by its limit n where |sin(f/2)| < 1e-9.
double dirichlet(double f, int n) noexcept;

/// rho_T(k, f) = sum_l exp(j m_{k,l} f) over one slot's radar indices.
cdouble transmit_gain(std::span<const int> radar_indices, double f_theta) noexcept;

/// Reference echo delay used by the beam-pattern operations when none is
/// given: 2 T_r, i.e. one pulse width into the receive window.
double default_reference_delay(const CheckedConfig& cfg);

/// Per-slot chirp cross-correlation
///   eta(k, tau_d) = sum_n g((t_n - k T_c - tau_d - tau_ref)/T_c)
///                   h(t_n - tau_d - tau_ref) h*(t_n - tau_ref)
/// over the receive window. The instantaneous pattern is
/// sum_k rho_T(k, f) eta(k, tau_d).
std::vector<cdouble> slot_correlations(const CheckedConfig& cfg, double tau_d, double tau_ref);

/// Instantaneous transmit delay-direction pattern of one allocation,
/// evaluated by the exact discrete sums. Throws std::invalid_argument when
/// an echo at tau_ref + tau_d would not fit in the receive window.
BeamPatternSurface beampattern_instant(const AllocationPattern& alloc, const CheckedConfig& cfg,
                                       const BeamGrid& grid, double tau_ref);
BeamPatternSurface beampattern_instant(const AllocationPattern& alloc, const CheckedConfig& cfg,
                                       const BeamGrid& grid);

/// eta(k, tau_d) for every grid delay. The correlations do not depend on the
/// allocation, so Monte Carlo loops build this once and call
/// beampattern_instant(alloc, table) per draw.
struct SlotCorrelationTable {
    BeamGrid grid;
    int num_slots = 0;
    std::vector<cdouble> eta; // [i * num_slots + k]
};

SlotCorrelationTable slot_correlation_table(const CheckedConfig& cfg, const BeamGrid& grid, double tau_ref);
BeamPatternSurface beampattern_instant(const AllocationPattern& alloc, const SlotCorrelationTable& table);

/// Full-array closed form N_r |sinc(B_r tau_d)| |D_M(f)|.
BeamPatternSurface full_array_closed(const CheckedConfig& cfg, const BeamGrid& grid);

/// Contiguous sub-array closed form N_r |sinc(B_r tau_d)| |D_{M_T_r}(f)|.
BeamPatternSurface fix1_closed(const CheckedConfig& cfg, const BeamGrid& grid);

/// |E chi_T| = (M_T_r N_r / M) |sinc(B_r tau_d)| |D_M(f)|. Identical for
/// SpaCoR and Fix2.
BeamPatternSurface beampattern_expected_closed(const CheckedConfig& cfg, const BeamGrid& grid);

/// Variance of chi_T / (M_T_r N_r):
///   gamma(tau_d) [ (M_T_r - M)/(M_T_r M^2 (M-1)) |D_M(f)|^2 + (M - M_T_r)/(M_T_r (M-1)) ]
/// with gamma = sinc^2(B_r tau_d / K) / K for SpaCoR and sinc^2(B_r tau_d)
/// for Fix2. Scheme must be SpaCoR or Fix2.
BeamPatternSurface beampattern_variance_closed(const CheckedConfig& cfg, const BeamGrid& grid,
                                               SchemeId scheme);

/// Divides every value by E{chi_T(0, 0)} = M_T_r N_r.
BeamPatternSurface normalized(BeamPatternSurface s, const CheckedConfig& cfg);

/// Half the null-to-null mainlobe width in spatial frequency: 2 pi / M for
/// Full, SpaCoR and Fix2, 2 pi / M_T_r for Fix1.
double angular_resolution(SchemeId scheme, const CheckedConfig& cfg);

/// CSV with header `tau_d_s,f_theta_rad,value`; complex surfaces write
/// their magnitude.
void write_surface_csv(std::ostream& out, const BeamPatternSurface& s);

} // namespace spacor
