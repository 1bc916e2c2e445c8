// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spacor/allocation.hpp"
#include "spacor/config.hpp"
#include "spacor/omp.hpp"
#include "spacor/rng.hpp"
#include "spacor/waveform.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace spacor {

struct Target {
    double tau = 0.0;      // delay, s
    double vartheta = 0.0; // spatial frequency, rad
    cdouble alpha{1.0, 0.0};
};

struct TargetScene {
    std::vector<Target> targets;
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double x) noexcept;

/// P delay points tau_min + p (tau_max - tau_min) / P and Q spatial
/// frequencies -pi + 2 pi q / Q. Column (p, q) has index p Q + q.
struct DelayAngleGrid {
    double tau_min = 0.0;
    double tau_max = 0.0;
    int P = 1;
    int Q = 1;

    double delay_step() const noexcept { return (tau_max - tau_min) / P; }
    double angle_step() const noexcept;
    double tau(int p) const noexcept { return tau_min + p * delay_step(); }
    double vartheta(int q) const noexcept;
    std::size_t size() const noexcept { return static_cast<std::size_t>(P) * static_cast<std::size_t>(Q); }
    std::size_t column(int p, int q) const noexcept { return static_cast<std::size_t>(p) * Q + q; }

    /// Nearest delay cell, round((tau - tau_min) / delay_step).
    long delay_cell(double tau) const noexcept;
    /// Nearest angle cell, wrapping around the circle.
    int angle_cell(double vartheta) const noexcept;

    /// 2 half_cells + 1 delay points centered on tau_center with the default
    /// steps 1/(5 B_r) and 2 pi/(5 M).
    static DelayAngleGrid centered(double tau_center, int half_cells, const CheckedConfig& cfg);

    /// Throws std::invalid_argument unless P, Q >= 1, the steps respect
    /// 1/B_r and 2 pi/M, and every grid delay fits in the receive window.
    void check(const CheckedConfig& cfg) const;
};

/// Contiguous run [first, first + count) of receive-window sample indices.
struct ReceiveWindow {
    long first = 0;
    long count = 0;

    /// All N_rec samples.
    static ReceiveWindow full(const CheckedConfig& cfg);
    /// Samples touched by any echo delayed within the grid's delay span.
    static ReceiveWindow gate(const DelayAngleGrid& grid, const CheckedConfig& cfg);
};

/// y_m[n] for the samples of a window, element-major:
/// samples[m * window.count + i] holds sample window.first + i of element m.
struct EchoBlock {
    int num_elements = 0;
    ReceiveWindow window;
    std::vector<cdouble> samples;

    cdouble at(int m, long i) const
    {
        return samples[static_cast<std::size_t>(m) * static_cast<std::size_t>(window.count) +
                       static_cast<std::size_t>(i)];
    }
};

/// Throws std::invalid_argument unless T_r <= tau <= T_pri - T_r (echo
/// fully inside the receive window) and -pi <= vartheta < pi.
void check_target(const Target& t, const CheckedConfig& cfg);

/// h_m[n, tau, vartheta] = exp(-j 2 pi f_c tau + j m vartheta)
///     sum_k rho~(k, vartheta) g((t_n - k T_c - tau)/T_c) h(t_n - tau)
/// with t_n = T_r + n T_s and rho~ the slot-k radar gain toward vartheta
/// relative to the steer direction.
cdouble echo_template(int m, long n, double tau, double vartheta, const AllocationPattern& alloc,
                      const CheckedConfig& cfg);

/// Template for every element and window sample, EchoBlock layout.
std::vector<cdouble> template_column(double tau, double vartheta, const AllocationPattern& alloc,
                                     const CheckedConfig& cfg, const ReceiveWindow& window);

/// Sum of target templates plus circular Gaussian noise of variance
/// noise_sigma^2 per sample. Throws std::invalid_argument for targets
/// outside the receive window.
EchoBlock synthesize_echo(const TargetScene& scene, const AllocationPattern& alloc, const CheckedConfig& cfg,
                          double noise_sigma, Rng& rng, const ReceiveWindow& window);
EchoBlock synthesize_echo(const TargetScene& scene, const AllocationPattern& alloc, const CheckedConfig& cfg,
                          double noise_sigma, Rng& rng);

/// sigma_r giving SNR^(r) = M_T_r^2 / sigma_r^2 (unit-modulus chirp).
double noise_sigma_for_snr(const CheckedConfig& cfg, double snr_db);

/// Residual threshold sigma_r sqrt(2 M N) for a window of N samples.
double default_epsilon(double noise_sigma, const CheckedConfig& cfg, const ReceiveWindow& window);

/// Matrix-free sensing operator over a grid. For each delay it caches the
/// chirp samples and slot indices of the echo support, so A^H r costs
/// O(P M N_r + P Q M K) instead of O(P Q M N).
class SensingOperator final : public Dictionary {
public:
    SensingOperator(const DelayAngleGrid& grid, const AllocationPattern& alloc, const CheckedConfig& cfg,
                    const ReceiveWindow& window);

    const DelayAngleGrid& grid() const noexcept { return grid_; }
    const ReceiveWindow& window() const noexcept { return window_; }
    /// Swaps in another allocation of the same shape, keeping the cached
    /// chirp samples.
    void set_allocation(const AllocationPattern& alloc);

    std::size_t rows() const override;
    std::size_t cols() const override { return grid_.size(); }
    void correlate(std::span<const cdouble> r, std::span<cdouble> out) const override;
    void column(std::size_t j, std::span<cdouble> out) const override;
    double column_norm(std::size_t j) const override { return norms_[j]; }

private:
    struct DelaySupport {
        long first = 0;                // window-relative index of the first nonzero sample
        std::vector<cdouble> chirp;    // h(t_n - tau^p)
        std::vector<std::size_t> bounds; // slot k covers chirp[bounds[k], bounds[k + 1])
        cdouble carrier;               // exp(-j 2 pi f_c tau^p)
    };

    DelayAngleGrid grid_;
    ReceiveWindow window_;
    int M_ = 0;
    int K_ = 0;
    std::vector<DelaySupport> delays_;
    std::vector<cdouble> gain_;  // rho~(k, vartheta^q) at [q * K + k]
    std::vector<cdouble> phase_; // exp(j m vartheta^q) at [q * M + m]
    std::vector<double> slot_energy_; // sum |h|^2 per slot at [p * K + k]
    double steer_ = 0.0;
    std::vector<double> norms_;
};

/// Dense observation matrix, rows m N + n over the window, column p Q + q.
/// Throws std::length_error when it would exceed budget_bytes.
Eigen::MatrixXcd build_sensing_matrix(const DelayAngleGrid& grid, const AllocationPattern& alloc,
                                      const CheckedConfig& cfg, const ReceiveWindow& window,
                                      std::size_t budget_bytes = std::size_t{1} << 30);

struct RecoveredEntry {
    int p = 0;
    int q = 0;
    double tau = 0.0;
    double vartheta = 0.0;
    cdouble amplitude;
};

struct RecoveredScene {
    std::vector<RecoveredEntry> entries;
    double residual = 0.0;
    std::vector<double> residual_history;
};

RecoveredScene to_recovered_scene(const OmpResult& res, const DelayAngleGrid& grid);

/// OMP on an echo block with the operator's grid.
RecoveredScene omp_recover(const EchoBlock& y, const SensingOperator& op, const OmpOptions& opts);

/// Adds `count` clutter scatterers at the first target's delay. Angles are
/// uniform over |wrap(vartheta - vartheta_T)| > 2 pi / M, amplitudes
/// circular Gaussian with E|a|^2 = |alpha|^2 / SCR (Rayleigh magnitude,
/// uniform phase).
TargetScene generate_clutter(const TargetScene& scene, const CheckedConfig& cfg, double scr_db, Rng& rng,
                             int count = 2);

/// Per target: some recovered entry sits in the target's delay cell and
/// within half an angle step of its spatial frequency.
std::vector<bool> hit_test(const TargetScene& truth, const RecoveredScene& rec, const DelayAngleGrid& grid);

/// Scene text: one `tau_s vartheta_rad alpha_re alpha_im` per line, `#`
/// comments. Throws std::invalid_argument on malformed lines.
TargetScene read_scene(std::istream& in);
TargetScene load_scene_file(const std::string& path);
void write_scene(std::ostream& out, const TargetScene& scene);

/// CSV `p,q,tau_s,vartheta_rad,amp_re,amp_im,residual`.
void write_recovery_csv(std::ostream& out, const RecoveredScene& rec);

} // namespace spacor
