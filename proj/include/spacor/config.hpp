// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spacor {

/// Antenna allocation scheme. Full is the radar-only reference.
enum class SchemeId { Full, Fix1, Fix2, SpaCoR };

std::string_view to_string(SchemeId scheme);
SchemeId parse_scheme(std::string_view name);

/// Raised when a configuration violates one of the system constraints.
/// constraint() names the failing rule, e.g. "K^2 < B_r*T_r".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string constraint, const std::string& detail);
    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

/// Raw system parameters. All times in seconds, frequencies in Hz, angles in
/// radians. Defaults reproduce the desk-scale experiment settings
/// (M = 4, two radar elements, 2.5 us symbols in a 30 us pulse).
struct SystemConfig {
    int num_elements = 4;          // M
    int num_radar_tx = 2;          // M_T_r
    int num_comm_tx = 2;           // M_T_c
    int num_slots = 12;            // K
    double symbol_duration = 2.5e-6;  // T_c
    double pulse_width = 30e-6;       // T_r
    double pri = 200e-6;              // T_pri
    double bandwidth = 50e6;          // B_r
    double sample_rate = 50e6;        // F_s
    double carrier = 5.1e9;           // f_c, phase bookkeeping only
    double spacing_wavelengths = 0.5; // d / lambda
    int constellation_order = 4;      // J
    int num_comm_rx = 4;              // M_R_c
    double steer_angle = 0.0;         // theta_T
    double comm_amplitude = 1.0;      // comm chip amplitude relative to radar chips
    SchemeId scheme = SchemeId::SpaCoR;
};

/// A SystemConfig that passed validate_config(), together with the derived
/// timing quantities. Only validate_config() can produce one.
class CheckedConfig {
public:
    const SystemConfig& params() const noexcept { return cfg_; }

    int M() const noexcept { return cfg_.num_elements; }
    int radar_tx() const noexcept { return cfg_.num_radar_tx; }
    int comm_tx() const noexcept { return cfg_.num_comm_tx; }
    int K() const noexcept { return cfg_.num_slots; }

    /// Chirp rate mu = B_r / T_r.
    double chirp_rate() const noexcept { return chirp_rate_; }
    double sample_period() const noexcept { return 1.0 / cfg_.sample_rate; }
    /// Samples per pulse, floor(T_r F_s).
    int pulse_samples() const noexcept { return pulse_samples_; }
    /// Samples in the receive window, floor((T_pri - T_r) F_s).
    int receive_samples() const noexcept { return receive_samples_; }
    /// Absolute time of receive-window sample n. The window opens at T_r.
    double sample_time(long n) const noexcept
    {
        return cfg_.pulse_width + static_cast<double>(n) / cfg_.sample_rate;
    }
    /// Spatial frequency of the steer direction, 2 pi d sin(theta_T) / lambda.
    double steer_spatial_frequency() const noexcept;

private:
    friend CheckedConfig validate_config(const SystemConfig& cfg);
    explicit CheckedConfig(const SystemConfig& cfg);

    SystemConfig cfg_;
    double chirp_rate_ = 0.0;
    int pulse_samples_ = 0;
    int receive_samples_ = 0;
};

/// Checks every system constraint; throws ConfigError naming the first one
/// that fails.
CheckedConfig validate_config(const SystemConfig& cfg);

/// Key-value configuration text. One `key = value` per line, `#` starts a
/// comment. Keys mirror the symbols used throughout the docs:
///
///   M, M_T_r, M_T_c, K, T_c, T_r, T_pri, B_r, F_s, f_c, d_over_lambda,
///   J, M_R_c, theta_T, comm_amplitude, scheme
///
/// Unknown keys and malformed values raise ConfigError. Missing keys keep
/// the value already in `base`.
SystemConfig parse_config(std::istream& in, SystemConfig base = {});
SystemConfig load_config_file(const std::string& path, SystemConfig base = {});

/// Applies a single `key=value` override (same keys as parse_config).
void apply_override(SystemConfig& cfg, std::string_view key, std::string_view value);

/// Writes cfg in the parse_config format.
void write_config(std::ostream& out, const SystemConfig& cfg);

} // namespace spacor
