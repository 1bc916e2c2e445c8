// SPDX-License-Identifier: Apache-2.0
#include "spacor/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace spacor {

namespace {

// Floors a sample count that should be an integer up to rounding, e.g.
// 30e-6 * 50e6 = 1499.9999999999998.
int floor_count(double x)
{
    return static_cast<int>(std::floor(x + 1e-9));
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text)
{
    // std::from_chars for double is available in libstdc++ 11.
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ConfigError("well-formed value", "key '" + std::string(key) + "': cannot parse '" +
                                                   std::string(text) + "' as a number");
    }
    return v;
}

int parse_int(std::string_view key, std::string_view text)
{
    int v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("well-formed value", "key '" + std::string(key) + "': cannot parse '" +
                                                   std::string(text) + "' as an integer");
    }
    return v;
}

void require(bool ok, const char* constraint, const std::string& detail)
{
    if (!ok) {
        throw ConfigError(constraint, detail);
    }
}

} // namespace

std::string_view to_string(SchemeId scheme)
{
    switch (scheme) {
    case SchemeId::Full: return "Full";
    case SchemeId::Fix1: return "Fix1";
    case SchemeId::Fix2: return "Fix2";
    case SchemeId::SpaCoR: return "SpaCoR";
    }
    return "?";
}

SchemeId parse_scheme(std::string_view name)
{
    if (name == "Full" || name == "full") return SchemeId::Full;
    if (name == "Fix1" || name == "fix1") return SchemeId::Fix1;
    if (name == "Fix2" || name == "fix2") return SchemeId::Fix2;
    if (name == "SpaCoR" || name == "spacor" || name == "GSM" || name == "gsm") return SchemeId::SpaCoR;
    throw ConfigError("known scheme", "unknown allocation scheme '" + std::string(name) + "'");
}

ConfigError::ConfigError(std::string constraint, const std::string& detail)
    : std::runtime_error("config constraint violated [" + constraint + "]: " + detail),
      constraint_(std::move(constraint))
{
}

CheckedConfig::CheckedConfig(const SystemConfig& cfg)
    : cfg_(cfg),
      chirp_rate_(cfg.bandwidth / cfg.pulse_width),
      pulse_samples_(floor_count(cfg.pulse_width * cfg.sample_rate)),
      receive_samples_(floor_count((cfg.pri - cfg.pulse_width) * cfg.sample_rate))
{
}

double CheckedConfig::steer_spatial_frequency() const noexcept
{
    return 2.0 * std::numbers::pi * cfg_.spacing_wavelengths * std::sin(cfg_.steer_angle);
}

CheckedConfig validate_config(const SystemConfig& c)
{
    std::ostringstream d;
    auto detail = [&d]() {
        std::string s = d.str();
        d.str({});
        return s;
    };

    d << "M = " << c.num_elements;
    require(c.num_elements >= 2, "M >= 2", detail());

    d << "M_T_r = " << c.num_radar_tx;
    require(c.num_radar_tx >= 1, "M_T_r >= 1", detail());

    d << "M_T_r + M_T_c = " << c.num_radar_tx + c.num_comm_tx << ", M = " << c.num_elements;
    require(c.num_radar_tx + c.num_comm_tx == c.num_elements, "M_T_r + M_T_c = M", detail());

    if (c.scheme == SchemeId::Full) {
        d << "Full scheme needs M_T_r = M, got M_T_r = " << c.num_radar_tx;
        require(c.num_comm_tx == 0, "Full implies M_T_c = 0", detail());
    } else {
        d << "M_T_c = " << c.num_comm_tx;
        require(c.num_comm_tx >= 1, "M_T_c >= 1", detail());
    }

    d << "K = " << c.num_slots;
    require(c.num_slots >= 1, "K >= 1", detail());

    d << "T_c = " << c.symbol_duration << ", T_r = " << c.pulse_width << ", F_s = " << c.sample_rate;
    require(c.symbol_duration > 0 && c.pulse_width > 0 && c.pri > 0 && c.bandwidth > 0 &&
                c.sample_rate > 0,
            "positive timing", detail());

    d << "F_s = " << c.sample_rate << " < B_r = " << c.bandwidth;
    require(c.sample_rate >= c.bandwidth, "F_s >= B_r", detail());

    d << "|T_r - K T_c| = " << std::abs(c.pulse_width - c.num_slots * c.symbol_duration)
      << " s exceeds one sample period";
    require(std::abs(c.pulse_width - c.num_slots * c.symbol_duration) <= 1.0 / c.sample_rate,
            "T_r = K*T_c", detail());

    const double tbp = c.bandwidth * c.pulse_width;
    d << "K^2 = " << c.num_slots * c.num_slots << " >= B_r*T_r = " << tbp;
    require(static_cast<double>(c.num_slots) * c.num_slots < tbp, "K^2 < B_r*T_r", detail());

    d << "d/lambda = " << c.spacing_wavelengths;
    require(c.spacing_wavelengths > 0 && c.spacing_wavelengths <= 0.5, "d/lambda <= 1/2", detail());

    d << "T_pri = " << c.pri << " < 2 T_r = " << 2 * c.pulse_width;
    require(c.pri >= 2.0 * c.pulse_width, "T_pri >= 2*T_r", detail());

    const int j = c.constellation_order;
    d << "J = " << j;
    require(j >= 2 && (j & (j - 1)) == 0, "J power of two", detail());

    d << "M_R_c = " << c.num_comm_rx;
    require(c.num_comm_rx >= 1, "M_R_c >= 1", detail());

    d << "comm_amplitude = " << c.comm_amplitude;
    require(c.comm_amplitude >= 0.0 && std::isfinite(c.comm_amplitude), "comm_amplitude >= 0",
            detail());

    return CheckedConfig(c);
}

void apply_override(SystemConfig& cfg, std::string_view key, std::string_view value)
{
    key = trim(key);
    value = trim(value);
    if (key == "M") cfg.num_elements = parse_int(key, value);
    else if (key == "M_T_r") cfg.num_radar_tx = parse_int(key, value);
    else if (key == "M_T_c") cfg.num_comm_tx = parse_int(key, value);
    else if (key == "K") cfg.num_slots = parse_int(key, value);
    else if (key == "T_c") cfg.symbol_duration = parse_double(key, value);
    else if (key == "T_r") cfg.pulse_width = parse_double(key, value);
    else if (key == "T_pri") cfg.pri = parse_double(key, value);
    else if (key == "B_r") cfg.bandwidth = parse_double(key, value);
    else if (key == "F_s") cfg.sample_rate = parse_double(key, value);
    else if (key == "f_c") cfg.carrier = parse_double(key, value);
    else if (key == "d_over_lambda") cfg.spacing_wavelengths = parse_double(key, value);
    else if (key == "J") cfg.constellation_order = parse_int(key, value);
    else if (key == "M_R_c") cfg.num_comm_rx = parse_int(key, value);
    else if (key == "theta_T") cfg.steer_angle = parse_double(key, value);
    else if (key == "comm_amplitude") cfg.comm_amplitude = parse_double(key, value);
    else if (key == "scheme") cfg.scheme = parse_scheme(value);
    else throw ConfigError("known key", "unknown configuration key '" + std::string(key) + "'");
}

SystemConfig parse_config(std::istream& in, SystemConfig base)
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        view = trim(view);
        if (view.empty()) {
            continue;
        }
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("key = value", "line " + std::to_string(lineno) + ": missing '='");
        }
        apply_override(base, view.substr(0, eq), view.substr(eq + 1));
    }
    return base;
}

SystemConfig load_config_file(const std::string& path, SystemConfig base)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("readable file", "cannot open config file '" + path + "'");
    }
    return parse_config(in, base);
}

void write_config(std::ostream& out, const SystemConfig& c)
{
    const auto flags = out.flags();
    out << std::setprecision(17);
    out << "M = " << c.num_elements << '\n'
        << "M_T_r = " << c.num_radar_tx << '\n'
        << "M_T_c = " << c.num_comm_tx << '\n'
        << "K = " << c.num_slots << '\n'
        << "T_c = " << c.symbol_duration << '\n'
        << "T_r = " << c.pulse_width << '\n'
        << "T_pri = " << c.pri << '\n'
        << "B_r = " << c.bandwidth << '\n'
        << "F_s = " << c.sample_rate << '\n'
        << "f_c = " << c.carrier << '\n'
        << "d_over_lambda = " << c.spacing_wavelengths << '\n'
        << "J = " << c.constellation_order << '\n'
        << "M_R_c = " << c.num_comm_rx << '\n'
        << "theta_T = " << c.steer_angle << '\n'
        << "comm_amplitude = " << c.comm_amplitude << '\n'
        << "scheme = " << to_string(c.scheme) << '\n';
    out.flags(flags);
}

} // namespace spacor
