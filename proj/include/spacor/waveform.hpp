// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spacor/allocation.hpp"
#include "spacor/config.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spacor {

using cdouble = std::complex<double>;

struct ChirpParams {
    double rate = 0.0;        // mu, Hz/s
    double pulse_width = 0.0; // T_r, s

    double bandwidth() const noexcept { return rate * pulse_width; }
    static ChirpParams from(const CheckedConfig& cfg)
    {
        return {cfg.chirp_rate(), cfg.params().pulse_width};
    }
};

/// Unit rectangular window on [0, 1). Boundaries are resolved with a
/// relative tolerance so that sample instants landing on a slot edge up to
/// rounding are assigned consistently.
bool in_unit_window(double x) noexcept;

/// Baseband chirp h(t) = g(t/T_r) exp{j mu pi (t - T_r/2)^2}.
cdouble chirp_sample(const ChirpParams& p, double t) noexcept;

/// Slot index of time offset t (relative to pulse start), or -1 outside the
/// pulse.
int slot_of(double t, double symbol_duration, int num_slots) noexcept;

/// Gray-mapped J-PSK. Word bits are MSB first, one bit per byte; the point is
/// exp(j 2 pi i / J) where i is the inverse Gray code of the word.
cdouble psk_modulate(std::span<const std::uint8_t> bits, int order);
/// Nearest-point hard decision, returns log2(order) bits.
std::vector<std::uint8_t> psk_demodulate(cdouble point, int order);
int bits_per_symbol(int order);

struct GsmSymbol {
    ElementSet comm_elements; // strictly increasing, size M_T_c
    std::vector<cdouble> symbols;
};

/// Bits per GSM symbol: M_T_c log2 J + floor(log2 C(M, M_T_c)).
int gsm_rate_bits(const CombinationMap& map, int order);

/// Splits the stream into GSM symbols: the first map.bits() bits select the
/// comm set, the remaining bits form M_T_c PSK words assigned to the comm
/// elements in increasing index order. Throws std::invalid_argument when the
/// stream length is not a multiple of the rate.
std::vector<GsmSymbol> gsm_encode(std::span<const std::uint8_t> bits, const CombinationMap& map,
                                  int order);
std::vector<std::uint8_t> gsm_decode(std::span<const GsmSymbol> symbols, const CombinationMap& map,
                                     int order);

/// Steering weights a_m(theta_T) = exp(-j 2 pi m d/lambda sin theta_T).
std::vector<cdouble> beamform_weights(const CheckedConfig& cfg);

enum class Band : std::uint8_t { Radar, Comm };

/// Per-element complex baseband samples for one pulse, element-major
/// (M rows of N_r samples), with the band each element occupies per slot.
struct JrcWaveform {
    int num_elements = 0;
    int num_samples = 0;
    int num_slots = 0;
    std::vector<cdouble> samples; // [m * num_samples + n]
    std::vector<Band> bands;      // [k * num_elements + m]

    cdouble at(int m, int n) const
    {
        return samples[static_cast<std::size_t>(m) * static_cast<std::size_t>(num_samples) +
                       static_cast<std::size_t>(n)];
    }
    Band band(int k, int m) const
    {
        return bands[static_cast<std::size_t>(k) * static_cast<std::size_t>(num_elements) +
                     static_cast<std::size_t>(m)];
    }
};

/// Combines the steered chirp and the GSM chips. Radar rows carry
/// a_m(theta_T) h(n T_s) gated to the slot (one phase-continuous chirp across
/// slots); comm rows hold the element's PSK point for the whole slot, scaled
/// by comm_amplitude. Throws std::invalid_argument if the symbols do not
/// match the allocation.
JrcWaveform build_jrc_waveform(const AllocationPattern& alloc, std::span<const GsmSymbol> gsm,
                               const CheckedConfig& cfg);

/// Binary dump: interleaved re/im little-endian float32, row-major
/// (element, sample). A text sidecar `<path>.hdr` records M, N_r and F_s.
void write_waveform_dump(const std::string& path, const JrcWaveform& wf, double sample_rate);

} // namespace spacor
