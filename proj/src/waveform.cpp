// SPDX-License-Identifier: Apache-2.0
#include "spacor/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace spacor {

namespace {

constexpr double kEdgeTol = 1e-9;
constexpr double kPi = std::numbers::pi;

bool is_pow2(int x)
{
    return x >= 2 && (x & (x - 1)) == 0;
}

unsigned gray_decode(unsigned g)
{
    unsigned b = g;
    for (unsigned s = g >> 1; s != 0; s >>= 1) {
        b ^= s;
    }
    return b;
}

} // namespace

bool in_unit_window(double x) noexcept
{
    return std::floor(x + kEdgeTol) == 0.0;
}

cdouble chirp_sample(const ChirpParams& p, double t) noexcept
{
    if (!in_unit_window(t / p.pulse_width)) {
        return {0.0, 0.0};
    }
    const double u = t - p.pulse_width / 2.0;
    return std::polar(1.0, p.rate * kPi * u * u);
}

int slot_of(double t, double symbol_duration, int num_slots) noexcept
{
    const double k = std::floor(t / symbol_duration + kEdgeTol);
    if (k < 0.0 || k >= static_cast<double>(num_slots)) {
        return -1;
    }
    return static_cast<int>(k);
}

int bits_per_symbol(int order)
{
    if (!is_pow2(order)) {
        throw std::invalid_argument("PSK order must be a power of two >= 2");
    }
    return std::countr_zero(static_cast<unsigned>(order));
}

cdouble psk_modulate(std::span<const std::uint8_t> bits, int order)
{
    const int width = bits_per_symbol(order);
    if (static_cast<int>(bits.size()) != width) {
        throw std::invalid_argument("PSK word must have log2(J) = " + std::to_string(width) + " bits");
    }
    unsigned word = 0;
    for (auto b : bits) {
        word = (word << 1) | (b & 1u);
    }
    const unsigned i = gray_decode(word);
    return std::polar(1.0, 2.0 * kPi * static_cast<double>(i) / order);
}

std::vector<std::uint8_t> psk_demodulate(cdouble point, int order)
{
    const int width = bits_per_symbol(order);
    double phase = std::arg(point);
    if (phase < 0) {
        phase += 2.0 * kPi;
    }
    const auto i = static_cast<unsigned>(std::lround(phase * order / (2.0 * kPi))) %
                   static_cast<unsigned>(order);
    const unsigned word = i ^ (i >> 1);
    std::vector<std::uint8_t> out(static_cast<std::size_t>(width));
    for (int b = 0; b < width; ++b) {
        out[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((word >> (width - 1 - b)) & 1u);
    }
    return out;
}

int gsm_rate_bits(const CombinationMap& map, int order)
{
    return map.num_comm_tx() * bits_per_symbol(order) + map.bits();
}

std::vector<GsmSymbol> gsm_encode(std::span<const std::uint8_t> bits, const CombinationMap& map,
                                  int order)
{
    const auto rate = static_cast<std::size_t>(gsm_rate_bits(map, order));
    if (bits.size() % rate != 0) {
        throw std::invalid_argument("GSM bit stream length " + std::to_string(bits.size()) +
                                    " is not a multiple of R = " + std::to_string(rate));
    }
    const auto width = static_cast<std::size_t>(bits_per_symbol(order));
    std::vector<GsmSymbol> out;
    out.reserve(bits.size() / rate);
    for (std::size_t off = 0; off < bits.size(); off += rate) {
        std::size_t word = 0;
        for (int b = 0; b < map.bits(); ++b) {
            word = (word << 1) | (bits[off + static_cast<std::size_t>(b)] & 1u);
        }
        GsmSymbol sym;
        sym.comm_elements = map.combination(word);
        std::size_t pos = off + static_cast<std::size_t>(map.bits());
        for (int e = 0; e < map.num_comm_tx(); ++e, pos += width) {
            sym.symbols.push_back(psk_modulate(bits.subspan(pos, width), order));
        }
        out.push_back(std::move(sym));
    }
    return out;
}

std::vector<std::uint8_t> gsm_decode(std::span<const GsmSymbol> symbols, const CombinationMap& map,
                                     int order)
{
    std::vector<std::uint8_t> out;
    for (const auto& sym : symbols) {
        const auto idx = map.index_of(sym.comm_elements);
        if (!idx) {
            throw std::invalid_argument("GSM symbol uses a comm set outside the combination map");
        }
        for (int b = map.bits() - 1; b >= 0; --b) {
            out.push_back(static_cast<std::uint8_t>((*idx >> b) & 1u));
        }
        for (const auto& s : sym.symbols) {
            const auto word = psk_demodulate(s, order);
            out.insert(out.end(), word.begin(), word.end());
        }
    }
    return out;
}

std::vector<cdouble> beamform_weights(const CheckedConfig& cfg)
{
    const auto& p = cfg.params();
    const double step = 2.0 * kPi * p.spacing_wavelengths * std::sin(p.steer_angle);
    std::vector<cdouble> w(static_cast<std::size_t>(cfg.M()));
    for (int m = 0; m < cfg.M(); ++m) {
        w[static_cast<std::size_t>(m)] = std::polar(1.0, -step * m);
    }
    return w;
}

JrcWaveform build_jrc_waveform(const AllocationPattern& alloc, std::span<const GsmSymbol> gsm,
                               const CheckedConfig& cfg)
{
    const int M = cfg.M();
    const int K = cfg.K();
    if (alloc.num_elements() != M || alloc.num_slots() != K) {
        throw std::invalid_argument("allocation shape does not match the configuration");
    }
    if (static_cast<int>(gsm.size()) != K) {
        throw std::invalid_argument("need one GSM symbol per slot");
    }
    for (int k = 0; k < K; ++k) {
        const auto& sym = gsm[static_cast<std::size_t>(k)];
        if (sym.comm_elements != alloc.comm_set(k) || sym.symbols.size() != sym.comm_elements.size()) {
            throw std::invalid_argument("GSM symbol " + std::to_string(k) +
                                        " does not match the slot's comm set");
        }
    }

    JrcWaveform wf;
    wf.num_elements = M;
    wf.num_samples = cfg.pulse_samples();
    wf.num_slots = K;
    wf.samples.assign(static_cast<std::size_t>(M) * static_cast<std::size_t>(wf.num_samples), {});
    wf.bands.resize(static_cast<std::size_t>(K) * static_cast<std::size_t>(M));
    for (int k = 0; k < K; ++k) {
        for (int m = 0; m < M; ++m) {
            wf.bands[static_cast<std::size_t>(k * M + m)] = alloc.is_radar(k, m) ? Band::Radar : Band::Comm;
        }
    }

    const auto weights = beamform_weights(cfg);
    const auto chirp = ChirpParams::from(cfg);
    const double ts = cfg.sample_period();
    const double amp = cfg.params().comm_amplitude;
    for (int n = 0; n < wf.num_samples; ++n) {
        const double t = n * ts;
        const int k = slot_of(t, cfg.params().symbol_duration, K);
        if (k < 0) {
            continue;
        }
        const auto& sym = gsm[static_cast<std::size_t>(k)];
        const cdouble h = chirp_sample(chirp, t);
        for (int m = 0; m < M; ++m) {
            cdouble v;
            if (wf.band(k, m) == Band::Radar) {
                v = weights[static_cast<std::size_t>(m)] * h;
            } else {
                const auto it = std::lower_bound(sym.comm_elements.begin(), sym.comm_elements.end(), m);
                v = amp * sym.symbols[static_cast<std::size_t>(it - sym.comm_elements.begin())];
            }
            wf.samples[static_cast<std::size_t>(m) * static_cast<std::size_t>(wf.num_samples) +
                       static_cast<std::size_t>(n)] = v;
        }
    }
    return wf;
}

void write_waveform_dump(const std::string& path, const JrcWaveform& wf, double sample_rate)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    static_assert(sizeof(float) == 4);
    for (const auto& s : wf.samples) {
        for (float v : {static_cast<float>(s.real()), static_cast<float>(s.imag())}) {
            std::uint32_t u = 0;
            std::memcpy(&u, &v, 4);
            const unsigned char le[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
                                         static_cast<unsigned char>(u >> 16),
                                         static_cast<unsigned char>(u >> 24)};
            out.write(reinterpret_cast<const char*>(le), 4);
        }
    }
    std::ofstream hdr(path + ".hdr");
    hdr << std::setprecision(17) << "M = " << wf.num_elements << '\n'
        << "N_r = " << wf.num_samples << '\n'
        << "F_s = " << sample_rate << '\n'
        << "format = cf32le element-major\n";
}

} // namespace spacor
