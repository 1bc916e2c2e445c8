// SPDX-License-Identifier: Apache-2.0
#include "spacor/comm.hpp"

#include "spacor/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spacor {

std::string_view to_string(CommMode mode)
{
    return mode == CommMode::GSM ? "GSM" : "SMX";
}

int CommSetup::rate_bits() const
{
    const int psk = num_tx * bits_per_symbol(order);
    return mode == CommMode::GSM ? psk + spatial_bits(num_elements, num_tx) : psk;
}

std::string CommSetup::label() const
{
    std::string psk;
    switch (order) {
    case 2:
        psk = "BPSK";
        break;
    case 4:
        psk = "QPSK";
        break;
    default:
        psk = std::to_string(order) + "PSK";
    }
    return std::string(to_string(mode)) + "-" + psk;
}

CommSetup gsm_setup(const CheckedConfig& cfg)
{
    if (cfg.comm_tx() < 1) {
        throw std::invalid_argument("GSM needs M_T_c >= 1");
    }
    return {CommMode::GSM, cfg.M(), cfg.comm_tx(), cfg.params().constellation_order, cfg.params().num_comm_rx};
}

CommSetup matched_smx(const CommSetup& gsm)
{
    const int rate = gsm.rate_bits();
    if (rate % gsm.num_tx != 0 || rate / gsm.num_tx >= 31) {
        throw std::invalid_argument("no SMX PSK order matches R = " + std::to_string(rate) + " on " +
                                    std::to_string(gsm.num_tx) + " elements");
    }
    CommSetup smx = gsm;
    smx.mode = CommMode::SMX;
    smx.order = 1 << (rate / gsm.num_tx);
    return smx;
}

CommChannel rayleigh_channel(const CommSetup& setup, double noise_variance, Rng& rng)
{
    CommChannel ch;
    ch.H.resize(setup.num_rx, setup.num_elements);
    for (Eigen::Index c = 0; c < ch.H.cols(); ++c) {
        for (Eigen::Index r = 0; r < ch.H.rows(); ++r) {
            ch.H(r, c) = complex_gaussian(rng, 1.0);
        }
    }
    ch.noise_variance = noise_variance;
    return ch;
}

double noise_variance_for_snr(const CommSetup& setup, double snr_db)
{
    return setup.num_tx / std::pow(10.0, snr_db / 10.0);
}

CandidateSet::CandidateSet(const CommSetup& setup) : rate_(setup.rate_bits())
{
    if (setup.num_tx < 1 || setup.num_tx > setup.num_elements || setup.num_rx < 1) {
        throw std::invalid_argument("comm setup needs 1 <= M_T_c <= M and M_R_c >= 1");
    }
    if (rate_ > 20) {
        throw std::invalid_argument("exhaustive candidate set of 2^" + std::to_string(rate_) + " is too large");
    }
    const std::size_t count = std::size_t{1} << rate_;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(rate_));
    std::optional<CombinationMap> map;
    if (setup.mode == CommMode::GSM) {
        map.emplace(setup.num_elements, setup.num_tx);
    }
    const auto width = static_cast<std::size_t>(bits_per_symbol(setup.order));
    vectors_.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        for (int b = 0; b < rate_; ++b) {
            bits[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((i >> (rate_ - 1 - b)) & 1u);
        }
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(setup.num_elements);
        if (map) {
            const auto sym = gsm_encode(bits, *map, setup.order).front();
            for (std::size_t e = 0; e < sym.comm_elements.size(); ++e) {
                x(sym.comm_elements[e]) = sym.symbols[e];
            }
        } else {
            for (int e = 0; e < setup.num_tx; ++e) {
                x(e) = psk_modulate(std::span(bits).subspan(static_cast<std::size_t>(e) * width, width),
                                    setup.order);
            }
        }
        vectors_.push_back(std::move(x));
    }
}

std::optional<std::size_t> CandidateSet::index_of(const Eigen::VectorXcd& x) const
{
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        if (vectors_[i].size() == x.size() && vectors_[i] == x) {
            return i;
        }
    }
    return std::nullopt;
}

Eigen::VectorXcd channel_apply(const CommChannel& ch, const Eigen::VectorXcd& x, Rng& rng)
{
    if (x.size() != ch.H.cols()) {
        throw std::invalid_argument("transmit vector length does not match the channel");
    }
    Eigen::VectorXcd y = ch.H * x;
    if (ch.noise_variance > 0.0) {
        for (Eigen::Index r = 0; r < y.size(); ++r) {
            y(r) += complex_gaussian(rng, ch.noise_variance);
        }
    }
    return y;
}

namespace {

// H x_i for every candidate, one column per candidate.
Eigen::MatrixXcd candidate_images(const CommChannel& ch, const CandidateSet& cands)
{
    Eigen::MatrixXcd img(ch.H.rows(), static_cast<Eigen::Index>(cands.size()));
    for (std::size_t i = 0; i < cands.size(); ++i) {
        img.col(static_cast<Eigen::Index>(i)).noalias() = ch.H * cands.vector(i);
    }
    return img;
}

std::size_t nearest(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& img)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < img.cols(); ++i) {
        const double d = (y - img.col(i)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(i);
        }
    }
    return best;
}

} // namespace

std::size_t ml_detect(const Eigen::VectorXcd& y, const CommChannel& ch, const CandidateSet& cands)
{
    if (cands.size() == 0) {
        throw std::invalid_argument("empty candidate set");
    }
    if (y.size() != ch.H.rows()) {
        throw std::invalid_argument("received vector length does not match the channel");
    }
    return nearest(y, candidate_images(ch, cands));
}

int bit_errors(std::size_t a, std::size_t b) noexcept
{
    return std::popcount(static_cast<std::uint64_t>(a ^ b));
}

std::vector<double> ber_experiment(const CommSetup& setup, std::span<const double> snr_db,
                                   std::uint64_t n_symbols, std::uint64_t seed)
{
    if (n_symbols == 0) {
        throw std::invalid_argument("BER needs at least one symbol");
    }
    const CandidateSet cands(setup);
    std::vector<double> ber;
    ber.reserve(snr_db.size());
    for (std::size_t s = 0; s < snr_db.size(); ++s) {
        Rng rng = make_rng(seed, s);
        const double var = noise_variance_for_snr(setup, snr_db[s]);
        std::uint64_t errors = 0;
        for (std::uint64_t n = 0; n < n_symbols; ++n) {
            const auto ch = rayleigh_channel(setup, var, rng);
            const auto sent = uniform_index(rng, cands.size());
            const auto img = candidate_images(ch, cands);
            Eigen::VectorXcd y = img.col(static_cast<Eigen::Index>(sent));
            for (Eigen::Index r = 0; r < y.size(); ++r) {
                y(r) += complex_gaussian(rng, var);
            }
            errors += static_cast<std::uint64_t>(bit_errors(sent, nearest(y, img)));
        }
        ber.push_back(static_cast<double>(errors) / (static_cast<double>(n_symbols) * cands.rate_bits()));
    }
    return ber;
}

std::vector<double> mi_estimate(const CommSetup& setup, std::span<const double> snr_db, std::uint64_t n_mc,
                                std::uint64_t seed)
{
    if (n_mc == 0) {
        throw std::invalid_argument("MI needs at least one Monte Carlo sample");
    }
    const CandidateSet cands(setup);
    const double rate = cands.rate_bits();
    std::vector<double> mi;
    mi.reserve(snr_db.size());
    std::vector<double> expo(cands.size());
    for (std::size_t s = 0; s < snr_db.size(); ++s) {
        Rng rng = make_rng(seed, s);
        const double var = noise_variance_for_snr(setup, snr_db[s]);
        double acc = 0.0;
        for (std::uint64_t n = 0; n < n_mc; ++n) {
            const auto ch = rayleigh_channel(setup, var, rng);
            const auto sent = uniform_index(rng, cands.size());
            const auto img = candidate_images(ch, cands);
            Eigen::VectorXcd w(ch.H.rows());
            for (Eigen::Index r = 0; r < w.size(); ++r) {
                w(r) = complex_gaussian(rng, var);
            }
            const Eigen::VectorXcd y = img.col(static_cast<Eigen::Index>(sent)) + w;
            const double wn = w.squaredNorm();
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < cands.size(); ++i) {
                expo[i] = (wn - (y - img.col(static_cast<Eigen::Index>(i))).squaredNorm()) / var;
                peak = std::max(peak, expo[i]);
            }
            double sum = 0.0;
            for (double e : expo) {
                sum += std::exp(e - peak);
            }
            acc += (peak + std::log(sum)) / std::numbers::ln2;
        }
        mi.push_back(std::clamp(rate - acc / static_cast<double>(n_mc), 0.0, rate));
    }
    return mi;
}

} // namespace spacor
