// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spacor/allocation.hpp"
#include "spacor/config.hpp"
#include "spacor/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace spacor {

enum class CommMode { GSM, SMX };

std::string_view to_string(CommMode mode);

/// Transmitter shape for one link. GSM picks M_T_c of M elements per
/// symbol through the combination map; SMX always uses elements
/// 0..M_T_c-1.
struct CommSetup {
    CommMode mode = CommMode::GSM;
    int num_elements = 4; // M
    int num_tx = 2;       // active elements per symbol, M_T_c
    int order = 4;        // PSK order
    int num_rx = 4;       // M_R_c

    /// Bits per symbol: num_tx log2(order), plus the spatial bits for GSM.
    int rate_bits() const;
    std::string label() const; // e.g. "GSM-QPSK"
};

/// GSM with the configuration's M, M_T_c, J and M_R_c.
CommSetup gsm_setup(const CheckedConfig& cfg);
/// SMX on M_T_c elements with the PSK order that matches `gsm`'s rate.
/// Throws std::invalid_argument when no power-of-two order matches.
CommSetup matched_smx(const CommSetup& gsm);

struct CommChannel {
    Eigen::MatrixXcd H; // M_R_c x M
    double noise_variance = 0.0;
};

/// Rayleigh channel, i.i.d. CN(0, 1) entries.
CommChannel rayleigh_channel(const CommSetup& setup, double noise_variance, Rng& rng);

/// Noise variance for SNR = M_T_c / sigma^2 (received symbol energy per
/// receive antenna over the noise variance).
double noise_variance_for_snr(const CommSetup& setup, double snr_db);

/// All transmit vectors. Candidate i carries the R-bit word i (MSB first:
/// spatial bits, then one PSK word per active element in increasing
/// element order).
class CandidateSet {
public:
    explicit CandidateSet(const CommSetup& setup);

    std::size_t size() const noexcept { return vectors_.size(); }
    int rate_bits() const noexcept { return rate_; }
    const Eigen::VectorXcd& vector(std::size_t i) const { return vectors_.at(i); }
    /// Index of x, if x is a candidate (exact match).
    std::optional<std::size_t> index_of(const Eigen::VectorXcd& x) const;

private:
    int rate_ = 0;
    std::vector<Eigen::VectorXcd> vectors_;
};

/// y = H x + w, w ~ CN(0, sigma^2 I).
Eigen::VectorXcd channel_apply(const CommChannel& ch, const Eigen::VectorXcd& x, Rng& rng);

/// argmin_i ||y - H x_i||^2, ties to the lowest index.
std::size_t ml_detect(const Eigen::VectorXcd& y, const CommChannel& ch, const CandidateSet& cands);

/// Hamming distance between candidate words a and b.
int bit_errors(std::size_t a, std::size_t b) noexcept;

/// Uncoded BER per SNR point: fresh Rayleigh H and uniform candidate per
/// symbol, exhaustive ML detection, errors counted over all R bits.
/// Point i uses RNG stream derive_seed(seed, i).
std::vector<double> ber_experiment(const CommSetup& setup, std::span<const double> snr_db,
                                   std::uint64_t n_symbols, std::uint64_t seed);

/// Monte Carlo mutual information (bits/symbol) of the uniform candidate
/// input, clamped to [0, R].
std::vector<double> mi_estimate(const CommSetup& setup, std::span<const double> snr_db, std::uint64_t n_mc,
                                std::uint64_t seed);

} // namespace spacor
