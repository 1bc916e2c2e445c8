// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spacor {

/// Linear operator A with column access. OMP only needs A^H r, single
/// columns and column norms, so large dictionaries can stay matrix-free.
class Dictionary {
public:
    virtual ~Dictionary() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    /// out[j] = <a_j, r> = a_j^H r, out.size() == cols().
    virtual void correlate(std::span<const std::complex<double>> r,
                           std::span<std::complex<double>> out) const = 0;
    /// Writes column j into out, out.size() == rows().
    virtual void column(std::size_t j, std::span<std::complex<double>> out) const = 0;
    virtual double column_norm(std::size_t j) const = 0;
};

class DenseDictionary final : public Dictionary {
public:
    explicit DenseDictionary(Eigen::MatrixXcd a);

    const Eigen::MatrixXcd& matrix() const noexcept { return a_; }

    std::size_t rows() const override { return static_cast<std::size_t>(a_.rows()); }
    std::size_t cols() const override { return static_cast<std::size_t>(a_.cols()); }
    void correlate(std::span<const std::complex<double>> r,
                   std::span<std::complex<double>> out) const override;
    void column(std::size_t j, std::span<std::complex<double>> out) const override;
    double column_norm(std::size_t j) const override { return norms_[j]; }

private:
    Eigen::MatrixXcd a_;
    std::vector<double> norms_;
};

/// Raised when the selected support stops being full rank, i.e. OMP picked
/// an atom already in the support or one linearly dependent on it.
class RankDeficientSupport : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OmpOptions {
    int max_atoms = 1;    // L_max
    double epsilon = 0.0; // stop once ||r|| <= epsilon
};

struct OmpResult {
    std::vector<std::size_t> support; // selection order
    std::vector<std::complex<double>> amplitudes;
    /// ||r|| before the first iteration and after each one.
    std::vector<double> residual_history;
    double residual = 0.0;
};

/// Orthogonal matching pursuit. Each step picks the atom maximizing
/// |<a_j, r>| / ||a_j||, re-fits all amplitudes by least squares on the
/// support and updates the residual. Stops after max_atoms atoms, when the
/// residual drops to epsilon, or when it is numerically zero
/// (<= 1e-12 ||y||). Columns with norm below 1e-9 of the largest are never
/// selected. Ties go to the lowest column index.
OmpResult omp(const Dictionary& dict, std::span<const std::complex<double>> y, const OmpOptions& opts);

} // namespace spacor
