// SPDX-License-Identifier: Apache-2.0
#include "spacor/omp.hpp"

#include <algorithm>

namespace spacor {

using cdouble = std::complex<double>;

DenseDictionary::DenseDictionary(Eigen::MatrixXcd a) : a_(std::move(a)), norms_(static_cast<std::size_t>(a_.cols()))
{
    for (Eigen::Index j = 0; j < a_.cols(); ++j) {
        norms_[static_cast<std::size_t>(j)] = a_.col(j).norm();
    }
}

void DenseDictionary::correlate(std::span<const cdouble> r, std::span<cdouble> out) const
{
    const Eigen::Map<const Eigen::VectorXcd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::Map<Eigen::VectorXcd> ov(out.data(), static_cast<Eigen::Index>(out.size()));
    ov.noalias() = a_.adjoint() * rv;
}

void DenseDictionary::column(std::size_t j, std::span<cdouble> out) const
{
    Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size())) =
        a_.col(static_cast<Eigen::Index>(j));
}

OmpResult omp(const Dictionary& dict, std::span<const cdouble> y, const OmpOptions& opts)
{
    if (opts.max_atoms < 1) {
        throw std::invalid_argument("OMP needs max_atoms >= 1");
    }
    if (y.size() != dict.rows()) {
        throw std::invalid_argument("OMP observation length " + std::to_string(y.size()) +
                                    " does not match dictionary rows " + std::to_string(dict.rows()));
    }
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Map<const Eigen::VectorXcd> yv(y.data(), n);

    OmpResult res;
    Eigen::VectorXcd r = yv;
    Eigen::MatrixXcd sub(n, 0);
    Eigen::VectorXcd coef;
    std::vector<cdouble> corr(dict.cols());
    const double floor = 1e-12 * yv.norm();
    // Columns at a null of the transmit gain are zero up to rounding; their
    // normalized correlation is meaningless.
    double max_norm = 0.0;
    for (std::size_t j = 0; j < dict.cols(); ++j) {
        max_norm = std::max(max_norm, dict.column_norm(j));
    }
    const double null_norm = 1e-9 * max_norm;

    res.residual = r.norm();
    res.residual_history.push_back(res.residual);
    const auto limit = std::min<std::size_t>(static_cast<std::size_t>(opts.max_atoms), dict.cols());
    while (res.support.size() < limit && res.residual > opts.epsilon && res.residual > floor) {
        dict.correlate({r.data(), static_cast<std::size_t>(n)}, corr);
        std::size_t best = 0;
        double best_score = -1.0;
        for (std::size_t j = 0; j < corr.size(); ++j) {
            const double nrm = dict.column_norm(j);
            const double score = nrm > null_norm ? std::abs(corr[j]) / nrm : 0.0;
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        if (std::find(res.support.begin(), res.support.end(), best) != res.support.end()) {
            throw RankDeficientSupport("OMP reselected atom " + std::to_string(best) +
                                       " after " + std::to_string(res.support.size()) + " steps");
        }

        res.support.push_back(best);
        sub.conservativeResize(n, sub.cols() + 1);
        dict.column(best, {sub.col(sub.cols() - 1).data(), static_cast<std::size_t>(n)});

        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(sub);
        if (qr.rank() < sub.cols()) {
            throw RankDeficientSupport("OMP support of " + std::to_string(sub.cols()) +
                                       " atoms is rank deficient (last atom " + std::to_string(best) + ")");
        }
        coef = qr.solve(yv);
        r = yv - sub * coef;
        res.residual = r.norm();
        res.residual_history.push_back(res.residual);
    }
    res.amplitudes.assign(coef.data(), coef.data() + coef.size());
    return res;
}

} // namespace spacor
