// SPDX-License-Identifier: Apache-2.0
#include "spacor/radar.hpp"

#include "spacor/beampattern.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace spacor {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

cdouble carrier_phase(double carrier, double tau)
{
    return std::polar(1.0, -kTwoPi * std::fmod(carrier * tau, 1.0));
}

} // namespace

double wrap_angle(double x) noexcept
{
    double y = std::fmod(x + kPi, kTwoPi);
    if (y < 0.0) {
        y += kTwoPi;
    }
    return y - kPi;
}

double DelayAngleGrid::angle_step() const noexcept
{
    return kTwoPi / Q;
}

double DelayAngleGrid::vartheta(int q) const noexcept
{
    return -kPi + q * angle_step();
}

long DelayAngleGrid::delay_cell(double t) const noexcept
{
    return std::lround((t - tau_min) / delay_step());
}

int DelayAngleGrid::angle_cell(double v) const noexcept
{
    const long q = std::lround((wrap_angle(v) + kPi) / angle_step());
    return static_cast<int>(((q % Q) + Q) % Q);
}

DelayAngleGrid DelayAngleGrid::centered(double tau_center, int half_cells, const CheckedConfig& cfg)
{
    if (half_cells < 0) {
        throw std::invalid_argument("grid half width must be >= 0");
    }
    const double step = 1.0 / (5.0 * cfg.params().bandwidth);
    DelayAngleGrid g;
    g.P = 2 * half_cells + 1;
    g.Q = 5 * cfg.M();
    g.tau_min = tau_center - half_cells * step;
    g.tau_max = g.tau_min + g.P * step;
    return g;
}

void DelayAngleGrid::check(const CheckedConfig& cfg) const
{
    if (P < 1 || Q < 1 || !(tau_max > tau_min)) {
        throw std::invalid_argument("grid needs P, Q >= 1 and tau_max > tau_min");
    }
    const double tol = 1e-9;
    if (delay_step() > (1.0 + tol) / cfg.params().bandwidth) {
        throw std::invalid_argument("grid delay step exceeds 1/B_r");
    }
    if (angle_step() > (1.0 + tol) * kTwoPi / cfg.M()) {
        throw std::invalid_argument("grid angle step exceeds 2 pi / M");
    }
    check_target({tau(0), 0.0, {}}, cfg);
    check_target({tau(P - 1), 0.0, {}}, cfg);
}

ReceiveWindow ReceiveWindow::full(const CheckedConfig& cfg)
{
    return {0, cfg.receive_samples()};
}

ReceiveWindow ReceiveWindow::gate(const DelayAngleGrid& grid, const CheckedConfig& cfg)
{
    const double fs = cfg.params().sample_rate;
    const double tr = cfg.params().pulse_width;
    const long first = std::max<long>(0, static_cast<long>(std::floor((grid.tau(0) - tr) * fs)) - 1);
    const long last = std::min<long>(cfg.receive_samples() - 1,
                                     static_cast<long>(std::ceil(grid.tau(grid.P - 1) * fs)) + 1);
    return {first, last - first + 1};
}

void check_target(const Target& t, const CheckedConfig& cfg)
{
    const double lo = cfg.params().pulse_width;
    const double hi = cfg.sample_time(cfg.receive_samples()) - cfg.params().pulse_width;
    const double tol = 1e-9 * cfg.sample_period();
    if (!std::isfinite(t.tau) || t.tau < lo - tol || t.tau > hi + tol) {
        std::ostringstream msg;
        msg << "target delay " << t.tau << " s outside [" << lo << ", " << hi << "] s";
        throw std::invalid_argument(msg.str());
    }
    if (!std::isfinite(t.vartheta) || t.vartheta < -kPi || t.vartheta >= kPi) {
        throw std::invalid_argument("target spatial frequency outside [-pi, pi)");
    }
}

cdouble echo_template(int m, long n, double tau, double vartheta, const AllocationPattern& alloc,
                      const CheckedConfig& cfg)
{
    const double x = cfg.sample_time(n) - tau;
    const cdouble h = chirp_sample(ChirpParams::from(cfg), x);
    const int k = slot_of(x, cfg.params().symbol_duration, cfg.K());
    if (h == cdouble{} || k < 0) {
        return {};
    }
    const cdouble gain = transmit_gain(alloc.radar_set(k), vartheta - cfg.steer_spatial_frequency());
    return carrier_phase(cfg.params().carrier, tau) * std::polar(1.0, m * vartheta) * gain * h;
}

std::vector<cdouble> template_column(double tau, double vartheta, const AllocationPattern& alloc,
                                     const CheckedConfig& cfg, const ReceiveWindow& window)
{
    const int M = cfg.M();
    const auto n = static_cast<std::size_t>(window.count);
    std::vector<cdouble> col(static_cast<std::size_t>(M) * n);
    std::vector<cdouble> gain(static_cast<std::size_t>(cfg.K()));
    for (int k = 0; k < cfg.K(); ++k) {
        gain[static_cast<std::size_t>(k)] =
            transmit_gain(alloc.radar_set(k), vartheta - cfg.steer_spatial_frequency());
    }
    std::vector<cdouble> phase(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        phase[static_cast<std::size_t>(m)] = std::polar(1.0, m * vartheta);
    }
    const auto chirp = ChirpParams::from(cfg);
    const cdouble carrier = carrier_phase(cfg.params().carrier, tau);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = cfg.sample_time(window.first + static_cast<long>(i)) - tau;
        const cdouble h = chirp_sample(chirp, x);
        const int k = slot_of(x, cfg.params().symbol_duration, cfg.K());
        if (h == cdouble{} || k < 0) {
            continue;
        }
        const cdouble base = carrier * gain[static_cast<std::size_t>(k)] * h;
        for (int m = 0; m < M; ++m) {
            col[static_cast<std::size_t>(m) * n + i] = phase[static_cast<std::size_t>(m)] * base;
        }
    }
    return col;
}

EchoBlock synthesize_echo(const TargetScene& scene, const AllocationPattern& alloc, const CheckedConfig& cfg,
                          double noise_sigma, Rng& rng, const ReceiveWindow& window)
{
    if (window.first < 0 || window.count < 0 || window.first + window.count > cfg.receive_samples()) {
        throw std::invalid_argument("window exceeds the receive window");
    }
    if (noise_sigma < 0.0) {
        throw std::invalid_argument("noise sigma must be >= 0");
    }
    EchoBlock y;
    y.num_elements = cfg.M();
    y.window = window;
    y.samples.assign(static_cast<std::size_t>(cfg.M()) * static_cast<std::size_t>(window.count), {});
    for (const auto& t : scene.targets) {
        check_target(t, cfg);
        const auto col = template_column(t.tau, t.vartheta, alloc, cfg, window);
        for (std::size_t i = 0; i < col.size(); ++i) {
            y.samples[i] += t.alpha * col[i];
        }
    }
    if (noise_sigma > 0.0) {
        const double var = noise_sigma * noise_sigma;
        for (auto& s : y.samples) {
            s += complex_gaussian(rng, var);
        }
    }
    return y;
}

EchoBlock synthesize_echo(const TargetScene& scene, const AllocationPattern& alloc, const CheckedConfig& cfg,
                          double noise_sigma, Rng& rng)
{
    return synthesize_echo(scene, alloc, cfg, noise_sigma, rng, ReceiveWindow::full(cfg));
}

double noise_sigma_for_snr(const CheckedConfig& cfg, double snr_db)
{
    return cfg.radar_tx() / std::sqrt(std::pow(10.0, snr_db / 10.0));
}

double default_epsilon(double noise_sigma, const CheckedConfig& cfg, const ReceiveWindow& window)
{
    return noise_sigma * std::sqrt(2.0 * cfg.M() * static_cast<double>(window.count));
}

SensingOperator::SensingOperator(const DelayAngleGrid& grid, const AllocationPattern& alloc,
                                 const CheckedConfig& cfg, const ReceiveWindow& window)
    : grid_(grid), window_(window), M_(cfg.M()), K_(cfg.K())
{
    grid_.check(cfg);
    if (alloc.num_elements() != M_ || alloc.num_slots() != K_) {
        throw std::invalid_argument("allocation shape does not match the configuration");
    }
    if (window.first < 0 || window.count < 1 || window.first + window.count > cfg.receive_samples()) {
        throw std::invalid_argument("window exceeds the receive window");
    }
    const auto chirp = ChirpParams::from(cfg);
    const double tc = cfg.params().symbol_duration;

    delays_.resize(static_cast<std::size_t>(grid_.P));
    for (int p = 0; p < grid_.P; ++p) {
        auto& d = delays_[static_cast<std::size_t>(p)];
        const double tau = grid_.tau(p);
        d.carrier = carrier_phase(cfg.params().carrier, tau);
        d.first = -1;
        for (long i = 0; i < window.count; ++i) {
            const double x = cfg.sample_time(window.first + i) - tau;
            const cdouble h = chirp_sample(chirp, x);
            const int k = slot_of(x, tc, K_);
            if (h == cdouble{} || k < 0) {
                if (d.first >= 0) {
                    break;
                }
                continue;
            }
            if (d.first < 0) {
                d.first = i;
            }
            while (static_cast<int>(d.bounds.size()) <= k) {
                d.bounds.push_back(d.chirp.size());
            }
            d.chirp.push_back(h);
        }
        if (d.first < 0) {
            d.first = 0;
        }
        d.bounds.resize(static_cast<std::size_t>(K_) + 1, d.chirp.size());
    }

    steer_ = cfg.steer_spatial_frequency();
    phase_.resize(static_cast<std::size_t>(grid_.Q) * M_);
    for (int q = 0; q < grid_.Q; ++q) {
        for (int m = 0; m < M_; ++m) {
            phase_[static_cast<std::size_t>(q) * M_ + m] = std::polar(1.0, m * grid_.vartheta(q));
        }
    }
    slot_energy_.assign(static_cast<std::size_t>(grid_.P) * K_, 0.0);
    for (int p = 0; p < grid_.P; ++p) {
        const auto& d = delays_[static_cast<std::size_t>(p)];
        for (int k = 0; k < K_; ++k) {
            for (std::size_t i = d.bounds[k]; i < d.bounds[k + 1]; ++i) {
                slot_energy_[static_cast<std::size_t>(p) * K_ + k] += std::norm(d.chirp[i]);
            }
        }
    }
    set_allocation(alloc);
}

void SensingOperator::set_allocation(const AllocationPattern& alloc)
{
    if (alloc.num_elements() != M_ || alloc.num_slots() != K_) {
        throw std::invalid_argument("allocation shape does not match the configuration");
    }
    gain_.resize(static_cast<std::size_t>(grid_.Q) * K_);
    for (int q = 0; q < grid_.Q; ++q) {
        for (int k = 0; k < K_; ++k) {
            gain_[static_cast<std::size_t>(q) * K_ + k] = transmit_gain(alloc.radar_set(k), grid_.vartheta(q) - steer_);
        }
    }
    norms_.resize(grid_.size());
    for (int p = 0; p < grid_.P; ++p) {
        const double* energy = slot_energy_.data() + static_cast<std::size_t>(p) * K_;
        for (int q = 0; q < grid_.Q; ++q) {
            double e = 0.0;
            for (int k = 0; k < K_; ++k) {
                e += std::norm(gain_[static_cast<std::size_t>(q) * K_ + k]) * energy[k];
            }
            norms_[grid_.column(p, q)] = std::sqrt(M_ * e);
        }
    }
}

std::size_t SensingOperator::rows() const
{
    return static_cast<std::size_t>(M_) * static_cast<std::size_t>(window_.count);
}

void SensingOperator::correlate(std::span<const cdouble> r, std::span<cdouble> out) const
{
    if (r.size() != rows() || out.size() != cols()) {
        throw std::invalid_argument("sensing operator size mismatch");
    }
    const auto n = static_cast<std::size_t>(window_.count);
    std::vector<cdouble> s(static_cast<std::size_t>(M_) * K_);
    for (int p = 0; p < grid_.P; ++p) {
        const auto& d = delays_[static_cast<std::size_t>(p)];
        std::fill(s.begin(), s.end(), cdouble{});
        for (int m = 0; m < M_; ++m) {
            const cdouble* row = r.data() + static_cast<std::size_t>(m) * n + static_cast<std::size_t>(d.first);
            cdouble* sm = s.data() + static_cast<std::size_t>(m) * K_;
            for (int k = 0; k < K_; ++k) {
                const auto b = static_cast<Eigen::Index>(d.bounds[k]);
                const auto len = static_cast<Eigen::Index>(d.bounds[k + 1]) - b;
                sm[k] = Eigen::Map<const Eigen::VectorXcd>(d.chirp.data() + b, len)
                            .dot(Eigen::Map<const Eigen::VectorXcd>(row + b, len));
            }
        }
        const cdouble cc = std::conj(d.carrier);
        for (int q = 0; q < grid_.Q; ++q) {
            const cdouble* g = gain_.data() + static_cast<std::size_t>(q) * K_;
            const cdouble* ph = phase_.data() + static_cast<std::size_t>(q) * M_;
            cdouble acc{};
            for (int m = 0; m < M_; ++m) {
                const cdouble* sm = s.data() + static_cast<std::size_t>(m) * K_;
                cdouble inner{};
                for (int k = 0; k < K_; ++k) {
                    inner += std::conj(g[k]) * sm[k];
                }
                acc += std::conj(ph[m]) * inner;
            }
            out[grid_.column(p, q)] = cc * acc;
        }
    }
}

void SensingOperator::column(std::size_t j, std::span<cdouble> out) const
{
    if (j >= cols() || out.size() != rows()) {
        throw std::invalid_argument("sensing operator column out of range");
    }
    const int p = static_cast<int>(j / static_cast<std::size_t>(grid_.Q));
    const int q = static_cast<int>(j % static_cast<std::size_t>(grid_.Q));
    const auto& d = delays_[static_cast<std::size_t>(p)];
    const auto n = static_cast<std::size_t>(window_.count);
    std::fill(out.begin(), out.end(), cdouble{});
    for (int m = 0; m < M_; ++m) {
        const cdouble lead = d.carrier * phase_[static_cast<std::size_t>(q) * M_ + m];
        cdouble* row = out.data() + static_cast<std::size_t>(m) * n + static_cast<std::size_t>(d.first);
        for (int k = 0; k < K_; ++k) {
            const cdouble c = lead * gain_[static_cast<std::size_t>(q) * K_ + k];
            for (std::size_t i = d.bounds[k]; i < d.bounds[k + 1]; ++i) {
                row[i] = c * d.chirp[i];
            }
        }
    }
}

Eigen::MatrixXcd build_sensing_matrix(const DelayAngleGrid& grid, const AllocationPattern& alloc,
                                      const CheckedConfig& cfg, const ReceiveWindow& window,
                                      std::size_t budget_bytes)
{
    const SensingOperator op(grid, alloc, cfg, window);
    const std::size_t bytes = op.rows() * op.cols() * sizeof(cdouble);
    if (bytes > budget_bytes) {
        throw std::length_error("sensing matrix needs " + std::to_string(bytes) + " bytes, budget is " +
                                std::to_string(budget_bytes) + "; use SensingOperator instead");
    }
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(op.rows()), static_cast<Eigen::Index>(op.cols()));
    for (std::size_t j = 0; j < op.cols(); ++j) {
        op.column(j, {a.col(static_cast<Eigen::Index>(j)).data(), op.rows()});
    }
    return a;
}

RecoveredScene to_recovered_scene(const OmpResult& res, const DelayAngleGrid& grid)
{
    RecoveredScene out;
    out.residual = res.residual;
    out.residual_history = res.residual_history;
    for (std::size_t i = 0; i < res.support.size(); ++i) {
        RecoveredEntry e;
        e.p = static_cast<int>(res.support[i] / static_cast<std::size_t>(grid.Q));
        e.q = static_cast<int>(res.support[i] % static_cast<std::size_t>(grid.Q));
        e.tau = grid.tau(e.p);
        e.vartheta = grid.vartheta(e.q);
        e.amplitude = res.amplitudes[i];
        out.entries.push_back(e);
    }
    return out;
}

RecoveredScene omp_recover(const EchoBlock& y, const SensingOperator& op, const OmpOptions& opts)
{
    if (y.window.first != op.window().first || y.window.count != op.window().count) {
        throw std::invalid_argument("echo block and sensing operator use different windows");
    }
    return to_recovered_scene(omp(op, y.samples, opts), op.grid());
}

TargetScene generate_clutter(const TargetScene& scene, const CheckedConfig& cfg, double scr_db, Rng& rng,
                             int count)
{
    if (scene.targets.empty()) {
        throw std::invalid_argument("clutter needs a scene with at least one target");
    }
    const double mainlobe = kTwoPi / cfg.M();
    if (mainlobe >= kPi) {
        throw std::invalid_argument("no sidelobe region outside the 2 pi / M mainlobe for M <= 2");
    }
    const Target& t = scene.targets.front();
    const double steer = cfg.steer_spatial_frequency();
    const double power = std::norm(t.alpha) / std::pow(10.0, scr_db / 10.0);
    TargetScene out = scene;
    for (int c = 0; c < count; ++c) {
        double v = 0.0;
        do {
            v = uniform(rng, -kPi, kPi);
        } while (std::abs(wrap_angle(v - steer)) <= mainlobe);
        out.targets.push_back({t.tau, v, complex_gaussian(rng, power)});
    }
    return out;
}

std::vector<bool> hit_test(const TargetScene& truth, const RecoveredScene& rec, const DelayAngleGrid& grid)
{
    const double half = 0.5 * grid.angle_step() * (1.0 + 1e-9);
    std::vector<bool> hits;
    hits.reserve(truth.targets.size());
    for (const auto& t : truth.targets) {
        const long cell = grid.delay_cell(t.tau);
        const bool hit = std::any_of(rec.entries.begin(), rec.entries.end(), [&](const RecoveredEntry& e) {
            return e.p == cell && std::abs(wrap_angle(e.vartheta - t.vartheta)) <= half;
        });
        hits.push_back(hit);
    }
    return hits;
}

namespace {

double parse_double(std::string_view tok, int line)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw std::invalid_argument("scene line " + std::to_string(line) + ": bad number '" +
                                    std::string(tok) + "'");
    }
    return v;
}

} // namespace

TargetScene read_scene(std::istream& in)
{
    TargetScene scene;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        std::istringstream fields(raw);
        std::vector<std::string> tok;
        for (std::string s; fields >> s;) {
            tok.push_back(s);
        }
        if (tok.empty()) {
            continue;
        }
        if (tok.size() != 4) {
            throw std::invalid_argument("scene line " + std::to_string(line) +
                                        ": expected `tau_s vartheta_rad alpha_re alpha_im`");
        }
        scene.targets.push_back({parse_double(tok[0], line), parse_double(tok[1], line),
                                 {parse_double(tok[2], line), parse_double(tok[3], line)}});
    }
    return scene;
}

TargetScene load_scene_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open scene file '" + path + "'");
    }
    return read_scene(in);
}

void write_scene(std::ostream& out, const TargetScene& scene)
{
    const auto flags = out.flags();
    out << "# tau_s vartheta_rad alpha_re alpha_im\n" << std::setprecision(17);
    for (const auto& t : scene.targets) {
        out << t.tau << ' ' << t.vartheta << ' ' << t.alpha.real() << ' ' << t.alpha.imag() << '\n';
    }
    out.flags(flags);
}

void write_recovery_csv(std::ostream& out, const RecoveredScene& rec)
{
    const auto flags = out.flags();
    out << "p,q,tau_s,vartheta_rad,amp_re,amp_im,residual\n" << std::setprecision(12);
    for (const auto& e : rec.entries) {
        out << e.p << ',' << e.q << ',' << e.tau << ',' << e.vartheta << ',' << e.amplitude.real() << ','
            << e.amplitude.imag() << ',' << rec.residual << '\n';
    }
    out.flags(flags);
}

} // namespace spacor
