#include "spacor/radar.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace spacor;
using std::numbers::pi;

namespace {

CheckedConfig cfg_for(SchemeId scheme, double steer = 0.0)
{
    SystemConfig c;
    if (scheme == SchemeId::Full) {
        c.num_radar_tx = 4;
        c.num_comm_tx = 0;
    }
    c.scheme = scheme;
    c.steer_angle = steer;
    return validate_config(c);
}

// Direct evaluation of the echo model: carrier phase, receive phase,
// per-slot steered transmit sum and the delayed chirp.
cdouble brute_template(int m, long n, double tau, double vartheta, const AllocationPattern& alloc,
                       const CheckedConfig& cfg)
{
    const auto& p = cfg.params();
    const double t = p.pulse_width + static_cast<double>(n) / p.sample_rate;
    const auto w = beamform_weights(cfg);
    cdouble acc = 0.0;
    for (int k = 0; k < cfg.K(); ++k) {
        double u = (t - k * p.symbol_duration - tau) / p.symbol_duration;
        if (std::abs(u - std::round(u)) < 1e-9) {
            u = std::round(u); // sample instant on a slot edge
        }
        if (u < 0.0 || u >= 1.0) {
            continue;
        }
        cdouble rho = 0.0;
        for (int e : alloc.radar_set(k)) {
            rho += w[static_cast<std::size_t>(e)] * std::polar(1.0, e * vartheta);
        }
        acc += rho * chirp_sample(ChirpParams::from(cfg), t - tau);
    }
    return std::polar(1.0, -2 * pi * p.carrier * tau + m * vartheta) * acc;
}

AllocationPattern random_alloc(SchemeId scheme, const CheckedConfig& cfg, std::uint64_t seed)
{
    Rng rng(seed);
    return make_allocation(scheme, cfg, rng);
}

} // namespace

TEST_CASE("wrap angle")
{
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(pi) == doctest::Approx(-pi));
    CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
    CHECK(wrap_angle(-5 * pi / 2) == doctest::Approx(-pi / 2));
}

TEST_CASE("grid geometry")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR);
    const auto g = DelayAngleGrid::centered(60e-6, 5, cfg);
    CHECK(g.P == 11);
    CHECK(g.Q == 20);
    CHECK(g.delay_step() == doctest::Approx(1 / (5 * 50e6)));
    CHECK(g.angle_step() == doctest::Approx(2 * pi / 20));
    CHECK(g.tau(5) == doctest::Approx(60e-6));
    CHECK(g.column(3, 7) == 3 * 20 + 7);
    CHECK(g.delay_cell(60e-6) == 5);
    CHECK(g.angle_cell(g.vartheta(13)) == 13);
    CHECK(g.angle_cell(pi - 1e-6) == 0);
    CHECK_NOTHROW(g.check(cfg));

    DelayAngleGrid coarse = g;
    coarse.Q = 3;
    CHECK_THROWS_AS(coarse.check(cfg), std::invalid_argument);
    DelayAngleGrid wide = g;
    wide.P = 2;
    CHECK_THROWS_AS(wide.check(cfg), std::invalid_argument);
    DelayAngleGrid early = g;
    early.tau_min = 10e-6;
    early.tau_max = early.tau_min + 11 * g.delay_step();
    CHECK_THROWS_AS(early.check(cfg), std::invalid_argument);
}

TEST_CASE("target window checks")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR);
    CHECK_NOTHROW(check_target({30e-6, 0.0, 1.0}, cfg));
    CHECK_NOTHROW(check_target({170e-6, 0.0, 1.0}, cfg));
    CHECK_THROWS_AS(check_target({29e-6, 0.0, 1.0}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(check_target({171e-6, 0.0, 1.0}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(check_target({60e-6, pi, 1.0}, cfg), std::invalid_argument);
}

TEST_CASE("echo template agrees with a brute-force slot loop")
{
    for (double steer : {0.0, 0.4}) {
        const auto cfg = cfg_for(SchemeId::SpaCoR, steer);
        const auto alloc = random_alloc(SchemeId::SpaCoR, cfg, 17);
        const double tau = 60e-6 + 0.37 / 50e6;
        for (int m = 0; m < 4; ++m) {
            for (long n = 1490; n < 3020; n += 13) {
                for (double v : {-2.1, 0.0, 0.9}) {
                    const auto a = echo_template(m, n, tau, v, alloc, cfg);
                    const auto b = brute_template(m, n, tau, v, alloc, cfg);
                    CHECK(std::abs(a - b) < 1e-8);
                }
            }
        }
        const auto col = template_column(tau, 0.9, alloc, cfg, ReceiveWindow::full(cfg));
        for (int m = 0; m < 4; ++m) {
            for (long n = 1490; n < 3020; n += 29) {
                const auto idx = static_cast<std::size_t>(m) * 8500 + static_cast<std::size_t>(n);
                CHECK(std::abs(col[idx] - brute_template(m, n, tau, 0.9, alloc, cfg)) < 1e-8);
            }
        }
    }
}

TEST_CASE("template: receive element only adds phase, Full gain on the steer direction is M")
{
    const auto cfg = cfg_for(SchemeId::Full, 0.3);
    const auto alloc = random_alloc(SchemeId::Full, cfg, 1);
    const double v = cfg.steer_spatial_frequency();
    const double tau = 60e-6;
    for (long n = 1500; n < 3000; n += 37) {
        const double mag = std::abs(echo_template(0, n, tau, v, alloc, cfg));
        CHECK(mag == doctest::Approx(4.0));
        for (int m = 1; m < 4; ++m) {
            CHECK(std::abs(echo_template(m, n, tau, v, alloc, cfg)) == doctest::Approx(mag));
        }
    }
    CHECK(std::abs(echo_template(0, 1499 - 5, tau, v, alloc, cfg)) == 0.0);
    CHECK(std::abs(echo_template(0, 3005, tau, v, alloc, cfg)) == 0.0);
}

TEST_CASE("noiseless synthesis is linear in the scene")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR);
    const auto alloc = random_alloc(SchemeId::SpaCoR, cfg, 3);
    Rng rng(1);
    const auto empty = synthesize_echo({}, alloc, cfg, 0.0, rng);
    CHECK(empty.samples.size() == 4u * 8500u);
    CHECK(std::all_of(empty.samples.begin(), empty.samples.end(), [](cdouble x) { return x == cdouble{}; }));

    const Target a{60e-6, 0.7, {0.5, -1.2}};
    const Target b{61.3e-6, -1.9, {2.0, 0.3}};
    const auto ya = synthesize_echo({{a}}, alloc, cfg, 0.0, rng);
    const auto yb = synthesize_echo({{b}}, alloc, cfg, 0.0, rng);
    const auto yab = synthesize_echo({{a, b}}, alloc, cfg, 0.0, rng);
    const auto col = template_column(a.tau, a.vartheta, alloc, cfg, ReceiveWindow::full(cfg));
    for (std::size_t i = 0; i < yab.samples.size(); i += 7) {
        CHECK(std::abs(ya.samples[i] - a.alpha * col[i]) < 1e-12);
        CHECK(std::abs(yab.samples[i] - ya.samples[i] - yb.samples[i]) < 1e-12);
    }

    const auto y2 = synthesize_echo({{Target{a.tau, a.vartheta, 3.0 * a.alpha}}}, alloc, cfg, 0.0, rng);
    for (std::size_t i = 0; i < y2.samples.size(); i += 11) {
        CHECK(std::abs(y2.samples[i] - 3.0 * ya.samples[i]) < 1e-12);
    }
    CHECK_THROWS_AS(synthesize_echo({{Target{10e-6, 0.0, 1.0}}}, alloc, cfg, 0.0, rng), std::invalid_argument);
}

TEST_CASE("empirical radar SNR matches M_T_r^2 / sigma^2")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR);
    const auto alloc = random_alloc(SchemeId::SpaCoR, cfg, 5);
    const double snr_db = 3.0;
    const double sigma = noise_sigma_for_snr(cfg, snr_db);
    const Target t{60e-6, cfg.steer_spatial_frequency(), 1.0};
    const ReceiveWindow win{1500, 1500}; // exactly the echo support
    Rng rng(9);
    const auto clean = synthesize_echo({{t}}, alloc, cfg, 0.0, rng, win);
    double sig = 0.0;
    for (const auto& s : clean.samples) {
        sig += std::norm(s);
    }
    sig /= static_cast<double>(clean.samples.size());
    CHECK(sig == doctest::Approx(4.0));

    double noise = 0.0;
    std::size_t count = 0;
    for (int d = 0; d < 1000; ++d) {
        const auto y = synthesize_echo({{t}}, alloc, cfg, sigma, rng, win);
        for (std::size_t i = 0; i < y.samples.size(); ++i) {
            noise += std::norm(y.samples[i] - clean.samples[i]);
        }
        count += y.samples.size();
    }
    noise /= static_cast<double>(count);
    CHECK(sig / noise == doctest::Approx(std::pow(10.0, snr_db / 10)).epsilon(0.03));
    CHECK(default_epsilon(sigma, cfg, win) == doctest::Approx(sigma * std::sqrt(2.0 * 4 * 1500)));
}

TEST_CASE("sensing matrix columns are templates on the grid")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR, 0.2);
    const auto alloc = random_alloc(SchemeId::SpaCoR, cfg, 8);
    DelayAngleGrid g = DelayAngleGrid::centered(60e-6, 4, cfg);
    g.Q = 10;
    g.P = 9;
    const auto win = ReceiveWindow::gate(g, cfg);
    const auto a = build_sensing_matrix(g, alloc, cfg, win);
    REQUIRE(a.rows() == 4 * win.count);
    REQUIRE(a.cols() == 90);
    for (int p : {0, 4, 8}) {
        for (int q : {0, 3, 9}) {
            const auto j = static_cast<Eigen::Index>(g.column(p, q));
            for (int m = 0; m < 4; ++m) {
                for (long i = 0; i < win.count; i += 17) {
                    const auto ref = brute_template(m, win.first + i, g.tau(p), g.vartheta(q), alloc, cfg);
                    CHECK(std::abs(a(m * win.count + i, j) - ref) < 1e-8);
                }
            }
        }
    }

    // Noiseless on-grid target is a scaled column.
    const cdouble alpha(0.8, 0.6);
    Rng rng(1);
    const auto y = synthesize_echo({{Target{g.tau(6), g.vartheta(2), alpha}}}, alloc, cfg, 0.0, rng, win);
    const auto j = static_cast<Eigen::Index>(g.column(6, 2));
    for (Eigen::Index r = 0; r < a.rows(); r += 5) {
        CHECK(std::abs(y.samples[static_cast<std::size_t>(r)] - alpha * a(r, j)) < 1e-10);
    }

    // Distinct grid points never have identical atoms.
    const Eigen::MatrixXcd gram = a.adjoint() * a;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        for (Eigen::Index k = i + 1; k < gram.cols(); ++k) {
            const double c = std::abs(gram(i, k)) / std::sqrt(gram(i, i).real() * gram(k, k).real());
            worst = std::max(worst, c);
        }
    }
    CHECK(worst < 1.0 - 1e-6);

    CHECK_THROWS_AS(build_sensing_matrix(g, alloc, cfg, win, 1024), std::length_error);
}

TEST_CASE("matrix-free operator equals the dense matrix")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR, -0.3);
    auto alloc = random_alloc(SchemeId::SpaCoR, cfg, 12);
    const auto g = DelayAngleGrid::centered(61e-6, 3, cfg);
    const auto win = ReceiveWindow::gate(g, cfg);
    SensingOperator op(g, alloc, cfg, win);
    CHECK(op.rows() == static_cast<std::size_t>(4 * win.count));
    CHECK(op.cols() == g.size());

    Rng rng(2);
    std::vector<cdouble> r(op.rows());
    for (auto& x : r) {
        x = complex_gaussian(rng, 1.0);
    }
    for (int round = 0; round < 2; ++round) {
        const auto a = build_sensing_matrix(g, alloc, cfg, win);
        const Eigen::Map<const Eigen::VectorXcd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
        const Eigen::VectorXcd ref = a.adjoint() * rv;
        std::vector<cdouble> out(op.cols());
        op.correlate(r, out);
        std::vector<cdouble> col(op.rows());
        for (std::size_t j = 0; j < op.cols(); ++j) {
            CHECK(std::abs(out[j] - ref(static_cast<Eigen::Index>(j))) < 1e-8 * (1 + std::abs(ref(static_cast<Eigen::Index>(j)))));
            CHECK(op.column_norm(j) == doctest::Approx(a.col(static_cast<Eigen::Index>(j)).norm()));
        }
        op.column(37, col);
        for (std::size_t i = 0; i < col.size(); i += 9) {
            CHECK(std::abs(col[i] - a(static_cast<Eigen::Index>(i), 37)) < 1e-10);
        }
        alloc = random_alloc(SchemeId::SpaCoR, cfg, 99);
        op.set_allocation(alloc);
    }
}

TEST_CASE("noiseless single on-grid target is recovered exactly")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR);
    const auto alloc = random_alloc(SchemeId::SpaCoR, cfg, 4);
    const auto g = DelayAngleGrid::centered(60e-6, 5, cfg);
    const auto win = ReceiveWindow::gate(g, cfg);
    const SensingOperator op(g, alloc, cfg, win);
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int p = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(g.P)));
        const int q = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(g.Q)));
        const cdouble alpha = std::polar(uniform(rng, 0.5, 2.0), uniform(rng, -pi, pi));
        const TargetScene scene{{Target{g.tau(p), g.vartheta(q), alpha}}};
        const auto y = synthesize_echo(scene, alloc, cfg, 0.0, rng, win);
        const auto rec = omp_recover(y, op, {1, 0.0});
        REQUIRE(rec.entries.size() == 1);
        CHECK(rec.entries[0].p == p);
        CHECK(rec.entries[0].q == q);
        CHECK(std::abs(rec.entries[0].amplitude - alpha) < 1e-6 * std::abs(alpha));
        CHECK(hit_test(scene, rec, g) == std::vector<bool>{true});
        for (std::size_t i = 1; i < rec.residual_history.size(); ++i) {
            CHECK(rec.residual_history[i] <= rec.residual_history[i - 1]);
        }
    }
}

TEST_CASE("two targets in one delay cell, spacing between 2 pi/M and 2 pi/M_T_r")
{
    // SpaCoR is expected to resolve both targets in most trials and Fix1 to
    // miss at least one in most trials.
    const auto cfg = cfg_for(SchemeId::SpaCoR);
    const double tau = 60e-6;
    const TargetScene scene{{Target{tau, -3 * pi / 8, 1.0}, Target{tau, 3 * pi / 8, 1.0}}};
    const auto g = DelayAngleGrid::centered(tau, 5, cfg);
    const auto win = ReceiveWindow::gate(g, cfg);
    const double sigma = noise_sigma_for_snr(cfg, 0.0);
    int spacor_both = 0;
    int fix1_missed = 0;
    for (int seed = 0; seed < 100; ++seed) {
        for (auto scheme : {SchemeId::SpaCoR, SchemeId::Fix1}) {
            Rng rng = make_rng(static_cast<std::uint64_t>(seed), scheme == SchemeId::SpaCoR ? 0 : 1);
            const auto alloc = make_allocation(scheme, cfg, rng);
            const SensingOperator op(g, alloc, cfg, win);
            const auto y = synthesize_echo(scene, alloc, cfg, sigma, rng, win);
            const auto hits = hit_test(scene, omp_recover(y, op, {2, 0.0}), g);
            const bool both = hits[0] && hits[1];
            if (scheme == SchemeId::SpaCoR) {
                spacor_both += both ? 1 : 0;
            } else {
                fix1_missed += both ? 0 : 1;
            }
        }
    }
    MESSAGE("SpaCoR resolved both in " << spacor_both << "/100, Fix1 missed in " << fix1_missed << "/100");
    CHECK(spacor_both > 50);
    CHECK(fix1_missed > 50);
}

TEST_CASE("clutter placement and power")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR, 0.35);
    const TargetScene scene{{Target{60e-6, cfg.steer_spatial_frequency(), {1.5, 0.0}}}};
    const double steer = cfg.steer_spatial_frequency();
    Rng rng(77);
    double power = 0.0;
    int n = 0;
    for (int d = 0; d < 10000; ++d) {
        const auto s = generate_clutter(scene, cfg, 6.0, rng);
        REQUIRE(s.targets.size() == 3);
        for (std::size_t i = 1; i < 3; ++i) {
            CHECK(s.targets[i].tau == 60e-6);
            CHECK(std::abs(wrap_angle(s.targets[i].vartheta - steer)) > pi / 2);
            power += std::norm(s.targets[i].alpha);
            ++n;
        }
    }
    CHECK(power / n == doctest::Approx(2.25 / std::pow(10.0, 0.6)).epsilon(0.03));

    double big = 0.0;
    for (int d = 0; d < 100; ++d) {
        const auto s = generate_clutter(scene, cfg, 300.0, rng);
        big = std::max(big, std::abs(s.targets[1].alpha));
    }
    CHECK(big < 1e-12);
    CHECK_THROWS_AS(generate_clutter({}, cfg, 0.0, rng), std::invalid_argument);
}

TEST_CASE("hit test boundaries")
{
    const auto cfg = cfg_for(SchemeId::SpaCoR);
    const auto g = DelayAngleGrid::centered(60e-6, 5, cfg);
    const TargetScene truth{{Target{g.tau(5), g.vartheta(7), 1.0}}};
    RecoveredScene rec;
    CHECK(hit_test(truth, rec, g) == std::vector<bool>{false});
    rec.entries.push_back({5, 7, g.tau(5), g.vartheta(7), 1.0});
    CHECK(hit_test(truth, rec, g) == std::vector<bool>{true});
    rec.entries[0] = {5, 8, g.tau(5), g.vartheta(8), 1.0};
    CHECK(hit_test(truth, rec, g) == std::vector<bool>{false});
    rec.entries[0] = {4, 7, g.tau(4), g.vartheta(7), 1.0};
    CHECK(hit_test(truth, rec, g) == std::vector<bool>{false});

    // Off-grid target 0.4 cells above q = 7.
    const TargetScene off{{Target{g.tau(5), g.vartheta(7) + 0.4 * g.angle_step(), 1.0}}};
    rec.entries[0] = {5, 7, g.tau(5), g.vartheta(7), 1.0};
    CHECK(hit_test(off, rec, g) == std::vector<bool>{true});
    rec.entries[0] = {5, 8, g.tau(5), g.vartheta(8), 1.0};
    CHECK(hit_test(off, rec, g) == std::vector<bool>{false});
}

TEST_CASE("scene files and recovery CSV")
{
    std::istringstream in("# tau vartheta re im\n6e-05 0.5 1 0\n\n6.1e-05 -1.25 0.5 -0.5 # second\n");
    const auto scene = read_scene(in);
    REQUIRE(scene.targets.size() == 2);
    CHECK(scene.targets[1].vartheta == -1.25);
    CHECK(scene.targets[1].alpha == cdouble(0.5, -0.5));

    std::stringstream ss;
    write_scene(ss, scene);
    const auto back = read_scene(ss);
    REQUIRE(back.targets.size() == 2);
    CHECK(back.targets[0].tau == scene.targets[0].tau);
    CHECK(back.targets[1].alpha == scene.targets[1].alpha);

    std::istringstream bad("6e-05 0.5 1\n");
    CHECK_THROWS_AS(read_scene(bad), std::invalid_argument);
    std::istringstream junk("6e-05 0.5 1 x\n");
    CHECK_THROWS_AS(read_scene(junk), std::invalid_argument);
    CHECK_THROWS_AS(load_scene_file("/nonexistent.scene"), std::invalid_argument);

    RecoveredScene rec;
    rec.residual = 0.25;
    rec.entries.push_back({1, 2, 6e-5, 0.5, {1.0, -2.0}});
    std::ostringstream csv;
    write_recovery_csv(csv, rec);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "p,q,tau_s,vartheta_rad,amp_re,amp_im,residual");
    std::getline(lines, line);
    CHECK(line.rfind("1,2,", 0) == 0);
}
