// SPDX-License-Identifier: Apache-2.0
// spacor: run the beam-pattern, recovery and link experiments and write CSVs.

#include "spacor/config.hpp"
#include "spacor/harness.hpp"
#include "spacor/radar.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spacor;

namespace {

struct Options {
    std::string config_path;
    std::uint64_t seed = 1;
    std::uint64_t trials = 0;
    std::string out_dir = "out";
    bool plot = false;
    std::vector<std::string> overrides;
    std::vector<double> sweep;
    std::string scene_path;
    double radar_snr_db = 0.0;
};

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

const char* plot_script(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::Beampattern:
        return R"PY(import csv, sys, pathlib
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

out = pathlib.Path(sys.argv[1])
for f in sorted(out.glob("surface_*.csv")):
    rows = list(csv.DictReader(open(f)))
    tau = np.array(sorted({float(r["tau_d_s"]) for r in rows}))
    ft = np.array(sorted({float(r["f_theta_rad"]) for r in rows}))
    z = np.array([float(r["value"]) for r in rows]).reshape(len(tau), len(ft))
    plt.figure()
    plt.pcolormesh(ft, tau * 1e9, z, shading="auto")
    plt.xlabel("f_theta (rad)")
    plt.ylabel("tau_d (ns)")
    plt.colorbar()
    plt.title(f.stem)
    plt.savefig(f.with_suffix(".png"), dpi=120)
    plt.close()
)PY";
    case ExperimentKind::Ber:
    case ExperimentKind::Mi:
        return R"PY(import csv, sys, pathlib
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

out = pathlib.Path(sys.argv[1])
name = sys.argv[2]
rows = list(csv.DictReader(open(out / (name + ".csv"))))
metric = "ber" if name == "ber" else "mi_bits"
for mode in dict.fromkeys(r["mode"] for r in rows):
    pts = [(float(r["snr_db"]), float(r[metric])) for r in rows if r["mode"] == mode]
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=mode)
if metric == "ber":
    plt.yscale("log")
plt.xlabel("SNR (dB)")
plt.ylabel(metric)
plt.grid(True, which="both", alpha=0.3)
plt.legend()
plt.savefig(out / (name + ".png"), dpi=120)
)PY";
    case ExperimentKind::Resolve:
    case ExperimentKind::Hitrate:
        return R"PY(import csv, sys, pathlib
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

out = pathlib.Path(sys.argv[1])
name = sys.argv[2]
rows = list(csv.DictReader(open(out / (name + ".csv"))))
axis = list(rows[0].keys())[0]
metric = "hit_rate" if name == "hitrate" else "all_hit_rate"
for scheme in dict.fromkeys(r["scheme"] for r in rows):
    pts = [(float(r[axis]), float(r["value"])) for r in rows if r["scheme"] == scheme and r["metric"] == metric]
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=scheme)
plt.xlabel(axis)
plt.ylabel(metric)
plt.ylim(0, 1.02)
plt.grid(True, alpha=0.3)
plt.legend()
plt.savefig(out / (name + ".png"), dpi=120)
)PY";
    }
    return "";
}

void make_plot(ExperimentKind kind, const fs::path& out)
{
    const std::string name(to_string(kind));
    const auto script = out / ("plot_" + name + ".py");
    open_out(script) << plot_script(kind);
    const std::string cmd = "python3 \"" + script.string() + "\" \"" + out.string() + "\" " + name;
    if (std::system(cmd.c_str()) != 0) {
        std::cerr << "spacor: warning: plotting failed, CSVs are unaffected (" << script.string() << ")\n";
    }
}

int run(ExperimentKind kind, const Options& opt)
{
    SystemConfig cfg;
    if (!opt.config_path.empty()) {
        cfg = load_config_file(opt.config_path);
    }
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("key = value", "override '" + kv + "' has no '='");
        }
        apply_override(cfg, std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
    }
    validate_config(cfg);

    ExperimentSpec spec;
    spec.kind = kind;
    spec.config = cfg;
    spec.seed = opt.seed;
    spec.trials = opt.trials;
    spec.sweep = opt.sweep;
    spec.radar_snr_db = opt.radar_snr_db;
    if (!opt.scene_path.empty()) {
        spec.scene = load_scene_file(opt.scene_path);
    }

    const fs::path out(opt.out_dir);
    fs::create_directories(out);
    {
        auto f = open_out(out / "config.cfg");
        write_config(f, cfg);
    }
    const std::string name(to_string(kind));
    auto table_out = [&](const ResultTable& t) {
        auto f = open_out(out / (name + ".csv"));
        write_csv(f, t);
    };

    switch (kind) {
    case ExperimentKind::Beampattern: {
        const auto res = run_beampattern(spec);
        table_out(res.table);
        for (const auto& [label, surface] : res.surfaces) {
            auto f = open_out(out / ("surface_" + label + ".csv"));
            write_surface_csv(f, surface);
        }
        break;
    }
    case ExperimentKind::Resolve: {
        const auto res = run_resolve(spec);
        table_out(res.table);
        for (const auto& [label, rec] : res.examples) {
            auto f = open_out(out / ("recovery_" + label + ".csv"));
            write_recovery_csv(f, rec);
        }
        break;
    }
    case ExperimentKind::Hitrate:
        table_out(run_hitrate(spec));
        break;
    case ExperimentKind::Ber:
        table_out(run_ber(spec));
        break;
    case ExperimentKind::Mi:
        table_out(run_mi(spec));
        break;
    }
    if (opt.plot) {
        make_plot(kind, out);
    }
    std::cout << "wrote " << (out / (name + ".csv")).string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SpaCoR dual-function radar-communications simulator"};
    app.require_subcommand(1);
    Options opt;

    const std::vector<std::pair<ExperimentKind, std::string>> kinds{
        {ExperimentKind::Beampattern, "Transmit delay-direction beam patterns of all schemes"},
        {ExperimentKind::Resolve, "Multi-target recovery with OMP (two-target scene by default)"},
        {ExperimentKind::Hitrate, "Hit rate against clutter over an SCR sweep"},
        {ExperimentKind::Ber, "Uncoded BER of GSM against rate-matched SMX"},
        {ExperimentKind::Mi, "Mutual information of GSM against rate-matched SMX"},
    };
    for (const auto& [kind, help] : kinds) {
        auto* sub = app.add_subcommand(std::string(to_string(kind)), help);
        sub->add_option("--config", opt.config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "Master seed");
        sub->add_option("--trials", opt.trials, "Trials (symbols for ber) per sweep point; 0 = default");
        sub->add_option("--out", opt.out_dir, "Output directory");
        sub->add_flag("--plot", opt.plot, "Also render PNGs with matplotlib");
        sub->add_option("--set", opt.overrides, "Config override key=value (repeatable)");
        sub->add_option("--sweep", opt.sweep, "Sweep values in dB (SNR, or SCR for hitrate)")->delimiter(',');
        if (kind == ExperimentKind::Resolve) {
            sub->add_option("--scene", opt.scene_path, "Scene file: tau_s vartheta_rad alpha_re alpha_im");
        }
        if (kind == ExperimentKind::Hitrate) {
            sub->add_option("--radar-snr", opt.radar_snr_db, "Radar SNR in dB");
        }
    }

    CLI11_PARSE(app, argc, argv);

    ExperimentKind kind{};
    for (const auto* sub : app.get_subcommands()) {
        kind = parse_experiment(sub->get_name());
    }
    try {
        return run(kind, opt);
    } catch (const ConfigError& e) {
        std::cerr << "spacor: config error [" << e.constraint() << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "spacor: invalid input: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "spacor: error: " << e.what() << '\n';
        return 1;
    }
}
