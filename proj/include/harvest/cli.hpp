// Command-line front end: model, sweep, simulate, beam and compare.
//
// Exit codes: 0 success, 2 config error, 3 numerical-precondition failure,
// 4 non-settled simulation.
#pragma once

#include "harvest/analysis.hpp"
#include "harvest/beam.hpp"
#include "harvest/config.hpp"
#include "harvest/csv.hpp"
#include "harvest/errors.hpp"
#include "harvest/model.hpp"
#include "harvest/transient.hpp"
#include "harvest/units.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace harvest::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kPreconditionFailure = 3,
    kNotSettled = 4,
};

struct Options {
    std::vector<std::string> config_paths;
    std::string out_path;
    std::optional<std::string> accel_tag;
    std::optional<double> target_accel;
    std::string scenario;

    std::string sweep_kind = "frequency";
    std::optional<double> range_start;
    std::optional<double> range_stop;
    std::optional<int> range_points;
    bool log_spacing = false;
    bool open_circuit = false;
    bool simulate_sweep = false;

    std::string trace_path;
    std::optional<double> sim_dt;
    std::optional<double> sim_duration;

    std::string beam;
    std::vector<double> thicknesses;
    std::vector<std::string> materials;
};

namespace detail {

/// Writes to --out when given, otherwise to the fallback stream.
class Output {
public:
    Output(const std::string &path, std::ostream &fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_)
                throw ConfigError("cannot open output file '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream &stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream *stream_;
};

inline void line(std::ostream &os, std::string_view key, double value) {
    os << fmt::format("{:<24} = {}\n", key, csv::format_number(value));
}

inline void line(std::ostream &os, std::string_view key, std::string_view value) {
    os << fmt::format("{:<24} = {}\n", key, value);
}

/// The generator, coil and excitation a scenario resolves to.
struct Setup {
    const config::ScenarioEntry *scenario;
    const config::DeviceEntry *device;
    GeneratorParams generator;
    CoilCircuit coil;
    TaggedAmplitude acceleration;
    double omega;
};

inline Setup resolve_setup(const config::Catalog &catalog, const Options &opt) {
    if (catalog.scenarios.empty())
        throw ConfigError("config defines no scenario");
    const auto &sc =
        opt.scenario.empty() ? catalog.scenarios.front() : catalog.scenario(opt.scenario);
    const auto &dev = catalog.resolve(sc);
    Setup s{&sc, &dev, dev.generator(), dev.coil, sc.acceleration,
            hz_to_rad_per_s(sc.frequency_Hz)};
    if (sc.r_load_ohm)
        s.coil.r_load_ohm = *sc.r_load_ohm;
    if (opt.accel_tag)
        s.acceleration.convention = parse_convention(*opt.accel_tag);
    validate(s.coil);
    return s;
}

inline config::Range pick_range(const std::optional<config::Range> &from_scenario,
                                const Options &opt, const char *what) {
    config::Range r;
    if (from_scenario)
        r = *from_scenario;
    else if (!opt.range_start || !opt.range_stop || !opt.range_points)
        throw ConfigError(std::string("no ") + what +
                          " range: set it in the scenario or pass --start/--stop/--points");
    if (opt.range_start)
        r.start = *opt.range_start;
    if (opt.range_stop)
        r.stop = *opt.range_stop;
    if (opt.range_points)
        r.points = *opt.range_points;
    if (opt.log_spacing)
        r.log_spaced = true;
    if (r.points < 1)
        throw ConfigError(std::string(what) + " range is empty");
    if (r.points > 1 ? r.start >= r.stop : r.start > r.stop)
        throw ConfigError(std::string(what) + " range is reversed or degenerate");
    return r;
}

inline sim::SimConfig pick_sim_config(const Setup &s, const Options &opt, double omega_min,
                                      double omega_max) {
    sim::SimConfig cfg;
    const bool need_default = !(opt.sim_dt || s.scenario->sim_dt_s) ||
                              !(opt.sim_duration || s.scenario->sim_duration_s);
    if (need_default)
        cfg = sim::recommended_config(s.generator, s.coil, omega_min, omega_max);
    if (s.scenario->sim_dt_s)
        cfg.dt_s = *s.scenario->sim_dt_s;
    if (s.scenario->sim_duration_s)
        cfg.duration_s = *s.scenario->sim_duration_s;
    if (s.scenario->sim_settle_fraction)
        cfg.settle_fraction = *s.scenario->sim_settle_fraction;
    if (opt.sim_dt)
        cfg.dt_s = *opt.sim_dt;
    if (opt.sim_duration)
        cfg.duration_s = *opt.sim_duration;
    return cfg;
}

} // namespace detail

// =============================================================================
// Commands
// =============================================================================

/// Closed-form operating point of the scenario, as a key = value report.
inline void cmd_model(const config::Catalog &catalog, const Options &opt, std::ostream &os) {
    const auto s = detail::resolve_setup(catalog, opt);
    const auto &g = s.generator;
    const auto excitation = Excitation::from_acceleration(s.acceleration, s.omega);
    const auto base = base_amplitude_from_acceleration(s.acceleration, s.omega);
    const auto r = evaluate_response(g, s.coil, excitation);
    const double wn = natural_frequency(g);

    detail::line(os, "scenario", s.scenario->name);
    detail::line(os, "device", s.device->record.name);
    detail::line(os, "omega_n_rad_s", wn);
    detail::line(os, "f_n_hz", rad_per_s_to_hz(wn));
    detail::line(os, "drive_frequency_hz", s.scenario->frequency_Hz);
    detail::line(os, "acceleration_m_s2", s.acceleration.value);
    detail::line(os, "accel_tag", to_string(s.acceleration.convention));
    detail::line(os, "base_amplitude_m", base.value);
    detail::line(os, "base_amplitude_peak_m", excitation.amplitude_m());
    detail::line(os, "zeta_parasitic", g.zeta_parasitic);
    detail::line(os, "zeta_electrical", r.zeta_electrical);
    detail::line(os, "zeta_total", r.zeta_total);
    detail::line(os, "z_amplitude_m", r.z_amplitude_m);
    detail::line(os, "phase_rad", r.phase_rad);
    detail::line(os, "p_dissipated_w", r.p_dissipated_W);
    detail::line(os, "p_total_electrical_w", r.p_total_electrical_W);
    detail::line(os, "p_load_w", r.p_load_W);
    detail::line(os, "emf_rms_v", r.emf_rms_V);
    detail::line(os, "v_load_rms_v", r.v_load_rms_V);

    const double c_p = damping_coefficient_from_ratio(g.zeta_parasitic, g);
    if (c_p > 0.0 && s.coil.coupling() > 0.0)
        detail::line(os, "optimal_r_load_ohm", optimal_load(s.coil, c_p));
    else
        detail::line(os, "optimal_r_load_ohm", "n/a");

    const auto check = check_displacement_limit(g, r.z_amplitude_m);
    if (g.displacement_limit_m) {
        detail::line(os, "displacement_limit_m", *g.displacement_limit_m);
        detail::line(os, "displacement_margin_m", *check.margin_m);
    } else {
        detail::line(os, "displacement_limit_m", "none");
    }
    detail::line(os, "displacement_check", check.pass ? "pass" : "fail");

    const auto &rec = s.device->record;
    if (s.device->measured_load_ohm && s.scenario->device_ref) {
        detail::line(os, "measured_power_w", rec.measured_power_W);
        detail::line(os, "measured_load_ohm", *s.device->measured_load_ohm);
        detail::line(os, "measured_v_load_rms_v",
                     load_voltage_from_power(rec.measured_power_W, *s.device->measured_load_ohm));
    }
}

/// Frequency sweep (freq_hz, z_amp_m, emf_rms_v, p_load_w) or load sweep
/// (r_load_ohm, p_load_w, p_total_w) as CSV.
inline void cmd_sweep(const config::Catalog &catalog, const Options &opt, std::ostream &os) {
    auto s = detail::resolve_setup(catalog, opt);
    if (opt.open_circuit)
        s.coil.r_load_ohm = std::numeric_limits<double>::infinity();

    if (opt.sweep_kind == "frequency") {
        const auto freqs = config::expand(detail::pick_range(s.scenario->frequency_range, opt,
                                                             "frequency"));
        csv::Writer out(os, {"freq_hz", "z_amp_m", "emf_rms_v", "p_load_w"});
        if (opt.simulate_sweep) {
            std::vector<double> omegas;
            for (double f : freqs)
                omegas.push_back(hz_to_rad_per_s(f));
            const auto cfg =
                detail::pick_sim_config(s, opt, omegas.front(), omegas.back());
            const auto points =
                sim::frequency_sweep_sim(s.generator, s.coil, s.acceleration, omegas, cfg);
            for (std::size_t i = 0; i < points.size(); ++i) {
                const auto &sum = points[i].summary;
                out.row(std::vector<double>{freqs[i], sum.z_amp_m, sum.emf_rms_V, sum.p_load_avg_W});
            }
        } else {
            for (double f : freqs) {
                const double w = hz_to_rad_per_s(f);
                const auto r = evaluate_response(s.generator, s.coil,
                                                 Excitation::from_acceleration(s.acceleration, w));
                out.row(std::vector<double>{f, r.z_amplitude_m, r.emf_rms_V, r.p_load_W});
            }
        }
    } else if (opt.sweep_kind == "load") {
        const auto loads = config::expand(detail::pick_range(s.scenario->load_range, opt, "load"));
        const auto excitation = Excitation::from_acceleration(s.acceleration, s.omega);
        csv::Writer out(os, {"r_load_ohm", "p_load_w", "p_total_w"});
        for (double r_load : loads) {
            auto coil = s.coil;
            coil.r_load_ohm = r_load;
            const auto r = evaluate_response(s.generator, coil, excitation);
            out.row(std::vector<double>{r_load, r.p_load_W, r.p_total_electrical_W});
        }
    } else {
        throw ConfigError("sweep kind must be 'frequency' or 'load'");
    }
}

/// Transient run of the scenario; report plus optional trace CSV.
inline void cmd_simulate(const config::Catalog &catalog, const Options &opt, std::ostream &os) {
    const auto s = detail::resolve_setup(catalog, opt);
    auto cfg = detail::pick_sim_config(s, opt, s.omega, s.omega);
    cfg.record_trace = !opt.trace_path.empty();
    const auto excitation = Excitation::from_acceleration(s.acceleration, s.omega);
    const auto sum = sim::simulate(s.generator, s.coil, excitation, cfg);
    const auto model = evaluate_response(s.generator, s.coil, excitation);

    detail::line(os, "scenario", s.scenario->name);
    detail::line(os, "dt_s", cfg.dt_s);
    detail::line(os, "duration_s", cfg.duration_s);
    detail::line(os, "z_amp_m", sum.z_amp_m);
    detail::line(os, "model_z_amp_m", model.z_amplitude_m);
    detail::line(os, "phase_rad", sum.phase_rad);
    detail::line(os, "model_phase_rad", model.phase_rad);
    detail::line(os, "v_rel_rms_m_s", sum.v_rel_rms_m_per_s);
    detail::line(os, "emf_rms_v", sum.emf_rms_V);
    detail::line(os, "p_load_avg_w", sum.p_load_avg_W);
    detail::line(os, "p_parasitic_avg_w", sum.p_parasitic_avg_W);
    detail::line(os, "energy_balance_residual", sum.energy_balance_residual);
    for (const auto &w : sum.warnings)
        detail::line(os, "warning", w);

    if (cfg.record_trace) {
        std::ofstream trace(opt.trace_path, std::ios::binary);
        if (!trace)
            throw ConfigError("cannot open trace file '" + opt.trace_path + "'");
        csv::Writer out(trace, {"t_s", "z_m", "zdot_m_s", "emf_v", "p_load_w"});
        for (const auto &p : sum.trace)
            out.row(std::vector<double>{p.t_s, p.z_m, p.zdot_m_s, p.emf_v, p.p_load_w});
    }
}

/// Resonant frequency table: thickness_m then one <material>_hz column each.
inline void cmd_beam(const config::Catalog &catalog, const Options &opt, std::ostream &os) {
    if (catalog.beams.empty())
        throw ConfigError("config defines no beam study");
    const auto &study = opt.beam.empty() ? catalog.beams.front() : catalog.beam_study(opt.beam);

    const auto thicknesses = opt.thicknesses.empty() ? study.thicknesses_m : opt.thicknesses;
    if (thicknesses.empty())
        throw ConfigError("beam study '" + study.name + "' lists no thicknesses");

    std::vector<beam::MaterialProps> materials;
    const auto &names = !opt.materials.empty() ? opt.materials : study.materials;
    if (names.empty())
        materials = catalog.materials;
    else
        for (const auto &n : names)
            materials.push_back(catalog.material(n));
    if (materials.empty())
        throw ConfigError("no materials defined for the beam study");

    beam::BeamSpec base{study.length_m, study.width_m, thicknesses.front(), materials.front(),
                        study.tip_mass_kg};
    const auto grid = beam::frequency_table(base, thicknesses, materials);

    std::vector<std::string> header{"thickness_m"};
    for (const auto &m : materials)
        header.push_back(m.name + "_hz");
    csv::Writer out(os, header);
    for (std::size_t i = 0; i < thicknesses.size(); ++i) {
        std::vector<double> row{thicknesses[i]};
        row.insert(row.end(), grid[i].begin(), grid[i].end());
        out.row(row);
    }
}

/// Devices ranked by acceleration-normalised power density.
inline void cmd_compare(const config::Catalog &catalog, const Options &opt, std::ostream &os) {
    if (!opt.target_accel)
        throw ConfigError("compare needs --target-accel");
    if (catalog.devices.empty())
        throw ConfigError("catalog has no devices");
    const TaggedAmplitude target{*opt.target_accel,
                                 opt.accel_tag ? parse_convention(*opt.accel_tag)
                                               : AmplitudeConvention::rms};
    std::vector<analysis::DeviceRecord> records;
    for (const auto &d : catalog.devices)
        records.push_back(d.record);
    const auto rows = analysis::compare_catalog(records, target);

    csv::Writer out(os, {"rank", "name", "measured_power_w", "measured_accel_m_s2", "accel_tag",
                         "normalized_power_w", "density_nw_per_mm3"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto &r = rows[i];
        out.row(std::vector<std::string>{
            std::to_string(i + 1), r.name, csv::format_number(r.measured_power_W),
            csv::format_number(r.measured_at_acceleration.value),
            std::string(to_string(r.measured_at_acceleration.convention)),
            csv::format_number(r.normalized_power_W), csv::format_number(r.density_nW_per_mm3)});
    }
}

// =============================================================================
// Entry point
// =============================================================================

/// Parses `args` (without the program name) and runs one subcommand.
inline int run(std::vector<std::string> args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Resonant electromagnetic energy-harvester modelling tool", "harvest"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.config_paths, "Config file(s); sections are merged")
        ->check(CLI::ExistingFile);
    app.add_option("--out", opt.out_path, "Write the report/CSV here instead of stdout");
    app.add_option("--accel-tag", opt.accel_tag, "Acceleration convention: peak or rms")
        ->check(CLI::IsMember({"peak", "rms"}));
    app.add_option("--target-accel", opt.target_accel, "Normalisation acceleration [m/s^2]");

    auto *model = app.add_subcommand("model", "Closed-form operating point of a scenario");
    model->add_option("--scenario", opt.scenario, "Scenario name (default: first)");

    auto *sweep = app.add_subcommand("sweep", "Frequency or load sweep as CSV");
    sweep->add_option("--scenario", opt.scenario, "Scenario name (default: first)");
    sweep->add_option("--kind", opt.sweep_kind, "frequency or load")
        ->check(CLI::IsMember({"frequency", "load"}));
    sweep->add_option("--start", opt.range_start, "Range start [Hz or ohm]");
    sweep->add_option("--stop", opt.range_stop, "Range stop [Hz or ohm]");
    sweep->add_option("--points", opt.range_points, "Number of points");
    sweep->add_flag("--log", opt.log_spacing, "Logarithmic spacing");
    sweep->add_flag("--open-circuit", opt.open_circuit, "Sweep with the load disconnected");
    sweep->add_flag("--simulate", opt.simulate_sweep, "Use transient simulation per point");
    sweep->add_option("--dt", opt.sim_dt, "Simulation step [s] (with --simulate)");
    sweep->add_option("--duration", opt.sim_duration, "Simulated time [s] (with --simulate)");

    auto *simulate = app.add_subcommand("simulate", "Transient simulation of a scenario");
    simulate->add_option("--scenario", opt.scenario, "Scenario name (default: first)");
    simulate->add_option("--trace", opt.trace_path, "Write the full trace CSV here");
    simulate->add_option("--dt", opt.sim_dt, "Integration step [s]");
    simulate->add_option("--duration", opt.sim_duration, "Simulated time [s]");

    auto *beam_cmd = app.add_subcommand("beam", "Cantilever frequency table as CSV");
    beam_cmd->add_option("--beam", opt.beam, "Beam study name (default: first)");
    beam_cmd->add_option("--thickness", opt.thicknesses, "Thicknesses [m], overrides the study")
        ->delimiter(',');
    beam_cmd->add_option("--material", opt.materials, "Material names, overrides the study")
        ->delimiter(',');

    auto *compare = app.add_subcommand("compare", "Rank catalog devices by power density");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    try {
        const auto catalog = config::load_files({opt.config_paths.begin(), opt.config_paths.end()});
        detail::Output output(opt.out_path, out);
        auto &os = output.stream();
        try {
            if (model->parsed())
                cmd_model(catalog, opt, os);
            else if (sweep->parsed())
                cmd_sweep(catalog, opt, os);
            else if (simulate->parsed())
                cmd_simulate(catalog, opt, os);
            else if (beam_cmd->parsed())
                cmd_beam(catalog, opt, os);
            else if (compare->parsed())
                cmd_compare(catalog, opt, os);
        } catch (const sim::SweepPointError &e) {
            err << "error: " << e.what() << '\n';
            std::rethrow_exception(e.cause());
        }
        return kSuccess;
    } catch (const NotSettledError &e) {
        err << "error: " << e.what() << '\n';
        return kNotSettled;
    } catch (const PreconditionError &e) {
        err << "error: " << e.what() << '\n';
        return kPreconditionFailure;
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidParameter &e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

inline int run(int argc, const char *const *argv, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args), out, err);
}

} // namespace harvest::cli
