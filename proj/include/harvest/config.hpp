// Loading devices, materials, scenarios and beam studies from INI-style
// config files.
//
// Every section is "[<kind> <name>]" with kind one of device, material,
// scenario or beam. Keys are lower-case and unit-suffixed; unknown keys are
// rejected. Comments are whole lines starting with '#' or ';'. See
// docs/config-format.md for the full key list.
#pragma once

#include "harvest/analysis.hpp"
#include "harvest/beam.hpp"
#include "harvest/errors.hpp"
#include "harvest/model.hpp"
#include "harvest/units.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace harvest::config {

// =============================================================================
// Entries
// =============================================================================

/// A catalog device: its measured figures of merit plus, when given, the
/// lumped-model parameters needed to run the closed-form model on it.
struct DeviceEntry {
    analysis::DeviceRecord record;
    std::optional<double> zeta_parasitic;
    CoilCircuit coil; ///< default: no coil (zero coupling, open circuit)
    std::optional<double> displacement_limit_m;
    std::optional<double> measured_load_ohm;

    GeneratorParams generator() const {
        if (!zeta_parasitic)
            throw ConfigError("device '" + record.name +
                              "' needs zeta_parasitic or q_open_circuit to be modelled");
        detail::require(record.active_mass_kg > 0.0,
                        record.name + ": active_mass_kg must be > 0");
        detail::require(record.resonant_frequency_Hz > 0.0,
                        record.name + ": resonant_frequency_hz must be > 0");
        return make_generator(record.active_mass_kg,
                              hz_to_rad_per_s(record.resonant_frequency_Hz), *zeta_parasitic,
                              displacement_limit_m);
    }
};

struct Range {
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
    bool log_spaced = false;
};

/// Samples of a range; `points == 1` yields just `start`.
inline std::vector<double> expand(const Range &r) {
    detail::require(r.points >= 1, "range must have at least one point");
    detail::require(std::isfinite(r.start) && std::isfinite(r.stop), "range bounds must be finite");
    if (r.points == 1) {
        detail::require(r.start <= r.stop, "range start must not exceed stop");
        return {r.start};
    }
    detail::require(r.start < r.stop, "range start must be below stop");
    if (r.log_spaced)
        detail::require(r.start > 0.0, "log-spaced range needs a positive start");
    std::vector<double> out(static_cast<std::size_t>(r.points));
    for (int i = 0; i < r.points; ++i) {
        const double u = static_cast<double>(i) / (r.points - 1);
        out[i] = r.log_spaced ? r.start * std::pow(r.stop / r.start, u)
                              : r.start + u * (r.stop - r.start);
    }
    out.back() = r.stop;
    return out;
}

struct ScenarioEntry {
    std::string name;
    std::optional<std::string> device_ref;
    std::optional<DeviceEntry> inline_device;
    TaggedAmplitude acceleration{};
    double frequency_Hz = 0.0;
    std::optional<double> r_load_ohm;
    std::optional<Range> frequency_range;
    std::optional<Range> load_range;
    std::optional<double> sim_dt_s;
    std::optional<double> sim_duration_s;
    std::optional<double> sim_settle_fraction;
};

struct BeamEntry {
    std::string name;
    double length_m = 0.0;
    double width_m = 0.0;
    double tip_mass_kg = 0.0;
    std::vector<double> thicknesses_m;
    std::vector<std::string> materials; ///< empty: every material in the catalog
};

struct Catalog {
    std::vector<DeviceEntry> devices;
    std::vector<beam::MaterialProps> materials;
    std::vector<ScenarioEntry> scenarios;
    std::vector<BeamEntry> beams;

    const DeviceEntry &device(std::string_view name) const { return find(devices, name, "device"); }
    const beam::MaterialProps &material(std::string_view name) const {
        return find(materials, name, "material");
    }
    const ScenarioEntry &scenario(std::string_view name) const {
        return find(scenarios, name, "scenario");
    }
    const BeamEntry &beam_study(std::string_view name) const { return find(beams, name, "beam"); }

    /// The scenario's device, inline or resolved by name.
    const DeviceEntry &resolve(const ScenarioEntry &s) const {
        if (s.inline_device)
            return *s.inline_device;
        return device(*s.device_ref);
    }

private:
    static std::string_view name_of(const DeviceEntry &d) { return d.record.name; }
    template <typename T> static std::string_view name_of(const T &x) { return x.name; }

    template <typename T>
    static const T &find(const std::vector<T> &items, std::string_view name, const char *kind) {
        for (const auto &item : items)
            if (name_of(item) == name)
                return item;
        throw ConfigError(std::string("unknown ") + kind + " '" + std::string(name) + "'");
    }
};

// =============================================================================
// Value parsing
// =============================================================================

inline double parse_number(std::string_view text, std::string_view where) {
    while (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() ||
        !std::isfinite(value))
        throw ConfigError(std::string(where) + ": '" + std::string(text) + "' is not a number");
    return value;
}

inline std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string_view item = text.substr(pos, comma - pos);
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front())))
            item.remove_prefix(1);
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back())))
            item.remove_suffix(1);
        if (!item.empty())
            out.emplace_back(item);
        pos = comma + 1;
    }
    return out;
}

namespace detail {

using boost::property_tree::ptree;

/// Typed accessor over one section that tracks which keys were consumed.
class Section {
public:
    Section(std::string label, const ptree &tree) : label_(std::move(label)), tree_(tree) {}

    const std::string &label() const { return label_; }

    bool has(const std::string &key) const { return tree_.find(key) != tree_.not_found(); }

    std::optional<std::string> text(const std::string &key) {
        const auto it = tree_.find(key);
        if (it == tree_.not_found())
            return std::nullopt;
        used_.insert(key);
        return it->second.data();
    }

    std::optional<double> number(const std::string &key) {
        auto t = text(key);
        if (!t)
            return std::nullopt;
        return parse_number(*t, where(key));
    }

    double required_number(const std::string &key) {
        auto v = number(key);
        if (!v)
            throw ConfigError(label_ + ": missing key '" + key + "'");
        return *v;
    }

    /// A resistance that also accepts "open" for an open circuit.
    std::optional<double> resistance(const std::string &key) {
        auto t = text(key);
        if (!t)
            return std::nullopt;
        if (*t == "open")
            return std::numeric_limits<double>::infinity();
        return parse_number(*t, where(key));
    }

    std::optional<int> count(const std::string &key) {
        auto v = number(key);
        if (!v)
            return std::nullopt;
        if (*v < 0 || *v != std::floor(*v) || *v > std::numeric_limits<int>::max())
            throw ConfigError(where(key) + ": expected a non-negative integer");
        return static_cast<int>(*v);
    }

    AmplitudeConvention convention(const std::string &key) {
        auto t = text(key);
        if (!t)
            throw ConfigError(label_ + ": missing key '" + key + "' (peak or rms)");
        try {
            return parse_convention(*t);
        } catch (const InvalidParameter &e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    void reject_unused() const {
        for (const auto &[key, value] : tree_)
            if (!used_.count(key))
                throw ConfigError(label_ + ": unknown key '" + key + "'");
    }

private:
    std::string where(const std::string &key) const { return label_ + " " + key; }

    std::string label_;
    const ptree &tree_;
    std::set<std::string> used_;
};

// Lumped-model keys shared by devices and inline scenarios.
inline void read_model_keys(Section &s, DeviceEntry &d) {
    const auto zeta = s.number("zeta_parasitic");
    const auto q_oc = s.number("q_open_circuit");
    if (zeta && q_oc)
        throw ConfigError(s.label() + ": give zeta_parasitic or q_open_circuit, not both");
    if (q_oc) {
        if (*q_oc <= 0.0)
            throw ConfigError(s.label() + ": q_open_circuit must be > 0");
        d.zeta_parasitic = 1.0 / (2.0 * *q_oc);
    } else {
        d.zeta_parasitic = zeta;
    }
    d.displacement_limit_m = s.number("displacement_limit_m");
    d.measured_load_ohm = s.number("measured_load_ohm");

    if (auto turns = s.count("turns"))
        d.coil.turns = static_cast<unsigned>(*turns);
    d.coil.side_length_m = s.number("side_length_m").value_or(0.0);
    d.coil.flux_density_T = s.number("flux_density_t").value_or(0.0);
    d.coil.r_coil_ohm = s.number("r_coil_ohm").value_or(0.0);
    d.coil.l_coil_H = s.number("l_coil_h").value_or(0.0);
    if (auto r = s.resistance("r_load_ohm"))
        d.coil.r_load_ohm = *r;
    else if (d.measured_load_ohm)
        d.coil.r_load_ohm = *d.measured_load_ohm;

    if (s.has("flux_density_t"))
        d.record.flux_density_T = d.coil.flux_density_T;
    if (s.has("r_coil_ohm"))
        d.record.r_coil_ohm = d.coil.r_coil_ohm;
}

inline DeviceEntry read_device(Section &s, const std::string &name) {
    DeviceEntry d;
    d.record.name = name;
    d.record.volume_mm3 = s.required_number("volume_mm3");
    d.record.active_mass_kg = s.required_number("active_mass_kg");
    d.record.resonant_frequency_Hz = s.required_number("resonant_frequency_hz");
    d.record.measured_power_W = s.required_number("measured_power_w");
    d.record.measured_at_acceleration = {s.required_number("measured_at_acceleration_m_s2"),
                                         s.convention("accel_tag")};
    d.record.notes = s.text("notes").value_or("");
    read_model_keys(s, d);
    analysis::validate(d.record);
    validate(d.coil);
    return d;
}

inline std::optional<Range> read_range(Section &s, const std::string &prefix,
                                       const std::string &unit) {
    const auto start = s.number(prefix + "_start_" + unit);
    const auto stop = s.number(prefix + "_stop_" + unit);
    const auto points = s.count(prefix + "_points");
    const auto spacing = s.text(prefix + "_spacing");
    if (!start && !stop && !points)
        return std::nullopt;
    if (!start || !stop || !points)
        throw ConfigError(s.label() + ": " + prefix + " range needs _start, _stop and _points");
    if (spacing && *spacing != "log" && *spacing != "linear")
        throw ConfigError(s.label() + ": " + prefix + "_spacing must be log or linear");
    return Range{*start, *stop, *points, spacing && *spacing == "log"};
}

inline ScenarioEntry read_scenario(Section &s, const std::string &name) {
    ScenarioEntry sc;
    sc.name = name;
    sc.device_ref = s.text("device");
    if (!sc.device_ref) {
        DeviceEntry d;
        d.record.name = name;
        d.record.active_mass_kg = s.required_number("mass_kg");
        d.record.resonant_frequency_Hz = s.required_number("resonant_frequency_hz");
        read_model_keys(s, d);
        validate(d.coil);
        sc.inline_device = std::move(d);
    }
    sc.acceleration = {s.required_number("acceleration_m_s2"), s.convention("accel_tag")};
    sc.frequency_Hz = s.required_number("frequency_hz");
    if (sc.device_ref)
        sc.r_load_ohm = s.resistance("r_load_ohm");
    sc.frequency_range = read_range(s, "freq", "hz");
    sc.load_range = read_range(s, "load", "ohm");
    sc.sim_dt_s = s.number("sim_dt_s");
    sc.sim_duration_s = s.number("sim_duration_s");
    sc.sim_settle_fraction = s.number("sim_settle_fraction");
    harvest::detail::require(sc.acceleration.value >= 0.0, name + ": acceleration must be >= 0");
    harvest::detail::require(sc.frequency_Hz > 0.0, name + ": frequency_hz must be > 0");
    return sc;
}

inline BeamEntry read_beam(Section &s, const std::string &name) {
    BeamEntry b;
    b.name = name;
    b.length_m = s.required_number("length_m");
    b.width_m = s.required_number("width_m");
    b.tip_mass_kg = s.required_number("tip_mass_kg");
    if (auto list = s.text("thicknesses_m"))
        for (const auto &item : split_list(*list))
            b.thicknesses_m.push_back(parse_number(item, s.label() + " thicknesses_m"));
    if (auto list = s.text("materials"))
        b.materials = split_list(*list);
    return b;
}

template <typename T, typename NameOf>
void check_unique(const std::vector<T> &items, NameOf name_of, const char *kind) {
    std::set<std::string> seen;
    for (const auto &item : items)
        if (!seen.insert(name_of(item)).second)
            throw ConfigError(std::string("duplicate ") + kind + " '" + name_of(item) + "'");
}

} // namespace detail

// =============================================================================
// Loading
// =============================================================================

/// Parses one config document and appends its sections to `catalog`.
inline void load_into(Catalog &catalog, std::istream &in, const std::string &source = "<config>") {
    detail::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    for (const auto &[header, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(source + ": key '" + header + "' outside of any section");
        const auto space = header.find(' ');
        if (space == std::string::npos)
            throw ConfigError(source + ": section [" + header + "] must be '[<kind> <name>]'");
        const std::string kind = header.substr(0, space);
        std::string name = header.substr(space + 1);
        name.erase(0, name.find_first_not_of(' '));
        detail::Section s(source + " [" + header + "]", body);

        try {
            if (kind == "device") {
                catalog.devices.push_back(detail::read_device(s, name));
            } else if (kind == "material") {
                beam::MaterialProps m{name, s.required_number("youngs_modulus_pa"),
                                      s.required_number("density_kg_m3")};
                beam::validate(m);
                catalog.materials.push_back(m);
            } else if (kind == "scenario") {
                catalog.scenarios.push_back(detail::read_scenario(s, name));
            } else if (kind == "beam") {
                catalog.beams.push_back(detail::read_beam(s, name));
            } else {
                throw ConfigError(s.label() + ": unknown section kind '" + kind + "'");
            }
        } catch (const InvalidParameter &e) {
            throw ConfigError(s.label() + ": " + e.what());
        }
        s.reject_unused();
    }

    detail::check_unique(catalog.devices, [](const DeviceEntry &d) { return d.record.name; },
                         "device");
    detail::check_unique(catalog.materials, [](const auto &m) { return m.name; }, "material");
    detail::check_unique(catalog.scenarios, [](const auto &s) { return s.name; }, "scenario");
    detail::check_unique(catalog.beams, [](const auto &b) { return b.name; }, "beam");
}

inline Catalog load_files(const std::vector<std::filesystem::path> &paths) {
    Catalog catalog;
    for (const auto &p : paths) {
        std::ifstream in(p);
        if (!in)
            throw ConfigError("cannot open config file '" + p.string() + "'");
        load_into(catalog, in, p.string());
    }
    for (const auto &s : catalog.scenarios)
        if (s.device_ref)
            catalog.device(*s.device_ref);
    return catalog;
}

inline Catalog load_string(const std::string &text) {
    Catalog catalog;
    std::istringstream in(text);
    load_into(catalog, in);
    return catalog;
}

} // namespace harvest::config
