// scenario.hpp — Scenario ingestion (JSON), built-in worked configurations,
// and deterministic CSV/JSON artifact emission with a manifest.

#pragma once

#include "qls/fields.hpp"
#include "qls/model.hpp"
#include "qls/synthesis.hpp"
#include "qls/types.hpp"

#include <optional>
#include <string>

namespace qls::scenario {

enum class InputKind { vacuum, photons, photon_coherent };

struct GridSpec {
    double t_min = 0.0;
    double t_max = 0.0;
    double dt = 0.0;
    TimeGrid make() const { return TimeGrid::from_range(t_min, t_max, dt); }
};

struct Scenario {
    std::string name = "custom";
    model::StateSpaceModel system;
    InputKind input = InputKind::vacuum;
    std::vector<fields::PulseFn> pulses; // photon pulse per channel (photons input)
    fields::PulseFn photon_pulse;        // photon+coherent: channel-1 photon
    fields::PulseFn alpha;               // photon+coherent: channel-2 amplitude
    GridSpec grid;
    std::vector<std::string> outputs;    // intensity_transient | intensity_steady |
                                         // pulses | covariance | state_transfer
    std::optional<double> beamsplitter_eta; // set for the beamsplitter builtin (HOM record)
};

// Parse and validate a scenario document. All violations are collected and
// reported at once: the ValidationError message is a JSON array of
// {"path": ..., "message": ...} objects.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

// Built-in configurations: cavity | dpa | beamsplitter | photon_coherent |
// shaper. dt_override > 0 replaces the default step (1e-3).
Scenario builtin(const std::string& name, double dt_override = 0.0);

// The names accepted by builtin().
std::vector<std::string> builtin_names();

struct RunResult {
    std::vector<std::string> files; // emitted file names (relative to out_dir)
    std::string manifest_path;
};

// Execute every requested product and write artifacts into out_dir
// (created if missing). format is "csv" or "json" for the trace/pulse tables;
// structural products are always JSON. Deterministic: fixed scientific
// notation (12 significant digits), ',' delimiter, LF endings.
RunResult run(const Scenario& sc, const std::string& out_dir, const std::string& format = "csv");

// Restrict to steady-state products (pulses, intensity_steady, covariance).
RunResult run_steady(const Scenario& sc, const std::string& out_dir,
                     const std::string& format = "csv");

// Parse {"A": ..., "B": ..., "C": ..., "D": ...} (complex entries as [re, im])
// into a realization for the synthesis pipeline.
synthesis::RationalAllPass parse_realization_file(const std::string& path);

} // namespace qls::scenario
