// scenario.cpp — JSON scenario ingestion, built-in configurations, and
// deterministic artifact emission.

#include "qls/scenario.hpp"
#include "qls/intensity.hpp"
#include "qls/pgstate.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace qls::scenario {

using json = nlohmann::ordered_json;

namespace {

// ------------------------------ JSON helpers ----------------------------------

struct Violations {
    json list = json::array();
    void add(const std::string& path, const std::string& message) {
        list.push_back(json{{"path", path}, {"message", message}});
    }
    bool empty() const { return list.empty(); }
    [[noreturn]] void raise() const { throw ValidationError(list.dump()); }
    void raise_if_any() const {
        if (!empty()) raise();
    }
};

bool parse_complex(const json& j, const std::string& path, Violations& v, Complex& out) {
    if (j.is_number()) {
        out = Complex{j.get<double>(), 0.0};
        return true;
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        out = Complex{j[0].get<double>(), j[1].get<double>()};
        return true;
    }
    v.add(path, "expected a number or a two-element [re, im] array");
    return false;
}

bool parse_matrix(const json& j, const std::string& path, Violations& v, Matrix& out) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        v.add(path, "expected a non-empty array of rows");
        return false;
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    if (cols == 0) {
        v.add(path, "rows must be non-empty");
        return false;
    }
    out = Matrix::Zero(static_cast<Index>(rows), static_cast<Index>(cols));
    bool ok = true;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            v.add(path + "[" + std::to_string(r) + "]", "ragged matrix row");
            ok = false;
            continue;
        }
        for (std::size_t c = 0; c < cols; ++c) {
            Complex z;
            if (parse_complex(j[r][c], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                              v, z))
                out(static_cast<Index>(r), static_cast<Index>(c)) = z;
            else
                ok = false;
        }
    }
    return ok;
}

bool parse_complex_list(const json& j, const std::string& path, Violations& v,
                        std::vector<Complex>& out) {
    if (!j.is_array() || j.empty()) {
        v.add(path, "expected a non-empty array");
        return false;
    }
    out.clear();
    bool ok = true;
    for (std::size_t k = 0; k < j.size(); ++k) {
        Complex z;
        if (parse_complex(j[k], path + "[" + std::to_string(k) + "]", v, z))
            out.push_back(z);
        else
            ok = false;
    }
    return ok;
}

// ------------------------------- Pulse parsing ---------------------------------

fields::PulseFn parse_pulse(const json& j, const std::string& path, const GridSpec& grid,
                            Violations& v) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
        v.add(path, "expected an object with a string 'family' field");
        return nullptr;
    }
    const std::string family = j["family"].get<std::string>();
    try {
        if (family == "exponential") {
            if (!j.contains("gamma") || !j["gamma"].is_number()) {
                v.add(path + ".gamma", "exponential pulses need a numeric decay rate");
                return nullptr;
            }
            const double t_start = j.value("t_start", 0.0);
            return fields::exponential_pulse(j["gamma"].get<double>(), t_start);
        }
        if (family == "rational") {
            std::vector<Complex> coeff, poles;
            if (!parse_complex_list(j.value("coeff", json::array()), path + ".coeff", v, coeff) |
                !parse_complex_list(j.value("poles", json::array()), path + ".poles", v, poles))
                return nullptr;
            return fields::rational_pulse(coeff, poles);
        }
        if (family == "samples") {
            std::vector<Complex> values;
            if (!parse_complex_list(j.value("values", json::array()), path + ".values", v, values))
                return nullptr;
            const TimeGrid g = grid.make();
            if (values.size() != g.size) {
                v.add(path + ".values", "sample count " + std::to_string(values.size()) +
                                            " does not match the grid (" + std::to_string(g.size) +
                                            " nodes)");
                return nullptr;
            }
            return fields::sampled_pulse(g, std::move(values));
        }
    } catch (const ValidationError& e) {
        v.add(path, e.what());
        return nullptr;
    }
    v.add(path + ".family", "unknown pulse family '" + family +
                                "' (expected exponential | rational | samples)");
    return nullptr;
}

// Support-fit check: the grid must carry essentially all of the pulse's mass.
void check_tail_mass(const fields::PulseFn& nu, const GridSpec& grid, const std::string& path,
                     Violations& v) {
    if (!nu) return;
    const TimeGrid g = grid.make();
    const double span = grid.t_max - grid.t_min;
    const TimeGrid wide =
        TimeGrid::from_range(grid.t_min - 0.5 * span, grid.t_max + 0.5 * span, grid.dt);
    const double inside = fields::pulse_norm_sq(nu, g);
    const double total = fields::pulse_norm_sq(nu, wide);
    if (total - inside > 1e-6)
        v.add(path, "pulse mass outside the grid is " + std::to_string(total - inside) +
                        " (must be < 1e-6); widen [t_min, t_max]");
}

// ------------------------------ System parsing --------------------------------

model::StateSpaceModel parse_system(const json& j, const std::string& path, Violations& v) {
    if (!j.is_object()) {
        v.add(path, "expected an object with 'builtin', 'params', or 'model'");
        return {};
    }
    try {
        if (j.contains("builtin")) {
            const std::string name = j["builtin"].is_string() ? j["builtin"].get<std::string>() : "";
            if (name == "cavity")
                return model::realize(model::cavity(j.value("kappa", 2.0), j.value("omega", 1.0)));
            if (name == "dpa")
                return model::realize(model::dpa(j.value("kappa", 4.0), j.value("epsilon", 1.0)));
            if (name == "beamsplitter")
                return model::realize(model::beamsplitter(j.value("eta", 0.5)));
            if (name == "cavity_passthrough")
                return model::realize(
                    model::cavity_with_passthrough(j.value("kappa", 2.0), j.value("omega", 1.0)));
            v.add(path + ".builtin", "unknown builtin system '" + name + "'");
            return {};
        }
        if (j.contains("params")) {
            const json& p = j["params"];
            model::SystemParams sp;
            bool ok = true;
            ok &= parse_matrix(p.value("S_minus", json::array()), path + ".params.S_minus", v,
                               sp.S_minus);
            ok &= parse_matrix(p.value("C_minus", json::array()), path + ".params.C_minus", v,
                               sp.C_minus);
            if (ok) {
                const Index m = sp.S_minus.rows(), n = sp.C_minus.cols();
                sp.C_plus = Matrix::Zero(m, n);
                sp.Omega_minus = Matrix::Zero(n, n);
                sp.Omega_plus = Matrix::Zero(n, n);
                if (p.contains("C_plus"))
                    ok &= parse_matrix(p["C_plus"], path + ".params.C_plus", v, sp.C_plus);
                if (p.contains("Omega_minus"))
                    ok &= parse_matrix(p["Omega_minus"], path + ".params.Omega_minus", v,
                                       sp.Omega_minus);
                if (p.contains("Omega_plus"))
                    ok &= parse_matrix(p["Omega_plus"], path + ".params.Omega_plus", v,
                                       sp.Omega_plus);
            }
            if (!ok) return {};
            return model::realize(sp);
        }
        if (j.contains("model")) {
            const json& m = j["model"];
            Matrix A, B, C, S;
            bool ok = true;
            ok &= parse_matrix(m.value("A", json::array()), path + ".model.A", v, A);
            ok &= parse_matrix(m.value("B", json::array()), path + ".model.B", v, B);
            ok &= parse_matrix(m.value("C", json::array()), path + ".model.C", v, C);
            ok &= parse_matrix(m.value("S", json::array()), path + ".model.S", v, S);
            if (!ok) return {};
            return model::from_matrices(A, B, C, S);
        }
    } catch (const ValidationError& e) {
        v.add(path, e.what());
        return {};
    }
    v.add(path, "one of 'builtin', 'params', or 'model' is required");
    return {};
}

// ------------------------------- Emission -------------------------------------

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.11e", x);
    return buf;
}

json grid_meta(const TimeGrid& g) {
    return json{{"t_min", g.t0}, {"t_max", g.t_end()}, {"dt", g.dt}, {"samples", g.size}};
}

// One tabular artifact: CSV (header + formatted rows) or the same table as JSON.
void write_table(const std::filesystem::path& file, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows, const std::string& format,
                 const TimeGrid& grid) {
    std::ofstream out(file, std::ios::binary); // binary: LF endings everywhere
    if (!out) throw ValidationError("Emit: cannot open " + file.string() + " for writing");
    if (format == "csv") {
        for (std::size_t c = 0; c < header.size(); ++c)
            out << header[c] << (c + 1 < header.size() ? "," : "");
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << fmt(row[c]) << (c + 1 < row.size() ? "," : "");
            out << "\n";
        }
    } else {
        json doc;
        doc["grid"] = grid_meta(grid);
        doc["columns"] = header;
        doc["data"] = json::array();
        for (const auto& row : rows) doc["data"].push_back(row);
        out << doc.dump(1) << "\n";
    }
}

std::vector<std::string> trace_header(Index m) {
    std::vector<std::string> h{"t"};
    for (Index j = 0; j < m; ++j)
        for (Index k = 0; k < m; ++k) {
            const std::string tag = std::to_string(j + 1) + std::to_string(k + 1);
            h.push_back("n_" + tag + "_re");
            h.push_back("n_" + tag + "_im");
        }
    h.push_back("trace");
    return h;
}

void emit_trace(const intensity::IntensityTrace& tr, const std::filesystem::path& file,
                const std::string& format) {
    const Index m = tr.values.empty() ? 0 : tr.values[0].rows();
    std::vector<std::vector<double>> rows;
    rows.reserve(tr.grid.size);
    for (std::size_t i = 0; i < tr.grid.size; ++i) {
        std::vector<double> row{tr.grid.time(i)};
        for (Index j = 0; j < m; ++j)
            for (Index k = 0; k < m; ++k) {
                row.push_back(tr.values[i](j, k).real());
                row.push_back(tr.values[i](j, k).imag());
            }
        row.push_back(tr.total[i]);
        rows.push_back(std::move(row));
    }
    write_table(file, trace_header(m), rows, format, tr.grid);
}

void emit_pulses(const fields::PulseMatrix& xi, const std::filesystem::path& file,
                 const std::string& format) {
    const Index m = xi.n_ch;
    std::vector<std::string> header{"t"};
    for (const char* part : {"xi_minus", "xi_plus"})
        for (Index j = 0; j < m; ++j)
            for (Index k = 0; k < m; ++k) {
                const std::string tag =
                    std::string(part) + "_" + std::to_string(j + 1) + std::to_string(k + 1);
                header.push_back(tag + "_re");
                header.push_back(tag + "_im");
            }
    std::vector<std::vector<double>> rows;
    rows.reserve(xi.grid.size);
    for (std::size_t i = 0; i < xi.grid.size; ++i) {
        std::vector<double> row{xi.grid.time(i)};
        for (const Matrix* part : {&xi.xi_minus[i], &xi.xi_plus[i]})
            for (Index j = 0; j < m; ++j)
                for (Index k = 0; k < m; ++k) {
                    row.push_back((*part)(j, k).real());
                    row.push_back((*part)(j, k).imag());
                }
        rows.push_back(std::move(row));
    }
    write_table(file, header, rows, format, xi.grid);
}

void emit_covariance(const fields::CovKernel& R, const TimeGrid& grid,
                     const std::filesystem::path& delta_file,
                     const std::filesystem::path& smooth_file, const std::string& format) {
    {
        json doc;
        doc["channels"] = R.n_ch;
        doc["delta"] = json::array();
        for (Index r = 0; r < R.delta_coeff.rows(); ++r) {
            json row = json::array();
            for (Index c = 0; c < R.delta_coeff.cols(); ++c)
                row.push_back(json::array(
                    {R.delta_coeff(r, c).real(), R.delta_coeff(r, c).imag()}));
            doc["delta"].push_back(row);
        }
        std::ofstream out(delta_file, std::ios::binary);
        if (!out) throw ValidationError("Emit: cannot open " + delta_file.string());
        out << doc.dump(1) << "\n";
    }

    const Index d = 2 * R.n_ch;
    std::vector<std::string> header{"t", "r"};
    for (Index j = 0; j < d; ++j)
        for (Index k = 0; k < d; ++k) {
            const std::string tag = std::to_string(j + 1) + std::to_string(k + 1);
            header.push_back("R_" + tag + "_re");
            header.push_back("R_" + tag + "_im");
        }
    const std::size_t stride = std::max<std::size_t>(1, (grid.size - 1) / 100);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < grid.size; i += stride)
        for (std::size_t l = 0; l < grid.size; l += stride) {
            const Matrix v = R.smooth(grid.time(i), grid.time(l));
            std::vector<double> row{grid.time(i), grid.time(l)};
            for (Index j = 0; j < d; ++j)
                for (Index k = 0; k < d; ++k) {
                    row.push_back(v(j, k).real());
                    row.push_back(v(j, k).imag());
                }
            rows.push_back(std::move(row));
        }
    write_table(smooth_file, header, rows, format, grid);
}

json pulses_json(const fields::PulseMatrix& xi) {
    // Decimate long grids so state JSON stays reviewable.
    const std::size_t stride = std::max<std::size_t>(1, (xi.grid.size - 1) / 2000);
    json doc;
    doc["grid"] = grid_meta(xi.grid);
    doc["stride"] = stride;
    doc["n_ch"] = xi.n_ch;
    json xm = json::array(), xp = json::array();
    for (std::size_t i = 0; i < xi.grid.size; i += stride) {
        json rm = json::array(), rp = json::array();
        for (Index j = 0; j < xi.n_ch; ++j)
            for (Index k = 0; k < xi.n_ch; ++k) {
                rm.push_back(json::array(
                    {xi.xi_minus[i](j, k).real(), xi.xi_minus[i](j, k).imag()}));
                rp.push_back(json::array(
                    {xi.xi_plus[i](j, k).real(), xi.xi_plus[i](j, k).imag()}));
            }
        xm.push_back(std::move(rm));
        xp.push_back(std::move(rp));
    }
    doc["xi_minus"] = std::move(xm);
    doc["xi_plus"] = std::move(xp);
    return doc;
}

json state_json(const fields::PhotonGaussianState& st) {
    json doc;
    doc["norm"] = st.norm;
    doc["norm_tol"] = st.norm_tol;
    doc["photons"] = st.photons;
    doc["xi"] = pulses_json(st.xi);
    return doc;
}

} // namespace

// ------------------------------ Parse/builtins --------------------------------

Scenario parse_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        Violations v;
        v.add("$", std::string("not valid JSON: ") + e.what());
        v.raise();
    }
    Violations v;
    if (!j.is_object()) {
        v.add("$", "scenario document must be a JSON object");
        v.raise();
    }

    if (j.contains("seed_example")) {
        const std::string name =
            j["seed_example"].is_string() ? j["seed_example"].get<std::string>() : "";
        if (j.contains("system") || j.contains("input"))
            v.add("$.seed_example", "seed_example cannot be combined with system/input overrides");
        Scenario sc;
        try {
            sc = builtin(name, j.contains("grid") && j["grid"].contains("dt") &&
                                       j["grid"]["dt"].is_number()
                                   ? j["grid"]["dt"].get<double>()
                                   : 0.0);
        } catch (const ValidationError& e) {
            v.add("$.seed_example", e.what());
        }
        v.raise_if_any();
        if (j.contains("outputs") && j["outputs"].is_array()) {
            sc.outputs.clear();
            for (const auto& o : j["outputs"]) sc.outputs.push_back(o.get<std::string>());
        }
        return sc;
    }

    Scenario sc;
    sc.name = j.value("name", std::string("custom"));

    // Grid first: sampled pulses validate against it.
    if (!j.contains("grid") || !j["grid"].is_object()) {
        v.add("$.grid", "required object {t_min, t_max, dt}");
    } else {
        const json& g = j["grid"];
        sc.grid.t_min = g.value("t_min", 0.0);
        sc.grid.t_max = g.value("t_max", 0.0);
        sc.grid.dt = g.value("dt", 0.0);
        if (!(sc.grid.dt > 0.0)) v.add("$.grid.dt", "step must be positive");
        if (!(sc.grid.t_min < sc.grid.t_max)) v.add("$.grid", "t_min must be below t_max");
        if (sc.grid.dt > 0.0 && (sc.grid.t_max - sc.grid.t_min) / sc.grid.dt > 2e6)
            v.add("$.grid", "grid has more than 2e6 samples; refusing");
    }

    if (!j.contains("system")) {
        v.add("$.system", "required");
    } else {
        sc.system = parse_system(j["system"], "$.system", v);
    }

    if (!j.contains("input") || !j["input"].is_object() || !j["input"].contains("kind")) {
        v.add("$.input", "required object with a 'kind' field (vacuum | photons | photon_coherent)");
    } else if (v.empty()) {
        const json& in = j["input"];
        const std::string kind = in["kind"].is_string() ? in["kind"].get<std::string>() : "";
        if (kind == "vacuum") {
            sc.input = InputKind::vacuum;
        } else if (kind == "photons") {
            sc.input = InputKind::photons;
            if (!in.contains("pulses") || !in["pulses"].is_array() || in["pulses"].empty()) {
                v.add("$.input.pulses", "photons input needs a non-empty pulse array");
            } else {
                for (std::size_t k = 0; k < in["pulses"].size(); ++k) {
                    fields::PulseFn p = parse_pulse(
                        in["pulses"][k], "$.input.pulses[" + std::to_string(k) + "]", sc.grid, v);
                    if (p) check_tail_mass(p, sc.grid,
                                           "$.input.pulses[" + std::to_string(k) + "]", v);
                    sc.pulses.push_back(std::move(p));
                }
                if (v.empty() &&
                    sc.pulses.size() != static_cast<std::size_t>(sc.system.n_ch()))
                    v.add("$.input.pulses", "need exactly one pulse per channel (" +
                                                std::to_string(sc.system.n_ch()) + ")");
            }
        } else if (kind == "photon_coherent") {
            sc.input = InputKind::photon_coherent;
            if (!in.contains("pulse"))
                v.add("$.input.pulse", "photon_coherent input needs a photon pulse");
            else {
                sc.photon_pulse = parse_pulse(in["pulse"], "$.input.pulse", sc.grid, v);
                if (sc.photon_pulse) check_tail_mass(sc.photon_pulse, sc.grid, "$.input.pulse", v);
            }
            if (in.contains("alpha"))
                sc.alpha = parse_pulse(in["alpha"], "$.input.alpha", sc.grid, v);
            if (v.empty() && sc.system.n_ch() != 2)
                v.add("$.input", "photon_coherent input requires a two-channel system");
        } else {
            v.add("$.input.kind", "unknown input kind '" + kind + "'");
        }
    }

    const std::set<std::string> known{"intensity_transient", "intensity_steady", "pulses",
                                      "covariance", "state_transfer"};
    if (!j.contains("outputs") || !j["outputs"].is_array() || j["outputs"].empty()) {
        v.add("$.outputs", "required non-empty array of products");
    } else {
        for (std::size_t k = 0; k < j["outputs"].size(); ++k) {
            const json& o = j["outputs"][k];
            const std::string name = o.is_string() ? o.get<std::string>() : "";
            if (!known.count(name)) {
                v.add("$.outputs[" + std::to_string(k) + "]", "unknown product '" + name + "'");
                continue;
            }
            sc.outputs.push_back(name);
        }
        if (sc.input == InputKind::photon_coherent)
            for (const std::string& o : sc.outputs)
                if (o == "intensity_transient" || o == "intensity_steady")
                    v.add("$.outputs", "intensity products are not defined for mixed "
                                       "photon+coherent inputs");
        if (sc.input == InputKind::vacuum)
            for (const std::string& o : sc.outputs)
                if (o == "state_transfer")
                    v.add("$.outputs", "state_transfer requires a photon-carrying input");
    }

    v.raise_if_any();
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("Scenario: cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

std::vector<std::string> builtin_names() {
    return {"cavity", "dpa", "beamsplitter", "photon_coherent", "shaper"};
}

Scenario builtin(const std::string& name, double dt_override) {
    Scenario sc;
    sc.name = name;
    sc.grid = GridSpec{-2.0, 20.0, dt_override > 0.0 ? dt_override : 1e-3};

    if (name == "cavity") {
        sc.system = model::realize(model::cavity(2.0, 1.0));
        sc.input = InputKind::photons;
        sc.pulses = {fields::exponential_pulse(1.0)};
        sc.outputs = {"pulses", "intensity_transient", "intensity_steady", "covariance",
                      "state_transfer"};
    } else if (name == "dpa") {
        sc.system = model::realize(model::dpa(4.0, 1.0));
        sc.input = InputKind::photons;
        sc.pulses = {fields::exponential_pulse(1.0)};
        sc.outputs = {"pulses", "intensity_transient", "intensity_steady", "covariance",
                      "state_transfer"};
    } else if (name == "beamsplitter") {
        sc.system = model::realize(model::beamsplitter(0.5));
        sc.input = InputKind::photons;
        sc.pulses = {fields::exponential_pulse(1.0), fields::exponential_pulse(1.0)};
        sc.outputs = {"pulses", "state_transfer"};
        sc.beamsplitter_eta = 0.5;
    } else if (name == "photon_coherent") {
        sc.system = model::realize(model::cavity_with_passthrough(2.0, 1.0));
        sc.input = InputKind::photon_coherent;
        sc.photon_pulse = fields::exponential_pulse(1.0);
        sc.alpha = fields::rational_pulse({Complex{1.0, 0.0}}, {Complex{-1.0, 0.0}});
        sc.outputs = {"pulses", "covariance", "state_transfer"};
    } else if (name == "shaper") {
        // Cascade of the two first-order all-pass sections; the matching input
        // pulse is the unit-norm exponential with decay 2.
        const synthesis::RationalAllPass d1 = synthesis::allpass_section(Complex{-3.0, 0.0});
        const synthesis::RationalAllPass d2 = synthesis::allpass_section(Complex{-1.0, -1.0});
        sc.system = synthesis::cascade(synthesis::synthesize(d1), synthesis::synthesize(d2));
        sc.input = InputKind::photons;
        sc.pulses = {fields::exponential_pulse(2.0)};
        sc.outputs = {"pulses", "state_transfer"};
    } else {
        throw ValidationError("Scenario: unknown builtin '" + name +
                              "' (expected cavity | dpa | beamsplitter | photon_coherent | shaper)");
    }
    return sc;
}

// ---------------------------------- Run ---------------------------------------

namespace {

RunResult run_products(const Scenario& sc, const std::vector<std::string>& products,
                       const std::string& out_dir, const std::string& format) {
    namespace fs = std::filesystem;
    if (format != "csv" && format != "json")
        throw ValidationError("Run: format must be 'csv' or 'json', got '" + format + "'");
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    const TimeGrid grid = sc.grid.make();
    const Index m = sc.system.n_ch();
    const std::string ext = format == "csv" ? ".csv" : ".json";

    // Input pulse matrix for plain photon/vacuum inputs.
    fields::PulseMatrix xi_in;
    if (sc.input == InputKind::photons)
        xi_in = fields::photon_pulses(grid, sc.pulses);
    else if (sc.input == InputKind::vacuum)
        xi_in = fields::make_pulse_matrix(grid, m, nullptr, nullptr);

    RunResult res;
    json manifest;
    manifest["scenario"] = sc.name;
    manifest["grid"] = grid_meta(grid);
    manifest["format"] = format;
    manifest["version"] = "0.1.0";
    manifest["modules"] = json::object();
    for (const char* mod : {"dmat", "linalg", "model", "response", "fields", "intensity",
                            "pgstate", "synthesis", "scenario"})
        manifest["modules"][mod] = "0.1.0";
    manifest["files"] = json::array();
    auto record = [&](const std::string& file, const std::string& product) {
        res.files.push_back(file);
        manifest["files"].push_back(json{{"name", file}, {"product", product}});
    };

    // Shared intermediates, computed at most once.
    std::optional<fields::PulseMatrix> xi_out;
    std::optional<pgstate::TransferResult> transfer;
    auto ensure_transfer = [&]() -> const pgstate::TransferResult& {
        if (!transfer) {
            if (sc.input == InputKind::photon_coherent)
                transfer = pgstate::photon_coherent_transfer(sc.system, sc.photon_pulse, sc.alpha,
                                                             grid);
            else
                transfer = pgstate::transfer_state(
                    sc.system, pgstate::make_state(xi_in, fields::vacuum_cov(m)));
        }
        return *transfer;
    };
    auto ensure_xi_out = [&]() -> const fields::PulseMatrix& {
        if (!xi_out) {
            if (sc.input == InputKind::photon_coherent)
                xi_out = ensure_transfer().output.xi;
            else
                xi_out = intensity::steady_pulses(sc.system, xi_in);
        }
        return *xi_out;
    };

    for (const std::string& product : products) {
        if (product == "pulses") {
            const fields::PulseMatrix& in_mat =
                sc.input == InputKind::photon_coherent ? ensure_transfer().input.xi : xi_in;
            emit_pulses(in_mat, dir / ("pulses_in" + ext), format);
            record("pulses_in" + ext, product);
            emit_pulses(ensure_xi_out(), dir / ("pulses_out" + ext), format);
            record("pulses_out" + ext, product);
        } else if (product == "intensity_transient") {
            const auto states = intensity::integrate_transient(sc.system, xi_in, grid);
            emit_trace(intensity::transient_intensity(sc.system, states, xi_in),
                       dir / ("intensity_transient" + ext), format);
            record("intensity_transient" + ext, product);
        } else if (product == "intensity_steady") {
            emit_trace(intensity::steady_intensity(sc.system, ensure_xi_out()),
                       dir / ("intensity_steady" + ext), format);
            record("intensity_steady" + ext, product);
        } else if (product == "covariance") {
            fields::CovKernel R_in;
            if (sc.input == InputKind::photons)
                R_in = fields::vacuum_cov(m);
            else if (sc.input == InputKind::vacuum)
                R_in = fields::vacuum_cov(m);
            else
                R_in = sc.alpha ? fields::coherent_channel2_cov(sc.alpha) : fields::vacuum_cov(2);
            fields::CovKernel R_out = intensity::covariance_transfer(sc.system, R_in, grid);
            if (sc.input == InputKind::photons)
                R_out = fields::photon_cov(ensure_xi_out(), std::move(R_out));
            emit_covariance(R_out, grid, dir / "covariance_delta.json",
                            dir / ("covariance_smooth" + ext), format);
            record("covariance_delta.json", product);
            record("covariance_smooth" + ext, product);
        } else if (product == "state_transfer") {
            const pgstate::TransferResult& tr = ensure_transfer();
            json doc;
            doc["input"] = state_json(tr.input);
            doc["output"] = state_json(tr.output);
            if (sc.beamsplitter_eta && sc.pulses.size() == 2) {
                const auto dec = pgstate::beamsplitter_coefficients(*sc.beamsplitter_eta,
                                                                    sc.pulses[0], sc.pulses[1],
                                                                    grid);
                doc["beamsplitter"] = json{{"eta", dec.eta},
                                           {"overlap", json::array({dec.overlap.real(),
                                                                    dec.overlap.imag()})},
                                           {"both_arm1", dec.both_arm1},
                                           {"one_each_direct", dec.one_each_direct},
                                           {"one_each_swapped", dec.one_each_swapped},
                                           {"both_arm2", dec.both_arm2},
                                           {"identical_one_each", dec.identical_one_each}};
            }
            if (sc.input == InputKind::photon_coherent && sc.alpha) {
                // Transferred coherent amplitude: channel components of the
                // mean vector pushed through the response.
                auto mean = [&](double t) -> Vector {
                    Vector v = Vector::Zero(4);
                    const Complex a = sc.alpha(t);
                    v(1) = a;
                    v(3) = std::conj(a);
                    return v;
                };
                const auto mean_out = intensity::transfer_vector_fn(sc.system, mean, grid);
                const std::size_t stride = std::max<std::size_t>(1, (grid.size - 1) / 2000);
                json a1 = json::array(), a2 = json::array();
                for (std::size_t i = 0; i < grid.size; i += stride) {
                    const Vector v = mean_out(grid.time(i));
                    a1.push_back(json::array({v(0).real(), v(0).imag()}));
                    a2.push_back(json::array({v(1).real(), v(1).imag()}));
                }
                doc["alpha_out"] = json{{"stride", stride}, {"channel_1", std::move(a1)},
                                        {"channel_2", std::move(a2)}};
            }
            std::ofstream out(dir / "state_transfer.json", std::ios::binary);
            if (!out) throw ValidationError("Emit: cannot open state_transfer.json");
            out << doc.dump(1) << "\n";
            record("state_transfer.json", product);
        }
    }

    const fs::path mpath = dir / "manifest.json";
    std::ofstream mout(mpath, std::ios::binary);
    if (!mout) throw ValidationError("Emit: cannot open manifest.json");
    mout << manifest.dump(1) << "\n";
    res.manifest_path = mpath.string();
    return res;
}

} // namespace

RunResult run(const Scenario& sc, const std::string& out_dir, const std::string& format) {
    return run_products(sc, sc.outputs, out_dir, format);
}

RunResult run_steady(const Scenario& sc, const std::string& out_dir, const std::string& format) {
    std::vector<std::string> products;
    for (const std::string& o : sc.outputs)
        if (o == "pulses" || o == "intensity_steady" || o == "covariance") products.push_back(o);
    if (products.empty()) products = {"pulses", "intensity_steady"};
    return run_products(sc, products, out_dir, format);
}

synthesis::RationalAllPass parse_realization_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("Realization: cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("Realization: not valid JSON: ") + e.what());
    }
    Violations v;
    synthesis::RationalAllPass d;
    if (!j.is_object()) {
        v.add("$", "realization document must be a JSON object");
        v.raise();
    }
    parse_matrix(j.value("A", json::array()), "$.A", v, d.A);
    parse_matrix(j.value("B", json::array()), "$.B", v, d.B);
    parse_matrix(j.value("C", json::array()), "$.C", v, d.C);
    if (j.contains("D")) parse_complex(j["D"], "$.D", v, d.D);
    v.raise_if_any();
    return d;
}

} // namespace qls::scenario
