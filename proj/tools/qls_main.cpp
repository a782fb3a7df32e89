// qls_main.cpp — command-line driver: scenario simulation, steady-only runs,
// network synthesis from a rational all-pass description, and the built-in
// self-check suite.

#include "qls/model.hpp"
#include "qls/scenario.hpp"
#include "qls/synthesis.hpp"
#include "qls/types.hpp"
#include "qls/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using json = nlohmann::ordered_json;

json matrix_json(const qls::Matrix& M) {
    json rows = json::array();
    for (qls::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (qls::Index c = 0; c < M.cols(); ++c)
            row.push_back(json::array({M(r, c).real(), M(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

qls::scenario::Scenario load_scenario(const std::string& ref, double dt) {
    namespace fs = std::filesystem;
    const auto builtins = qls::scenario::builtin_names();
    const bool is_builtin = std::find(builtins.begin(), builtins.end(), ref) != builtins.end();
    if (fs::exists(ref)) {
        if (dt > 0.0)
            throw qls::ValidationError(
                "CLI: --dt overrides only built-in scenarios; edit the grid in " + ref);
        return qls::scenario::parse_scenario_file(ref);
    }
    if (is_builtin) return qls::scenario::builtin(ref, dt);
    throw qls::ValidationError("CLI: '" + ref +
                               "' is neither a readable file nor a built-in scenario name");
}

void report_run(const qls::scenario::RunResult& res) {
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    std::cout << "manifest: " << res.manifest_path << "\n";
}

int dispatch(const std::string& cmd, const std::string& ref, const std::string& out_dir,
             const std::string& format, double dt, double tol) {
    using namespace qls;
    if (cmd == "simulate" || cmd == "example") {
        const auto sc = load_scenario(ref, dt);
        report_run(scenario::run(sc, out_dir.empty() ? "out/" + sc.name : out_dir, format));
        return 0;
    }
    if (cmd == "steady") {
        const auto sc = load_scenario(ref, dt);
        report_run(scenario::run_steady(sc, out_dir.empty() ? "out/" + sc.name : out_dir, format));
        return 0;
    }
    if (cmd == "synthesize") {
        const synthesis::RationalAllPass d = scenario::parse_realization_file(ref);
        const model::SystemParams params = synthesis::synthesize(d);
        json doc;
        doc["state_dim"] = d.state_dim();
        doc["S_minus"] = matrix_json(params.S_minus);
        doc["C_minus"] = matrix_json(params.C_minus);
        doc["C_plus"] = matrix_json(params.C_plus);
        doc["Omega_minus"] = matrix_json(params.Omega_minus);
        doc["Omega_plus"] = matrix_json(params.Omega_plus);
        doc["tolerance"] = tol;
        const std::string dir = out_dir.empty() ? "out/synthesize" : out_dir;
        std::filesystem::create_directories(dir);
        const std::string file = dir + "/synthesis.json";
        std::ofstream out(file, std::ios::binary);
        if (!out) throw ValidationError("CLI: cannot open " + file + " for writing");
        out << doc.dump(1) << "\n";
        std::cout << "wrote " << file << "\n";
        std::cout << "oscillators: " << params.C_minus.cols()
                  << ", channels: " << params.S_minus.rows() << "\n";
        return 0;
    }
    if (cmd == "verify") {
        const auto report = verify::run_all();
        std::cout << verify::format_report(report);
        return report.all_pass() ? 0 : 2;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Response of quantum linear stochastic systems to photon and "
                 "Gaussian input fields"};
    app.require_subcommand(1);

    std::string out_dir, format = "csv", ref;
    double dt = 0.0, tol = 1e-4;

    auto add_io = [&](CLI::App* sub, bool with_grid) {
        sub->add_option("--out-dir", out_dir, "directory for emitted artifacts");
        if (with_grid) {
            sub->add_option("--dt", dt, "grid step override (built-in scenarios only)")
                ->check(CLI::PositiveNumber);
            sub->add_option("--format", format, "table format")
                ->check(CLI::IsMember({"csv", "json"}));
        }
    };

    auto* sim = app.add_subcommand("simulate", "run a scenario end to end");
    sim->add_option("scenario", ref, "scenario JSON file or built-in name")->required();
    add_io(sim, true);

    auto* steady = app.add_subcommand("steady", "run only the settled-field products");
    steady->add_option("scenario", ref, "scenario JSON file or built-in name")->required();
    add_io(steady, true);

    auto* synth = app.add_subcommand(
        "synthesize", "physical parameters realizing a rational all-pass response");
    synth->add_option("realization", ref, "JSON file with A, B, C, D blocks")->required();
    synth->add_option("--tol", tol, "feasibility tolerance recorded in the artifact");
    add_io(synth, false);

    app.add_subcommand("verify", "run the built-in self-check battery");

    auto* ex = app.add_subcommand("example", "run one of the built-in scenarios");
    ex->add_option("name", ref, "cavity | dpa | beamsplitter | photon_coherent | shaper")
        ->required();
    add_io(ex, true);

    CLI11_PARSE(app, argc, argv);

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return dispatch(cmd, ref, out_dir, format, dt, tol);
    } catch (const qls::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const qls::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const qls::ConsistencyError& e) {
        std::cerr << "consistency error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
