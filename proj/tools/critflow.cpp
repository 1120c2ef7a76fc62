// critflow command line: solve the Dirichlet problem on a configured
// domain, certify the critical-point topology of the solution, and emit
// CSV / SVG / JSON artifacts.
//
//   critflow run <config.json>        full pipeline, artifacts per config
//   critflow mesh <config.json> -o F  generate and save the mesh only
//   critflow accept [--paper-scale] [--negative-control]
//   critflow oracle <name>            radial | halfplane | conformal | reflection
//
// CRITFLOW_THREADS caps assembly parallelism (default 1, deterministic).

#include <iostream>

#include <CLI11.hpp>

#include "critflow/acceptance.hpp"
#include "critflow/config.hpp"
#include "critflow/mesh_io.hpp"
#include "critflow/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"critflow: critical-point topology of divergence-form Dirichlet problems"};
    app.require_subcommand(1);

    std::string config_path, mesh_out = "mesh.txt", oracle_name;
    bool paper_scale = false, negative_control = false;

    CLI::App* cmd_run = app.add_subcommand("run", "run the full pipeline on a config");
    cmd_run->add_option("config", config_path, "problem configuration (JSON)")->required();

    CLI::App* cmd_mesh = app.add_subcommand("mesh", "generate the mesh for a config and save it");
    cmd_mesh->add_option("config", config_path, "problem configuration (JSON)")->required();
    cmd_mesh->add_option("-o,--output", mesh_out, "output mesh file");

    CLI::App* cmd_accept = app.add_subcommand("accept", "run the acceptance criteria");
    cmd_accept->add_flag("--paper-scale", paper_scale, "re-run headline configs at h = 0.005");
    cmd_accept->add_flag("--negative-control", negative_control,
                         "demonstrate failure under a loosened solver tolerance");

    CLI::App* cmd_oracle = app.add_subcommand("oracle", "run one closed-form/transform oracle");
    cmd_oracle->add_option("name", oracle_name, "radial | halfplane | conformal | reflection")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            const critflow::ProblemConfig cfg = critflow::load_config(config_path);
            const critflow::RunResult res = critflow::run(cfg);
            for (const std::string& m : res.messages) std::cerr << m << "\n";
            if (res.analysis) {
                const auto& rep = *res.analysis;
                std::cout << "M = " << res.mesh->hole_count() << ", expected = " << rep.expected
                          << ", total index = " << rep.total_index << "\n";
                for (const auto& p : rep.points)
                    std::cout << "  critical point (" << p.location.x << ", " << p.location.y
                              << ") index " << p.index << "\n";
                std::cout << "hopf exterior " << (rep.hopf_exterior_ok ? "ok" : "VIOLATED")
                          << ", interior " << (rep.hopf_interior_ok ? "ok" : "VIOLATED") << "\n";
            }
            std::cout << "exit " << res.exit_code << "\n";
            return res.exit_code;
        }
        if (cmd_mesh->parsed()) {
            const critflow::ProblemConfig cfg = critflow::load_config(config_path);
            std::optional<critflow::InterfaceCurve> iface;
            if (cfg.mesh.align_interface) iface = cfg.coefficient.interface_curve();
            const critflow::Mesh mesh = critflow::generate_mesh(cfg.domain, cfg.mesh.h, iface);
            critflow::save_mesh(mesh, mesh_out);
            std::cout << mesh.vertex_count() << " vertices, " << mesh.triangle_count()
                      << " triangles -> " << mesh_out << "\n";
            return 0;
        }
        if (cmd_accept->parsed()) {
            critflow::AcceptanceOptions opt;
            opt.paper_scale = paper_scale;
            const auto results = critflow::run_acceptance(opt);
            int failures = critflow::print_acceptance(results, std::cout);
            if (negative_control && !critflow::run_negative_control(std::cout)) ++failures;
            return failures == 0 ? 0 : 1;
        }
        if (cmd_oracle->parsed()) {
            const critflow::Json j = critflow::run_oracle(oracle_name);
            std::cout << j.dump(2) << "\n";
            for (const auto& entry : j.at("oracles"))
                if (!entry.at("pass").get<bool>()) return 2;
            return 0;
        }
    } catch (const critflow::CritflowError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
