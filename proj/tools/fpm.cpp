// Command-line driver: run single cases, convergence and pollution sweeps,
// and operator-spectrum stability checks; emits CSV artifacts.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fpm/cases.hpp"
#include "fpm/oracles.hpp"
#include "fpm/stability.hpp"

namespace {

struct CommonOpts {
    fpm::CaseOverrides ov;
    std::string out_dir;
    std::string config_file;
};

// Plain key=value lines mirroring the CLI flags; flags override file values.
void apply_config_file(const std::string& path, CommonOpts& opts, const CLI::App& app)
{
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("--config", "cannot open " + path);
    std::string line;
    auto overridden = [&app](const std::string& flag) {
        const auto* opt = app.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) continue;
        if (key == "N" && !overridden("--N")) opts.ov.N = std::stoi(val);
        else if (key == "m" && !overridden("--m")) opts.ov.m = std::stoi(val);
        else if (key == "dt-coeff" && !overridden("--dt-coeff")) opts.ov.dt_coeff = std::stod(val);
        else if (key == "eta" && !overridden("--eta")) opts.ov.eta = std::stod(val);
        else if (key == "h" && !overridden("--h")) opts.ov.h = std::stod(val);
        else if (key == "L" && !overridden("--L")) opts.ov.L = std::stod(val);
        else if (key == "T" && !overridden("--T")) opts.ov.T = std::stod(val);
        else if (key == "out" && !overridden("--out")) opts.out_dir = val;
        else if (key == "snapshot-stride" && !overridden("--snapshot-stride"))
            opts.ov.snapshot_stride = std::stoi(val);
    }
}

void add_common(CLI::App* cmd, CommonOpts& opts)
{
    cmd->add_option("--N", [&opts](const CLI::results_t& r) { opts.ov.N = std::stoi(r[0]); return true; },
                    "grid points per axis");
    cmd->add_option("--m", [&opts](const CLI::results_t& r) { opts.ov.m = std::stoi(r[0]); return true; },
                    "derivatives matched (-1 = non-active penalty)");
    cmd->add_option("--dt-coeff", [&opts](const CLI::results_t& r) { opts.ov.dt_coeff = std::stod(r[0]); return true; },
                    "dt = coeff * dx");
    cmd->add_option("--eta", [&opts](const CLI::results_t& r) { opts.ov.eta = std::stod(r[0]); return true; },
                    "penalty strength eta");
    cmd->add_option("--h", [&opts](const CLI::results_t& r) { opts.ov.h = std::stod(r[0]); return true; },
                    "matching offset h");
    cmd->add_option("--L", [&opts](const CLI::results_t& r) { opts.ov.L = std::stod(r[0]); return true; },
                    "decay length L");
    cmd->add_option("--T", [&opts](const CLI::results_t& r) { opts.ov.T = std::stod(r[0]); return true; },
                    "final time");
    cmd->add_option("--snapshot-stride",
                    [&opts](const CLI::results_t& r) { opts.ov.snapshot_stride = std::stoi(r[0]); return true; },
                    "keep a field snapshot every this many steps");
    cmd->add_option("--out", opts.out_dir, "output directory for CSV artifacts");
    cmd->add_option("--config", opts.config_file, "key=value config file (flags take precedence)");
}

std::vector<int> parse_grids(const std::string& csv)
{
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fourier active-penalty solver for Maxwell's equations with embedded PEC boundaries"};
    app.require_subcommand(1);

    std::string case_id;
    std::string grids = "32,64,128";
    std::string omegas_csv = "10,20,40,80";
    double ppwl = 20.0;
    CommonOpts opts;

    auto* run = app.add_subcommand("run", "run one named case");
    run->add_option("case", case_id, "case id (see list-cases)")->required();
    add_common(run, opts);

    auto* conv = app.add_subcommand("converge", "grid-refinement study for a case");
    conv->add_option("case", case_id)->required();
    conv->add_option("--grids", grids, "comma-separated N list");
    add_common(conv, opts);

    auto* poll = app.add_subcommand("pollution", "fixed-ppwl frequency sweep with FD comparators");
    poll->add_option("--ppwl", ppwl, "grid points per carrier wavelength");
    poll->add_option("--omegas", omegas_csv, "comma-separated carrier frequencies");
    add_common(poll, opts);

    auto* stab = app.add_subcommand("stability", "assemble the evolution operator and check its spectrum");
    stab->add_option("case", case_id)->required();
    add_common(stab, opts);

    app.add_subcommand("list-cases", "print known case ids");

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto* cmd : {run, conv, poll, stab})
            if (cmd->parsed() && !opts.config_file.empty()) apply_config_file(opts.config_file, opts, *cmd);

        if (app.got_subcommand("list-cases")) {
            for (const auto& id : fpm::list_cases()) std::cout << id << '\n';
            return 0;
        }

        if (run->parsed()) {
            const auto setup = fpm::make_case(case_id, opts.ov);
            const std::string out = opts.out_dir.empty() ? ("out_" + case_id) : opts.out_dir;
            const auto result = fpm::run_case(setup, out);
            std::cout << "case " << case_id << ": T=" << result.traj.t_final
                      << " steps=" << result.traj.diagnostics.size() - 1 << '\n';
            if (!std::isnan(result.err_E))
                std::cout << "  Linf(Omega_0) error: E " << result.err_E << "  H " << result.err_H << '\n';
            const auto& last = result.traj.diagnostics.back();
            std::cout << "  energy: physical " << last.energy_physical << "  total " << last.energy_total
                      << "  max|div E| " << last.max_div << '\n';
            std::cout << "  artifacts in " << out << '\n';
            return 0;
        }

        if (conv->parsed()) {
            const int m = opts.ov.m.value_or(0);
            const std::string out = opts.out_dir.empty() ? ("out_" + case_id) : opts.out_dir;
            std::filesystem::create_directories(out);
            const auto rep = fpm::convergence_study(case_id, m, parse_grids(grids), opts.ov,
                                                    out + "/errors.csv");
            std::cout << "case " << case_id << " m=" << m << '\n';
            for (std::size_t i = 0; i < rep.Ns.size(); ++i)
                std::cout << "  N=" << std::setw(5) << rep.Ns[i] << "  Linf_E=" << rep.err_E[i]
                          << "  Linf_H=" << rep.err_H[i] << '\n';
            std::cout << "  fitted rate: E " << rep.rate_E << " (resid " << rep.resid_E << "), H "
                      << rep.rate_H << " (resid " << rep.resid_H << ")\n";
            if (!rep.monotone_E || !rep.monotone_H)
                std::cout << "  warning: non-monotone error sequence\n";
            std::cout << "  wrote " << out << "/errors.csv\n";
            return 0;
        }

        if (poll->parsed()) {
            std::vector<double> omegas;
            for (int n : parse_grids(omegas_csv)) omegas.push_back(n);
            const int m = opts.ov.m.value_or(1);
            const std::string out = opts.out_dir.empty() ? "out_pollution" : opts.out_dir;
            std::filesystem::create_directories(out);
            const auto rows = fpm::pollution_study(ppwl, omegas, m, out + "/pollution.csv");
            std::cout << "pollution sweep ppwl=" << ppwl << " m=" << m << '\n';
            for (const auto& r : rows)
                std::cout << "  omega0=" << std::setw(6) << r.omega0 << " N=" << std::setw(6) << r.N
                          << "  spectral=" << r.err_spectral << "  fd2=" << r.err_fd2
                          << "  fd4=" << r.err_fd4 << '\n';
            std::cout << "  wrote " << out << "/pollution.csv\n";
            return 0;
        }

        if (stab->parsed()) {
            const auto setup = fpm::make_case(case_id, opts.ov, /*homogeneous=*/true);
            const auto op = fpm::assemble_operator(setup.problem);
            const auto spec = fpm::spectrum(op);
            const double dt = setup.run.dt > 0.0 ? setup.run.dt : setup.run.dt_coeff * setup.problem.grid.dx();
            const auto rep = fpm::check_rk4_containment(spec.values, dt, 1e-8);
            const std::string out = opts.out_dir.empty() ? ("out_" + case_id) : opts.out_dir;
            std::filesystem::create_directories(out);
            fpm::write_eigs_csv(spec.values, out + "/eigs.csv");
            std::cout << "case " << case_id << ": " << spec.values.size() << " eigenvalues, dt=" << dt
                      << '\n';
            std::cout << "  max RK4 amplification " << std::setprecision(12) << rep.max_amplification
                      << " at lambda=(" << rep.worst.real() << ", " << rep.worst.imag() << ")\n";
            std::cout << "  " << rep.n_outside << " eigenvalue(s) beyond 1 + " << rep.slack << '\n';
            std::cout << "  wrote " << out << "/eigs.csv\n";
            return rep.n_outside == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
