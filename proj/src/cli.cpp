#include "aet/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "aet/diagnostics.hpp"
#include "aet/io.hpp"

namespace aet {

namespace {

namespace fs = std::filesystem;

const char* kUsage =
    "usage: aet <subcommand> [--config FILE] [--KEY VALUE]...\n"
    "\n"
    "subcommands:\n"
    "  phantom      write the true permittivity (field + PGM)\n"
    "  forward      synthesize the internal data for a frequency set\n"
    "  reconstruct  run the projected Landweber iteration on a dataset\n"
    "  diagnose     run the verification battery and write a report\n"
    "  render       convert a field file to PGM (--in, --out, [--lo, --hi])\n"
    "\n"
    "Any configuration key can be passed as --KEY VALUE; flags override the\n"
    "config file. Exit codes: 0 ok, 1 usage/config error, 2 numerical failure.\n";

std::string fmt_sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

struct RenderArgs {
    std::string in_path;
    std::string out_path;
    std::optional<double> lo, hi;
};

ComplexField make_phi(const Grid& g, const RunConfig& cfg) {
    return ComplexField::constant(g, cfg.phi_value);
}

Permittivity load_truth(const RunConfig& cfg, const Grid& g) {
    if (cfg.truth_field.empty()) return make_phantom(cfg.phantom_spec(), g);
    ScalarField f = read_scalar_field(cfg.truth_field);
    if (!(f.grid() == g)) throw ConfigError("truth field grid does not match grid_n");
    return Permittivity(std::move(f), cfg.lambda_bound, cfg.margin);
}

int cmd_phantom(const RunConfig& cfg) {
    const Grid g = make_grid(cfg.grid_n);
    const Permittivity truth = make_phantom(cfg.phantom_spec(), g);
    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    write_field(truth.field(), (out / "truth.field").string());
    render_pgm(truth.field(), (out / "truth.pgm").string());
    write_manifest(cfg, (out / "manifest.cfg").string());
    std::cout << "phantom: wrote truth.field, truth.pgm, manifest.cfg in " << cfg.output_dir
              << "\n";
    return 0;
}

int cmd_forward(const RunConfig& cfg) {
    const Grid g = make_grid(cfg.grid_n);
    const Permittivity truth = load_truth(cfg, g);
    const ComplexField phi = make_phi(g, cfg);
    const FrequencySet freqs = cfg.frequency_set();

    InternalData data;
    data.noise_level = cfg.noise_level;
    data.seed = cfg.noise_seed;
    for (size_t k = 0; k < freqs.omegas.size(); ++k) {
        InternalData::Entry entry;
        entry.omega = freqs.omegas[k];
        entry.psi_star = synthesize_psi(truth, entry.omega, phi);
        if (cfg.noise_level > 0.0) {
            entry.psi_star = add_noise(entry.psi_star, cfg.noise_level, cfg.noise_seed + k);
        }
        data.entries.push_back(std::move(entry));
    }
    data.validate();

    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    write_dataset(data, cfg.output_dir);
    write_field(truth.field(), (out / "truth.field").string());
    write_manifest(cfg, (out / "manifest.cfg").string());
    std::cout << "forward: wrote " << data.entries.size() << " data files + dataset.cfg in "
              << cfg.output_dir << "\n";
    return 0;
}

int cmd_reconstruct(const RunConfig& cfg) {
    if (cfg.data_manifest.empty()) {
        throw ConfigError("reconstruct needs data_manifest (path to dataset.cfg)");
    }
    const InternalData data = read_dataset(cfg.data_manifest);
    const Grid g = data.entries.front().psi_star.grid();
    const ComplexField phi = make_phi(g, cfg);

    std::optional<Permittivity> truth;
    if (!cfg.truth_field.empty()) {
        truth = Permittivity(read_scalar_field(cfg.truth_field), cfg.lambda_bound, cfg.margin);
    }

    const ReconstructionTrace trace =
        landweber_run(data, cfg.landweber(), phi, truth ? &*truth : nullptr);

    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    write_trace_csv(trace, (out / "trace.csv").string());
    write_field(trace.final_q.field(), (out / "q_final.field").string());
    render_pgm(trace.final_q.field(), (out / "q_final.pgm").string());
    write_manifest(cfg, (out / "manifest.cfg").string());

    const auto& last = trace.records.back();
    std::cout << "reconstruct: " << last.iteration << " iterations, J = " << fmt_sci(last.j_value)
              << ", step = " << fmt_sci(trace.step_used) << "\n";
    if (truth) {
        std::cout << "reconstruct: rel_err_l2 = " << fmt_sci(last.rel_err_l2)
                  << ", rel_err_h1 = " << fmt_sci(last.rel_err_h1) << "\n";
    }
    const double h1 = norm_h1(trace.final_q.field());
    std::cout << "reconstruct: H1 norm of final iterate = " << fmt_sci(h1)
              << (h1 <= cfg.lambda_bound ? " (within" : " (OUTSIDE")
              << " the admissible H1 ball, Lambda = " << fmt_sci(cfg.lambda_bound) << ")\n";
    return 0;
}

int cmd_diagnose(const RunConfig& cfg) {
    const Grid g = make_grid(cfg.grid_n);
    const Permittivity phantom = make_phantom(cfg.phantom_spec(), g);
    const ComplexField phi = make_phi(g, cfg);
    std::ostringstream rep;
    rep << "aet diagnostics format 1\n";

    const std::vector<int> ns = {26, 51, 101};
    for (double omega : {3.0, 10.0}) {
        std::vector<double> errs;
        for (int n : ns) errs.push_back(helmholtz_mms_error(n, omega));
        for (size_t k = 0; k < ns.size(); ++k) {
            rep << "mms.helmholtz omega=" << omega << " n=" << ns[k]
                << " err=" << fmt_sci(errs[k]) << "\n";
        }
        for (size_t k = 0; k + 1 < ns.size(); ++k) {
            rep << "mms.helmholtz omega=" << omega << " order(" << ns[k] << "->" << ns[k + 1]
                << ")=" << fmt_sci(observed_order(errs[k], errs[k + 1])) << "\n";
        }
    }
    {
        std::vector<double> errs;
        for (int n : ns) errs.push_back(poisson_mms_error(n));
        for (size_t k = 0; k < ns.size(); ++k) {
            rep << "mms.poisson n=" << ns[k] << " err=" << fmt_sci(errs[k]) << "\n";
        }
        for (size_t k = 0; k + 1 < ns.size(); ++k) {
            rep << "mms.poisson order(" << ns[k] << "->" << ns[k + 1]
                << ")=" << fmt_sci(observed_order(errs[k], errs[k + 1])) << "\n";
        }
    }

    rep << "omega0.max_dev_u0 " << fmt_sci(omega0_constant_deviation(phantom)) << "\n";
    rep << "omega0.psi0_rel_err " << fmt_sci(omega0_datum_deviation(phantom)) << "\n";

    for (double omega : {0.0, 3.0, 10.0, 20.0}) {
        for (PairingKind kind : {PairingKind::l2, PairingKind::sobolev}) {
            GradientPairing pairing{kind, cfg.sobolev_alpha};
            const double worst =
                adjoint_dot_test(phantom, omega, cfg.dot_trials, cfg.seed, pairing);
            rep << "adjoint.dot omega=" << omega << " pairing="
                << (kind == PairingKind::l2 ? "l2" : "sobolev") << " worst="
                << fmt_sci(worst) << "\n";
        }
    }

    {
        const ScalarField rho = random_interior_field(g, cfg.margin, cfg.seed + 7);
        const double r1 = taylor_remainder_ratio(phantom, 3.0, rho, 1e-2);
        const double r2 = taylor_remainder_ratio(phantom, 3.0, rho, 1e-3);
        rep << "taylor omega=3 ratio(1e-2)=" << fmt_sci(r1) << " ratio(1e-3)=" << fmt_sci(r2)
            << " decrease=" << fmt_sci(r1 / r2) << "\n";
    }

    for (double omega : {0.5, 3.0}) {
        const double e1 = domega_central_difference_error(phantom.field(), omega, 1e-2);
        const double e2 = domega_central_difference_error(phantom.field(), omega, 5e-3);
        rep << "domega omega=" << omega << " err(1e-2)=" << fmt_sci(e1)
            << " err(5e-3)=" << fmt_sci(e2) << " ratio=" << fmt_sci(e1 / e2) << "\n";
    }

    {
        const Displacement bump1 = radial_bump(g, 0.45, 0.55, 0.25, 1e-3);
        const auto r1 = cross_correlation_check(phantom, 3.0, phi, bump1);
        const Displacement bump2 = radial_bump(g, 0.45, 0.55, 0.25, 5e-4);
        const auto r2 = cross_correlation_check(phantom, 3.0, phi, bump2);
        const double identity_gap =
            std::abs(r1.lhs - r1.rhs_exact) / std::abs(r1.rhs_exact);
        const double stencil_gap =
            std::abs(r1.lhs_stencil - r1.rhs_exact) / std::abs(r1.rhs_exact);
        const double gap1 = std::abs(r1.rhs_exact - r1.rhs_approx);
        const double gap2 = std::abs(r2.rhs_exact - r2.rhs_approx);
        rep << "crosscorr identity_rel_gap=" << fmt_sci(identity_gap)
            << " stencil_rel_gap=" << fmt_sci(stencil_gap) << "\n";
        rep << "crosscorr linearization gap(1e-3)=" << fmt_sci(gap1)
            << " gap(5e-4)=" << fmt_sci(gap2) << " ratio=" << fmt_sci(gap1 / gap2) << "\n";
    }

    {
        const std::vector<std::vector<double>> sets = {
            {10.0}, {15.0}, {20.0}, {10.0, 15.0, 20.0}};
        for (const auto& omegas : sets) {
            FrequencySet set;
            set.omegas = omegas;
            const double sigma =
                coercivity_probe(phantom, set, phi, cfg.probe_iterations, cfg.seed);
            rep << "probe K={";
            for (size_t k = 0; k < omegas.size(); ++k) {
                rep << (k ? "," : "") << omegas[k];
            }
            rep << "} sigma_min=" << fmt_sci(sigma) << "\n";
        }
    }

    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    std::ofstream file((out / "diagnostics.txt").string(), std::ios::binary);
    if (!file) throw Error("cannot write diagnostics report");
    file << rep.str();
    file.close();
    write_manifest(cfg, (out / "manifest.cfg").string());
    std::cout << rep.str();
    std::cout << "diagnose: wrote diagnostics.txt in " << cfg.output_dir << "\n";
    return 0;
}

int cmd_render(const RenderArgs& args) {
    if (args.in_path.empty() || args.out_path.empty()) {
        throw ConfigError("render needs --in FIELD and --out PGM");
    }
    if (args.lo.has_value() != args.hi.has_value()) {
        throw ConfigError("render needs both --lo and --hi, or neither");
    }
    const ScalarField f = read_scalar_field(args.in_path);
    std::optional<std::pair<double, double>> range;
    if (args.lo) range = std::make_pair(*args.lo, *args.hi);
    render_pgm(f, args.out_path, range);
    std::cout << "render: wrote " << args.out_path << "\n";
    return 0;
}

int dispatch(const std::vector<std::string>& args) {
    if (args.empty()) {
        std::cerr << kUsage;
        return 1;
    }
    const std::string sub = args[0];
    const bool known = sub == "phantom" || sub == "forward" || sub == "reconstruct" ||
                       sub == "diagnose" || sub == "render";
    if (!known) {
        std::cerr << "unknown subcommand '" << sub << "'\n" << kUsage;
        return 1;
    }

    // --config is applied first, then the remaining flags in order.
    RunConfig cfg;
    RenderArgs render_args;
    for (size_t k = 1; k < args.size(); k += 2) {
        if (args[k] == "--config") {
            if (k + 1 >= args.size()) throw ConfigError("--config needs a file path");
            cfg = parse_config_file(args[k + 1]);
        }
    }
    for (size_t k = 1; k < args.size(); k += 2) {
        const std::string& flag = args[k];
        if (flag.rfind("--", 0) != 0) {
            throw ConfigError("expected a --flag, got '" + flag + "'");
        }
        if (k + 1 >= args.size()) {
            throw ConfigError("flag '" + flag + "' needs a value");
        }
        const std::string key = flag.substr(2);
        const std::string& value = args[k + 1];
        if (key == "config") continue;
        if (sub == "render") {
            if (key == "in") {
                render_args.in_path = value;
            } else if (key == "out") {
                render_args.out_path = value;
            } else if (key == "lo") {
                render_args.lo = std::stod(value);
            } else if (key == "hi") {
                render_args.hi = std::stod(value);
            } else {
                throw ConfigError("unknown render option '--" + key + "'");
            }
            continue;
        }
        apply_config_entry(cfg, key, value);
    }

    if (sub == "phantom") return cmd_phantom(cfg);
    if (sub == "forward") return cmd_forward(cfg);
    if (sub == "reconstruct") return cmd_reconstruct(cfg);
    if (sub == "diagnose") return cmd_diagnose(cfg);
    return cmd_render(render_args);
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return cli_main(args);
}

} // namespace aet
