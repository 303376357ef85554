// vfkit: rational approximation of sampled frequency responses.
//
// Subcommands: nodes, synth, fit, compare, h2norm, eval. All numeric output
// uses 17 significant digits so that files round-trip bit-exactly.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "vfkit/fitting.hpp"
#include "vfkit/io.hpp"
#include "vfkit/metrics.hpp"
#include "vfkit/systems.hpp"

using namespace vfkit;

namespace {

// Exit codes: 0 ok, 1 input error, 2 numerical failure.
int classify_error(const Error& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const InvalidParam*>(&e) ||
        dynamic_cast<const InvalidBand*>(&e) || dynamic_cast<const LengthMismatch*>(&e) ||
        dynamic_cast<const TooFewSamples*>(&e) || dynamic_cast<const EmptySet*>(&e) ||
        dynamic_cast<const GridMismatch*>(&e) || dynamic_cast<const MissingDerivative*>(&e))
        return 1;
    return 2;
}

QuadGrid load_grid(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return grid_from_json(nlohmann::json::parse(read_file(path)));
    return grid_from_csv(read_file(path));
}

// The sample sidecar `<file>.json` may carry {"m_plus": {"re":..,"im":..}}.
SampleSet load_samples(const std::string& path) {
    std::optional<Complex> m_plus;
    const std::string sidecar = path + ".json";
    if (std::filesystem::exists(sidecar)) {
        const auto j = nlohmann::json::parse(read_file(sidecar));
        if (j.contains("m_plus")) m_plus = complex_from_json(j.at("m_plus"));
    }
    return samples_from_csv(read_file(path), m_plus);
}

CVec load_poles(const std::string& path) {
    const auto j = nlohmann::json::parse(read_file(path));
    const auto& arr = j.is_array() ? j : j.at("poles");
    CVec poles;
    for (const auto& p : arr) poles.push_back(complex_from_json(p));
    return poles;
}

std::string trace_csv(const std::vector<IterationRecord>& history) {
    std::ostringstream os;
    os << "k,delta,max_abs_varphi,mu,omega,residual\n";
    for (std::size_t k = 0; k < history.size(); ++k) {
        const auto& rec = history[k];
        os << k << ',' << fmt17(rec.delta) << ',' << fmt17(rec.max_abs_varphi) << ','
           << fmt17(rec.mu) << ',' << fmt17(rec.omega) << ',' << fmt17(rec.residual) << "\n";
    }
    return os.str();
}

const char* status_name(FitStatus s) {
    switch (s) {
        case FitStatus::CONVERGED: return "CONVERGED";
        case FitStatus::PERIODIC: return "PERIODIC";
        case FitStatus::MAX_ITERS: return "MAX_ITERS";
        case FitStatus::DEGENERATE: return "DEGENERATE";
    }
    return "?";
}

CVec log_spaced_conjugate_points(int ell, double lo, double hi) {
    if (ell % 2 != 0) throw InvalidParam("log-spaced sampling needs an even point count");
    if (!(0.0 < lo && lo < hi)) throw InvalidBand("need 0 < lo < hi");
    CVec pts;
    const int half = ell / 2;
    for (int k = 0; k < half; ++k) {
        const double t = half > 1 ? static_cast<double>(k) / (half - 1) : 0.5;
        const double w = lo * std::pow(hi / lo, t);
        pts.push_back(Complex(0, w));
        pts.push_back(Complex(0, -w));
    }
    return pts;
}

int run(int argc, char** argv) {
    CLI::App app{"rational fitting of frequency-response data"};
    app.require_subcommand(1);

    // The cap is honored trivially: all computations run sequentially.
    if (const char* threads = std::getenv("VFKIT_THREADS")) (void)threads;

    // ---- nodes ----
    auto* nodes = app.add_subcommand("nodes", "emit a quadrature grid");
    int n_ell = 20;
    double n_L = 1.0;
    std::string n_out, n_json;
    nodes->add_option("--ell", n_ell, "node count")->required();
    nodes->add_option("--L", n_L, "scale parameter")->required();
    nodes->add_option("--out", n_out, "grid CSV path");
    nodes->add_option("--json", n_json, "grid JSON path");
    nodes->callback([&] {
        const auto grid = bcc_grid(n_ell, n_L);
        if (!n_out.empty()) write_file(n_out, grid_to_csv(grid));
        if (!n_json.empty()) write_file(n_json, grid_to_json(grid).dump(2) + "\n");
        if (n_out.empty() && n_json.empty()) std::cout << grid_to_csv(grid);
    });

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "random stable system and samples");
    int s_n = 10;
    std::uint64_t s_seed = 0;
    double s_lo = 1.0, s_hi = 100.0, s_noise = 0.0;
    int s_ell = 0;
    bool s_deriv = false;
    std::string s_grid, s_out, s_ss_out;
    synth->add_option("--n", s_n, "state dimension")->required();
    synth->add_option("--seed", s_seed, "random seed");
    synth->add_option("--band-lo", s_lo, "band lower edge");
    synth->add_option("--band-hi", s_hi, "band upper edge");
    synth->add_option("--grid", s_grid, "sample at the nodes of this grid");
    synth->add_option("--ell", s_ell, "log-spaced conjugate sample count (without --grid)");
    synth->add_option("--noise", s_noise, "noise standard deviation");
    synth->add_flag("--deriv", s_deriv, "include derivative data");
    synth->add_option("--out", s_out, "sample CSV path")->required();
    synth->add_option("--ss-out", s_ss_out, "state-space JSON path");
    synth->callback([&] {
        const auto ss = random_stable_siso(s_n, s_seed, {s_lo, s_hi});
        CVec pts;
        if (!s_grid.empty()) {
            pts = load_grid(s_grid).nodes;
        } else {
            if (s_ell <= 0) throw InvalidParam("synth: give --grid or --ell");
            pts = log_spaced_conjugate_points(s_ell, s_lo, s_hi);
        }
        const auto set = sample_system(ss, pts, s_noise, s_seed, s_deriv);
        write_file(s_out, samples_to_csv(set));
        nlohmann::json sidecar;
        sidecar["m_plus"] = to_json(*set.m_plus());
        write_file(s_out + ".json", sidecar.dump(2) + "\n");
        if (!s_ss_out.empty()) write_file(s_ss_out, ss_to_json(ss).dump(2) + "\n");
    });

    // ---- fit ----
    auto* fitc = app.add_subcommand("fit", "fit a rational model");
    std::string f_samples, f_grid, f_out, f_trace, f_init;
    std::string f_variant = "vf", f_solver = "wls";
    int f_order = 4, f_max_iters = 100;
    double f_eps = 1e-10, f_eta1 = 1e-16;
    double f_eta2 = std::sqrt(std::numeric_limits<double>::epsilon());
    fitc->add_option("--samples", f_samples, "sample CSV")->required();
    fitc->add_option("--order", f_order, "model order r")->required();
    fitc->add_option("--variant", f_variant, "vf|quadvf|sobvf|sk-poly|sk-bary");
    fitc->add_option("--solver", f_solver, "wls|regularized|tls|mixed");
    fitc->add_option("--grid", f_grid, "quadrature grid (CSV or JSON)");
    fitc->add_option("--eps", f_eps, "backward-error stopping tolerance");
    fitc->add_option("--eta1", f_eta1, "regularization of the numerator block");
    fitc->add_option("--eta2", f_eta2, "regularization of the denominator block");
    fitc->add_option("--max-iters", f_max_iters, "iteration cap");
    fitc->add_option("--init-poles", f_init, "JSON with initial poles");
    fitc->add_option("--trace", f_trace, "write per-iteration diagnostics CSV");
    fitc->add_option("--out", f_out, "model JSON path");
    fitc->callback([&] {
        FitConfig cfg;
        cfg.order = f_order;
        cfg.max_iters = f_max_iters;
        cfg.eps_backward = f_eps;
        cfg.eta1 = f_eta1;
        cfg.eta2 = f_eta2;
        if (f_variant == "vf") cfg.variant = Variant::VF;
        else if (f_variant == "quadvf") cfg.variant = Variant::QUADVF;
        else if (f_variant == "sobvf") cfg.variant = Variant::SOBVF;
        else if (f_variant == "sk-poly") cfg.variant = Variant::SK_POLY;
        else if (f_variant == "sk-bary") cfg.variant = Variant::SK_BARY;
        else throw InvalidParam("fit: unknown variant " + f_variant);
        if (f_solver == "wls") cfg.solver = Solver::WLS;
        else if (f_solver == "regularized") cfg.solver = Solver::REGULARIZED;
        else if (f_solver == "tls") cfg.solver = Solver::TLS;
        else if (f_solver == "mixed") cfg.solver = Solver::MIXED_LS_TLS;
        else throw InvalidParam("fit: unknown solver " + f_solver);
        if (!f_grid.empty()) cfg.grid = load_grid(f_grid);
        if (!f_init.empty()) cfg.initial_poles = load_poles(f_init);

        const auto set = load_samples(f_samples);
        const auto res = fit(set, cfg);

        if (!f_out.empty()) write_file(f_out, model_to_json(res.model).dump(2) + "\n");
        if (!f_trace.empty()) write_file(f_trace, trace_csv(res.history));
        nlohmann::json summary;
        summary["status"] = status_name(res.status);
        summary["iterations"] = res.iterations;
        if (res.status == FitStatus::PERIODIC) summary["period"] = res.period;
        summary["rel_ls_residual"] = res.relative_ls_residual;
        std::cout << summary.dump() << "\n";
    });

    // ---- compare ----
    auto* cmp = app.add_subcommand("compare", "error metrics of a model");
    std::string c_samples, c_ss, c_model, c_grid, c_bode, c_out;
    cmp->add_option("--samples", c_samples, "sample CSV reference");
    cmp->add_option("--ss", c_ss, "state-space JSON reference");
    cmp->add_option("--model", c_model, "model JSON")->required();
    cmp->add_option("--grid", c_grid, "quadrature grid for the H2 metric");
    cmp->add_option("--bode", c_bode, "write omega,abs_ref,abs_model,abs_err CSV");
    cmp->add_option("--out", c_out, "write the metrics JSON to a file");
    cmp->callback([&] {
        const auto model = model_from_json(nlohmann::json::parse(read_file(c_model)));
        if (c_samples.empty() && c_ss.empty())
            throw InvalidParam("compare: give --samples or --ss");

        nlohmann::json out;
        FitConfig rescfg;  // weights for the residual metric
        rescfg.order = static_cast<int>(model.order());

        if (!c_ss.empty()) {
            const auto ss = ss_from_json(nlohmann::json::parse(read_file(c_ss)));
            if (c_grid.empty()) throw InvalidParam("compare --ss requires --grid");
            const auto grid = load_grid(c_grid);
            out["rel_h2"] = relative_h2_error(ss, model, grid);

            std::vector<FrequencySample> list(grid.ell);
            for (int j = 0; j < grid.ell; ++j) {
                list[j].s = grid.nodes[j];
                list[j].value = ss_eval(ss, grid.nodes[j]).h;
            }
            SampleSet at_nodes(list, moment_at_infinity(ss));
            rescfg.variant = Variant::QUADVF;
            rescfg.grid = grid;
            out["rel_ls_residual"] = residue_relative_residual(at_nodes, model, rescfg);

            double wlo = std::numeric_limits<double>::infinity(), whi = 0.0;
            for (const auto& s : grid.nodes) {
                const double w = std::abs(s.imag());
                if (w > 0.0) wlo = std::min(wlo, w);
                whi = std::max(whi, w);
            }
            const auto est = hinf_estimate(
                [&](Complex s) { return ss_eval(ss, s).h; }, model,
                default_hinf_grid(wlo, whi));
            out["rel_hinf"] = est.value / est.ref_max;
            if (!c_bode.empty()) {
                std::ostringstream os;
                os << "omega,abs_ref,abs_model,abs_err\n";
                for (double w : default_hinf_grid(wlo, whi)) {
                    const Complex s(0, w);
                    const Complex hr = ss_eval(ss, s).h;
                    const Complex hm = eval_pole_residue(model, s);
                    os << fmt17(w) << ',' << fmt17(std::abs(hr)) << ',' << fmt17(std::abs(hm))
                       << ',' << fmt17(std::abs(hr - hm)) << "\n";
                }
                write_file(c_bode, os.str());
            }
        } else {
            const auto set = load_samples(c_samples);
            if (!c_grid.empty()) {
                const auto grid = load_grid(c_grid);
                out["rel_h2"] = relative_h2_error(set, model, grid);
                rescfg.variant = Variant::QUADVF;
                rescfg.grid = grid;
            }
            out["rel_ls_residual"] = residue_relative_residual(set, model, rescfg);
            const auto est = hinf_estimate(set, model);
            out["rel_hinf"] = est.value / est.ref_max;
            if (!c_bode.empty()) {
                std::ostringstream os;
                os << "omega,abs_ref,abs_model,abs_err\n";
                for (std::size_t i = 0; i < set.size(); ++i) {
                    const Complex hr = set[i].value;
                    const Complex hm = eval_pole_residue(model, set[i].s);
                    os << fmt17(set[i].s.imag()) << ',' << fmt17(std::abs(hr)) << ','
                       << fmt17(std::abs(hm)) << ',' << fmt17(std::abs(hr - hm)) << "\n";
                }
                write_file(c_bode, os.str());
            }
        }
        const std::string text = out.dump();
        std::cout << text << "\n";
        if (!c_out.empty()) write_file(c_out, text + "\n");
    });

    // ---- h2norm ----
    auto* h2 = app.add_subcommand("h2norm", "quadrature estimate of the H2 norm");
    std::string h_samples, h_ss;
    double h_L = 1.0;
    int h_ell = 0;
    h2->add_option("--samples", h_samples, "sample CSV taken at B/CC nodes");
    h2->add_option("--ss", h_ss, "state-space JSON to evaluate");
    h2->add_option("--L", h_L, "scale parameter")->required();
    h2->add_option("--ell", h_ell, "node count (with --ss)");
    h2->callback([&] {
        CVec values;
        Complex m_plus;
        QuadGrid grid;
        if (!h_ss.empty()) {
            if (h_ell < 1) throw InvalidParam("h2norm --ss requires --ell");
            const auto ss = ss_from_json(nlohmann::json::parse(read_file(h_ss)));
            grid = bcc_grid(h_ell, h_L);
            values.resize(grid.ell);
            for (int j = 0; j < grid.ell; ++j) values[j] = ss_eval(ss, grid.nodes[j]).h;
            m_plus = moment_at_infinity(ss);
        } else if (!h_samples.empty()) {
            const auto set = load_samples(h_samples);
            grid = bcc_grid(static_cast<int>(set.size()), h_L);
            const auto map = match_samples_to_grid(set, grid);
            values.resize(grid.ell);
            for (int j = 0; j < grid.ell; ++j) values[j] = set[map[j]].value;
            m_plus = set.m_plus() ? *set.m_plus() : m_plus_estimate(set);
        } else {
            throw InvalidParam("h2norm: give --samples or --ss");
        }
        const double est =
            h2_norm_sq_estimate(values, m_plus, std::conj(m_plus), grid);
        std::cout << fmt17(std::sqrt(est)) << "\n";
    });

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "evaluate a model at listed points");
    std::string e_model, e_points, e_out;
    ev->add_option("--model", e_model, "model JSON")->required();
    ev->add_option("--points", e_points, "sample CSV supplying the points")->required();
    ev->add_option("--out", e_out, "output CSV path");
    ev->callback([&] {
        const auto model = model_from_json(nlohmann::json::parse(read_file(e_model)));
        // Points come from a sample CSV or a grid CSV; extra columns are ignored.
        CVec pts;
        const std::string text = read_file(e_points);
        try {
            const auto set = samples_from_csv(text);
            pts = set.points();
        } catch (const ParseError&) {
            pts = grid_from_csv(text).nodes;
        }
        std::ostringstream os;
        os << "s_re,s_im,h_re,h_im\n";
        for (const auto& s : pts) {
            const Complex h = eval_pole_residue(model, s);
            os << fmt17(s.real()) << ',' << fmt17(s.imag()) << ',' << fmt17(h.real()) << ','
               << fmt17(h.imag()) << "\n";
        }
        if (e_out.empty()) std::cout << os.str();
        else write_file(e_out, os.str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems are input errors
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "vfkit: " << e.what() << "\n";
        return classify_error(e);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "vfkit: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "vfkit: " << e.what() << "\n";
        return 2;
    }
}
