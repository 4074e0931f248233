#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "symflow/cascades.hpp"
#include "symflow/czindex.hpp"
#include "symflow/rabinowitz.hpp"
#include "symflow/selftest.hpp"
#include "symflow/specflow.hpp"
#include "symflow/spherehf.hpp"

namespace {

using nlohmann::json;
using namespace symflow;

// Reports also land in $SYMFLOW_OUT/<subcommand>.<ext> when the variable is set.
void emit(const std::string& subcommand, const std::string& payload, const std::string& ext) {
    std::cout << payload;
    if (const char* dir = std::getenv("SYMFLOW_OUT")) {
        const std::filesystem::path p = std::filesystem::path(dir) / (subcommand + "." + ext);
        std::ofstream out(p);
        if (!out) throw IoError("cannot write report file: " + p.string());
        out << payload;
        if (!out) throw IoError("write failed: " + p.string());
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

std::pair<double, double> parse_window(const std::string& text, const char* what) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ValidationError(std::string(what) + ": expected 'lo,hi'");
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ValidationError(std::string(what) + ": expected 'lo,hi'");
    }
}

int run_specflow(const std::string& input, const std::string& method, double delta, bool has_delta,
                 const std::string& format) {
    SymmetricPath path = load_path(input);
    bool delta_warning = false;
    if (has_delta) {
        auto reg = specflow::delta_regularize(path, delta);
        path = std::move(reg.path);
        delta_warning = reg.delta_large;
    }

    specflow::SpectralFlowReport rep;
    if (method == "oracle") {
        rep.flow = specflow::spectral_flow_oracle(path);
        rep.method = specflow::FlowMethod::eigenvalue_tracking;
    } else {
        const auto m = method == "endpoint" ? specflow::FlowMethod::endpoint_signature
                                            : specflow::FlowMethod::crossing_form;
        rep = specflow::spectral_flow(path, m);
    }

    if (format == "json") {
        json doc;
        doc["flow"] = rep.flow;
        doc["method"] = method;
        doc["regularized"] = rep.regularized || has_delta;
        if (has_delta) doc["delta"] = delta;
        if (delta_warning) doc["delta_warning"] = "delta at or above the smallest asymptotic eigenvalue";
        json cr = json::array();
        for (const auto& c : rep.crossings)
            cr.push_back({{"s", c.s}, {"kernel_dim", c.kernel_dim}, {"signature", c.signature},
                          {"weight", c.weight}});
        doc["crossings"] = std::move(cr);
        emit("specflow", doc.dump(2) + "\n", "json");
    } else {
        std::ostringstream os;
        os << "flow " << rep.flow << " (method " << method << ")\n";
        if (delta_warning) os << "warning: delta at or above the smallest asymptotic eigenvalue\n";
        for (const auto& c : rep.crossings)
            os << "  crossing s=" << fmt(c.s) << " kernel=" << c.kernel_dim
               << " signature=" << c.signature << " weight=" << fmt(c.weight) << "\n";
        emit("specflow", os.str(), "txt");
    }
    return 0;
}

int run_cz(const std::string& input, double delta, const std::string& sweep_arg,
           const std::string& format) {
    const SymmetricPath path = load_path(input);
    json doc;
    std::ostringstream text;
    if (!sweep_arg.empty()) {
        std::vector<double> sweep;
        std::stringstream ss(sweep_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) sweep.push_back(std::stod(tok));
        const auto lim = czindex::perturbed_limits(path, sweep);
        doc["mu_plus"] = lim.mu_plus;
        doc["mu_minus"] = lim.mu_minus;
        text << "mu_plus " << lim.mu_plus << "\nmu_minus " << lim.mu_minus << "\n";
    } else {
        const auto rep = czindex::rs_index(path, delta);
        doc["index"] = rep.index.value();
        doc["index_doubled"] = rep.index.twice;
        doc["delta"] = delta;
        json cr = json::array();
        for (const auto& c : rep.crossings)
            cr.push_back({{"t", c.t}, {"kernel_dim", c.kernel_dim}, {"signature", c.signature},
                          {"weight", c.weight_halves == 1 ? 0.5 : 1.0}});
        doc["crossings"] = std::move(cr);
        text << "index " << rep.index.str() << " (delta " << fmt(delta) << ")\n";
        for (const auto& c : rep.crossings)
            text << "  crossing t=" << fmt(c.t) << " kernel=" << c.kernel_dim
                 << " signature=" << c.signature << " weight=" << (c.weight_halves == 1 ? "1/2" : "1")
                 << "\n";
    }
    if (format == "json") emit("cz", doc.dump(2) + "\n", "json");
    else emit("cz", text.str(), "txt");
    return 0;
}

int run_mbh(const std::string& model_name, double tube, int steps, const std::string& window,
            const std::string& format) {
    if (model_name != "s2-zsq") throw ValidationError("mbh: unknown model " + model_name);
    double lo = -1e300, hi = 1e300;
    if (!window.empty()) std::tie(lo, hi) = parse_window(window, "mbh --window");
    cascades::CascadeParams params;
    params.tube = tube;
    params.step = 1.0 / steps;

    const auto model = cascades::make_s2_zsq_model();
    const auto cx = cascades::assemble_complex(*model, params, lo, hi);
    const auto ranks = cascades::homology(cx);

    if (format == "json") {
        json doc;
        doc["model"] = model_name;
        json gens = json::array();
        for (const auto& g : cx.generators)
            gens.push_back({{"id", g.id}, {"grading", g.grading.value()}, {"action", g.action}});
        doc["generators"] = std::move(gens);
        json bd = json::array();
        for (std::size_t s = 0; s < cx.generators.size(); ++s)
            for (std::size_t t = 0; t < cx.generators.size(); ++t)
                if (cx.boundary[s][t])
                    bd.push_back({{"from", cx.generators[s].id}, {"to", cx.generators[t].id}});
        doc["boundary"] = std::move(bd);
        json rk = json::array();
        for (const auto& [mu, r] : ranks) rk.push_back({{"degree", mu.value()}, {"rank", r}});
        doc["homology"] = std::move(rk);
        emit("mbh", doc.dump(2) + "\n", "json");
    } else if (format == "csv") {
        std::ostringstream os;
        os << "kind,id_or_degree,grading_or_rank,action\n";
        for (const auto& g : cx.generators)
            os << "generator," << g.id << "," << g.grading.str() << "," << fmt(g.action) << "\n";
        for (std::size_t s = 0; s < cx.generators.size(); ++s)
            for (std::size_t t = 0; t < cx.generators.size(); ++t)
                if (cx.boundary[s][t])
                    os << "boundary," << cx.generators[s].id << "->" << cx.generators[t].id << ",1,\n";
        for (const auto& [mu, r] : ranks) os << "homology," << mu.str() << "," << r << ",\n";
        emit("mbh", os.str(), "csv");
    } else {
        std::ostringstream os;
        os << "model " << model_name << "\ngenerators:\n";
        for (const auto& g : cx.generators)
            os << "  " << g.id << "  grading " << g.grading.str() << "  action " << fmt(g.action) << "\n";
        os << "boundary:\n";
        bool any = false;
        for (std::size_t s = 0; s < cx.generators.size(); ++s)
            for (std::size_t t = 0; t < cx.generators.size(); ++t)
                if (cx.boundary[s][t]) {
                    os << "  " << cx.generators[s].id << " -> " << cx.generators[t].id << "\n";
                    any = true;
                }
        if (!any) os << "  (zero)\n";
        os << "homology ranks:\n";
        for (const auto& [mu, r] : ranks) os << "  degree " << mu.str() << ": " << r << "\n";
        emit("mbh", os.str(), "txt");
    }
    return 0;
}

int run_rabinowitz(int n_samples, double delta, double tol, std::uint64_t seed,
                   const std::string& suite, int cases) {
    const rabinowitz::CircleModel model;
    std::ostringstream os;
    if (suite == "step1") {
        os << "case,lhs,rhs,holds\n";
        for (const auto& r : rabinowitz::step1_suite(model, cases, seed, n_samples, delta))
            os << r.case_id << "," << fmt(r.lhs) << "," << fmt(r.rhs) << "," << (r.holds ? 1 : 0) << "\n";
    } else if (suite == "step2") {
        os << "case,grad_norm,bound,holds\n";
        for (const auto& r : rabinowitz::step2_suite(model, cases, seed, n_samples, delta))
            os << r.case_id << "," << fmt(r.lhs) << "," << fmt(r.rhs) << "," << (r.holds ? 1 : 0) << "\n";
    } else if (suite == "critical") {
        os << "case,k,eta,action,residual,eta_ok,action_ok\n";
        for (const auto& r : rabinowitz::critical_suite(model, std::max(1, cases / 3), seed, n_samples, tol))
            os << r.case_id << "," << r.k << "," << fmt(r.eta) << "," << fmt(r.action_value) << ","
               << fmt(r.residual) << "," << (r.eta_ok ? 1 : 0) << "," << (r.action_ok ? 1 : 0) << "\n";
    } else {
        throw ValidationError("rabinowitz: unknown suite " + suite);
    }
    emit("rabinowitz", os.str(), "csv");
    return 0;
}

int run_sphere_hf(int n, const std::string& window, const std::string& format) {
    const auto [lo, hi] = parse_window(window, "sphere-hf --window");
    const auto res = spherehf::hf_table(n, lo, hi);

    if (!res.table) {
        // structured refusal: the lacunary argument fails, table undetermined
        if (format == "json") {
            json doc;
            doc["n"] = n;
            json obs = json::array();
            for (const auto& p : res.obstructions)
                obs.push_back({{"i1", p.i1}, {"i2", p.i2}, {"dm", p.dm}});
            doc["obstructions"] = std::move(obs);
            doc["table"] = nullptr;
            emit("sphere-hf", doc.dump(2) + "\n", "json");
        } else {
            std::ostringstream os;
            os << "no table for n=" << n << ": candidate differential pairs exist\n";
            for (const auto& p : res.obstructions)
                os << "  i1=" << p.i1 << " i2=" << p.i2 << " dm=" << p.dm << "\n";
            emit("sphere-hf", os.str(), format == "csv" ? "csv" : "txt");
        }
        return 2;
    }

    const auto& t = *res.table;
    if (format == "json") {
        json doc;
        doc["n"] = t.n;
        doc["window"] = json::array({t.window_lo, t.window_hi});
        json rk = json::array();
        for (const auto& [mu, r] : t.ranks) rk.push_back({{"degree", mu.value()}, {"rank", r}});
        doc["ranks"] = std::move(rk);
        emit("sphere-hf", doc.dump(2) + "\n", "json");
    } else if (format == "csv") {
        std::ostringstream os;
        os << "degree,rank\n";
        for (const auto& [mu, r] : t.ranks) os << fmt(mu.value()) << "," << r << "\n";
        emit("sphere-hf", os.str(), "csv");
    } else {
        std::ostringstream os;
        os << "n=" << t.n << " window=[" << fmt(t.window_lo) << "," << fmt(t.window_hi) << "]\n";
        for (const auto& [mu, r] : t.ranks) os << "  degree " << mu.str() << ": rank " << r << "\n";
        emit("sphere-hf", os.str(), "txt");
    }
    return 0;
}

int run_selftest(std::uint64_t seed, const std::string& format) {
    const auto rep = selftest::run(seed);
    emit("selftest", format == "json" ? selftest::to_json(rep) : selftest::to_text(rep),
         format == "json" ? "json" : "txt");
    return rep.all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral flow, symplectic indices, cascade homology and the circle multiplier model"};
    app.require_subcommand(1);

    // specflow
    auto* sf = app.add_subcommand("specflow", "spectral flow of a symmetric matrix path");
    std::string sf_input, sf_method = "crossing", sf_report = "text";
    double sf_delta = 0;
    sf->add_option("input", sf_input, "path file (JSON)")->required();
    sf->add_option("--method", sf_method, "crossing|endpoint|oracle")
        ->check(CLI::IsMember({"crossing", "endpoint", "oracle"}));
    auto* sf_delta_opt = sf->add_option("--delta", sf_delta, "regularize the path first");
    sf->add_option("--report", sf_report, "json|text")->check(CLI::IsMember({"json", "text"}));

    // cz
    auto* cz = app.add_subcommand("cz", "symplectic-path index of a generator path");
    std::string cz_input, cz_sweep, cz_report = "text";
    double cz_delta = 0;
    cz->add_option("input", cz_input, "generator path file (JSON)")->required();
    cz->add_option("--delta", cz_delta, "perturbation of the generator");
    cz->add_option("--sweep", cz_sweep, "comma list: stabilized perturbed limits instead");
    cz->add_option("--report", cz_report, "json|text")->check(CLI::IsMember({"json", "text"}));

    // mbh
    auto* mbh = app.add_subcommand("mbh", "Morse-Bott cascade complex and homology");
    std::string mbh_model = "s2-zsq", mbh_window, mbh_format = "text";
    double mbh_tube = 1e-3;
    int mbh_steps = 1000;
    mbh->add_option("--model", mbh_model, "flow model (s2-zsq)");
    mbh->add_option("--tube", mbh_tube, "tubular-neighborhood radius");
    mbh->add_option("--steps", mbh_steps, "integrator steps per unit time");
    mbh->add_option("--window", mbh_window, "action window 'lo,hi'");
    mbh->add_option("--format", mbh_format, "text|json|csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));

    // rabinowitz
    auto* rb = app.add_subcommand("rabinowitz", "circle multiplier model suites (CSV)");
    int rb_n = 256, rb_cases = 100;
    double rb_delta = 0.2, rb_tol = 1e-9;
    std::uint64_t rb_seed = 1;
    std::string rb_suite = "step1";
    rb->add_option("--n-samples", rb_n, "loop samples");
    rb->add_option("--delta", rb_delta, "shell half-width");
    rb->add_option("--tol", rb_tol, "critical-search tolerance");
    rb->add_option("--seed", rb_seed, "suite seed");
    rb->add_option("--suite", rb_suite, "step1|step2|critical")
        ->check(CLI::IsMember({"step1", "step2", "critical"}));
    rb->add_option("--cases", rb_cases, "number of suite cases");

    // sphere-hf
    auto* hf = app.add_subcommand("sphere-hf", "homology table of the unit cotangent bundle");
    int hf_n = 4;
    std::string hf_window = "-20,20", hf_format = "table";
    hf->add_option("--n", hf_n, "sphere dimension")->required();
    hf->add_option("--window", hf_window, "degree window 'lo,hi'");
    hf->add_option("--format", hf_format, "table|csv|json")
        ->check(CLI::IsMember({"table", "csv", "json"}));

    // selftest
    auto* st = app.add_subcommand("selftest", "run the acceptance suite");
    std::uint64_t st_seed = 1;
    std::string st_format = "text";
    st->add_option("--seed", st_seed, "suite seed");
    st->add_option("--format", st_format, "text|json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    }

    const bool json_errors = sf_report == "json" || cz_report == "json" || mbh_format == "json" ||
                             hf_format == "json" || st_format == "json";
    try {
        if (sf->parsed())
            return run_specflow(sf_input, sf_method, sf_delta, sf_delta_opt->count() > 0, sf_report);
        if (cz->parsed()) return run_cz(cz_input, cz_delta, cz_sweep, cz_report);
        if (mbh->parsed()) return run_mbh(mbh_model, mbh_tube, mbh_steps, mbh_window, mbh_format);
        if (rb->parsed()) return run_rabinowitz(rb_n, rb_delta, rb_tol, rb_seed, rb_suite, rb_cases);
        if (hf->parsed()) return run_sphere_hf(hf_n, hf_window, hf_format);
        if (st->parsed()) return run_selftest(st_seed, st_format);
    } catch (const Error& e) {
        if (json_errors) {
            nlohmann::json doc;
            doc["error"] = {{"kind", static_cast<int>(e.kind())}, {"message", e.what()}};
            std::cout << doc.dump(2) << "\n";
        } else {
            std::cerr << "error: " << e.what() << "\n";
        }
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
