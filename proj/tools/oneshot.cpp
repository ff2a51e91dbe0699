// Command-line front end: smoothed entropies, one-shot capacity bounds,
// asymptotic rates, n-copy sweeps, decoupling experiments, and the property
// check suite. All numeric output is printed with 12 significant digits and is
// byte-identical for identical arguments and seeds.
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oneshot/capacity.hpp"
#include "oneshot/checks.hpp"
#include "oneshot/decoupling.hpp"
#include "oneshot/json_io.hpp"

namespace {

using namespace oneshot;

std::string num12(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

/// Minimal ordered JSON-object writer (keys appear in insertion order).
class JsonLine {
  public:
    JsonLine& field(const std::string& key, const std::string& raw) {
        if (!first_) out_ << ",";
        first_ = false;
        out_ << "\"" << key << "\":" << raw;
        return *this;
    }
    JsonLine& num(const std::string& key, double v) { return field(key, num12(v)); }
    JsonLine& str(const std::string& key, const std::string& v) { return field(key, quoted(v)); }
    std::string done() const { return "{" + out_.str() + "}"; }

  private:
    std::ostringstream out_;
    bool first_ = true;
};

std::string matrix_json(const ComplexMatrix& m) {
    std::ostringstream out;
    out << "{\"rows\":" << m.rows() << ",\"cols\":" << m.cols() << ",\"entries\":[";
    for (std::size_t k = 0; k < m.data().size(); ++k) {
        if (k) out << ",";
        out << "[" << num12(m.data()[k].real()) << "," << num12(m.data()[k].imag()) << "]";
    }
    out << "]}";
    return out.str();
}

struct SplitSpec {
    std::vector<std::string> a;
    std::vector<std::string> b;
};

SplitSpec parse_split(const std::string& spec) {
    auto split_labels = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(item);
        return out;
    };
    std::size_t sep = spec.find(';');
    if (sep == std::string::npos)
        throw std::invalid_argument("split must be of the form \"A;B\" (labels comma-separated)");
    SplitSpec out;
    out.a = split_labels(spec.substr(0, sep));
    out.b = split_labels(spec.substr(sep + 1));
    if (out.a.empty()) throw std::invalid_argument("split has an empty left side");
    return out;
}

int run_entropy(const std::string& state_path, const std::string& split_spec,
                const std::string& kind, double eps, double tol) {
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("entropy: smoothing radius must lie in [0, 1)");
    DensityOperator rho = io::state_from_file(state_path);
    EntropyOptions opt;
    if (tol > 0.0) {
        opt.tol_unsmoothed = tol;
        opt.tol_smoothed = tol;
    }
    JsonLine out;
    out.str("kind", kind);
    if (kind == "vn" || kind == "mi") {
        double value = 0.0;
        if (kind == "vn") {
            value = split_spec.empty()
                        ? von_neumann(rho)
                        : von_neumann(rho.restricted_to(parse_split(split_spec).a));
        } else {
            SplitSpec sp = parse_split(split_spec);
            value = mutual_information(rho, sp.a, sp.b);
        }
        out.num("value", value).num("eps", 0.0).str("method", "closed_form").str("validity", "ok");
        std::printf("%s\n", out.done().c_str());
        return 0;
    }
    SplitSpec sp = parse_split(split_spec);
    EntropyResult res;
    if (kind == "hmin")
        res = h_min_smooth(rho, sp.a, sp.b, eps, opt);
    else if (kind == "hmax")
        res = h_max_smooth(rho, sp.a, sp.b, eps, opt);
    else
        throw std::invalid_argument("unknown entropy kind '" + kind + "'");
    out.num("value", res.value)
        .num("eps", res.smoothing_eps)
        .str("method", to_string(res.method))
        .str("validity", to_string(res.validity))
        .num("primal", res.certificate.primal)
        .num("dual", res.certificate.dual)
        .num("gap", res.certificate.gap);
    std::printf("%s\n", out.done().c_str());
    return res.validity == EntropyValidity::solver_failure ? 3 : 0;
}

int run_bounds(const std::string& channel_path, const std::string& mode, double eps,
               const std::string& input_path, bool optimize, int budget, std::uint64_t seed,
               const std::string& kappa_variant) {
    KrausChannel ch = io::channel_from_file(channel_path);
    InputSearch search = InputSearch::optimized(budget, seed);
    if (!optimize) {
        DensityOperator input =
            input_path.empty()
                ? maximally_mixed(SystemLayout::single("Ain", ch.dim_in()))
                : io::state_from_file(input_path);
        if (input.dim() != ch.dim_in())
            throw std::invalid_argument("bounds: input dimension does not match the channel");
        DensityOperator flat(DensityOperator::unchecked_t{}, input.matrix(),
                             SystemLayout::single("Ain", input.dim()));
        search = InputSearch::fixed(flat);
    }
    KappaPrimeVariant variant = KappaPrimeVariant::verbatim;
    if (kappa_variant == "substituted")
        variant = KappaPrimeVariant::substituted;
    else if (kappa_variant != "verbatim")
        throw std::invalid_argument("bounds: kappa variant must be verbatim or substituted");

    BoundReport rep;
    if (mode == "eaq")
        rep = eaq_bounds(ch, eps, search);
    else if (mode == "eac")
        rep = eac_bounds(ch, eps, search, {}, variant);
    else
        throw std::invalid_argument("bounds: mode must be eaq or eac");

    JsonLine out;
    out.str("mode", mode)
        .num("eps", rep.eps)
        .num("lower", rep.lower.value)
        .str("lower_validity", to_string(rep.lower.validity))
        .num("upper", rep.upper.value)
        .str("upper_validity", to_string(rep.upper.validity));
    for (const auto& [k, v] : rep.derived_params) out.num(k, v);
    for (const auto& [k, v] : rep.smoothing_used) out.num("smoothing_" + k, v);
    out.field("input", matrix_json(rep.optimizer_input.matrix()));
    std::printf("%s\n", out.done().c_str());
    return 0;
}

int run_asymptotic(const std::string& channel_path, int budget, std::uint64_t seed) {
    KrausChannel ch = io::channel_from_file(channel_path);
    AsymptoticCapacity cap = asymptotic_capacity(ch, InputSearch::optimized(budget, seed));
    JsonLine out;
    out.num("C_ea", cap.c_ea)
        .num("Q_ea", cap.q_ea)
        .field("input", matrix_json(cap.argmax_input.matrix()));
    std::printf("%s\n", out.done().c_str());
    return 0;
}

int run_sweep(const std::string& channel_path, const std::string& input_path, std::size_t nmax,
              double eps) {
    KrausChannel ch = io::channel_from_file(channel_path);
    DensityOperator input = input_path.empty()
                                ? maximally_mixed(SystemLayout::single("Ain", ch.dim_in()))
                                : io::state_from_file(input_path);
    DensityOperator flat(DensityOperator::unchecked_t{}, input.matrix(),
                         SystemLayout::single("Ain", input.dim()));
    auto rows = n_copy_trend(ch, flat, eps, nmax);
    std::printf("n,core_per_n,mutual_information\n");
    for (const auto& row : rows)
        std::printf("%zu,%s,%s\n", row.n, num12(row.core_per_n).c_str(),
                    num12(row.mutual_info).c_str());
    return 0;
}

int run_decouple(const std::string& channel_path, const std::string& input_path, double eps,
                 int trials, std::uint64_t seed, std::size_t dim_a0, std::size_t dim_a1,
                 int jobs) {
    KrausChannel ch = io::channel_from_file(channel_path);
    DensityOperator input = input_path.empty()
                                ? maximally_mixed(SystemLayout::single("Ain", ch.dim_in()))
                                : io::state_from_file(input_path);
    DensityOperator flat(DensityOperator::unchecked_t{}, input.matrix(),
                         SystemLayout::single("Ain", input.dim()));
    DecouplingExperiment ex =
        run_experiment(ch, flat, dim_a0, dim_a1, eps, trials, seed, {}, jobs);
    std::printf("trial,error,bound,decoder_fidelity\n");
    for (std::size_t t = 0; t < ex.trials.size(); ++t)
        std::printf("%zu,%s,%s,%s\n", t, num12(ex.trials[t].decoupling_error).c_str(),
                    num12(ex.trials[t].bound).c_str(),
                    num12(ex.trials[t].decoder_fidelity).c_str());
    JsonLine out;
    out.num("min_error", ex.summary.min_error)
        .num("mean_error", ex.summary.mean_error)
        .num("delta1", ex.summary.delta1)
        .num("delta2", ex.summary.delta2)
        .num("bound", ex.summary.bound)
        .num("max_protocol_error", ex.summary.max_protocol_error)
        .field("min_error_within_bound",
               ex.summary.min_error <= ex.summary.bound + 1e-9 ? "true" : "false");
    std::printf("%s\n", out.done().c_str());
    return 0;
}

int run_check(const std::string& suite, std::uint64_t seed, bool quick) {
    if (suite != "appendix-a" && suite != "entropy-properties" && suite != "all")
        throw std::invalid_argument("check: unknown suite '" + suite + "'");
    CheckConfig cfg;
    cfg.seed = seed;
    if (quick) {
        cfg.duality_states = 6;
        cfg.chain_states = 4;
        cfg.product_ball_states = 4;
        cfg.conditioning_states = 4;
        cfg.envelope_states = 4;
        cfg.superadditivity_pairs = 3;
        cfg.isometry_states = 2;
        cfg.favg_channels = 10;
        cfg.favg_samples = 2000;
    }
    std::vector<CheckResult> results = run_property_suite(cfg);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%-28s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-shot entanglement-assisted capacity toolkit"};
    app.require_subcommand(1);
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker threads for trial loops")->capture_default_str();

    auto* entropy = app.add_subcommand("entropy", "smoothed and closed-form entropies");
    std::string state_path, split_spec, kind = "hmin";
    double eps = 0.0, tol = 0.0;
    entropy->add_option("--state", state_path, "state JSON file")->required();
    entropy->add_option("--split", split_spec, "label split, e.g. A;B");
    entropy->add_option("--kind", kind, "hmin|hmax|vn|mi")->capture_default_str();
    entropy->add_option("--eps", eps, "smoothing radius")->capture_default_str();
    entropy->add_option("--tol", tol, "solver tolerance override");

    auto* bounds = app.add_subcommand("bounds", "one-shot capacity bounds");
    std::string channel_path, input_path, mode = "eaq", kappa_variant = "verbatim";
    bool optimize = false;
    int budget = 2000;
    std::uint64_t seed = 7;
    double beps = 1e-4;
    bounds->add_option("--channel", channel_path, "channel JSON file")->required();
    bounds->add_option("--mode", mode, "eaq|eac")->capture_default_str();
    bounds->add_option("--eps", beps, "error parameter")->required();
    bounds->add_option("--input", input_path, "fixed input state JSON");
    bounds->add_flag("--optimize", optimize, "optimize over channel inputs");
    bounds->add_option("--budget", budget, "optimizer evaluation budget")->capture_default_str();
    bounds->add_option("--seed", seed, "optimizer seed")->capture_default_str();
    bounds->add_option("--kappa-variant", kappa_variant, "verbatim|substituted")
        ->capture_default_str();

    auto* asym = app.add_subcommand("asymptotic", "asymptotic memoryless capacities");
    std::string a_channel;
    int a_budget = 4000;
    std::uint64_t a_seed = 7;
    asym->add_option("--channel", a_channel, "channel JSON file")->required();
    asym->add_option("--budget", a_budget, "optimizer evaluation budget")->capture_default_str();
    asym->add_option("--seed", a_seed, "optimizer seed")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep-n", "n-copy core-term sweep (CSV)");
    std::string s_channel, s_input;
    std::size_t nmax = 2;
    double s_eps = 0.1;
    sweep->add_option("--channel", s_channel, "channel JSON file")->required();
    sweep->add_option("--input", s_input, "input state JSON (default maximally mixed)");
    sweep->add_option("--nmax", nmax, "largest copy count")->capture_default_str();
    sweep->add_option("--eps", s_eps, "smoothing radius")->capture_default_str();

    auto* dec = app.add_subcommand("decouple", "decoupling experiment (CSV + JSON summary)");
    std::string d_channel, d_input;
    double d_eps = 0.05;
    int d_trials = 100;
    std::uint64_t d_seed = 11;
    std::size_t dim_a0 = 2, dim_a1 = 2;
    dec->add_option("--channel", d_channel, "channel JSON file")->required();
    dec->add_option("--input", d_input, "reference input state JSON (default maximally mixed)");
    dec->add_option("--eps", d_eps, "smoothing radius")->capture_default_str();
    dec->add_option("--trials", d_trials, "number of Haar encoders")->capture_default_str();
    dec->add_option("--seed", d_seed, "trial seed")->capture_default_str();
    dec->add_option("--dim-a0", dim_a0, "message dimension |A0|")->capture_default_str();
    dec->add_option("--dim-a1", dim_a1, "entanglement dimension |A1|")->capture_default_str();

    auto* check = app.add_subcommand("check", "property check suite");
    std::string suite = "appendix-a";
    std::uint64_t c_seed = 1;
    bool quick = false;
    check->add_option("--suite", suite, "appendix-a|entropy-properties|all")
        ->capture_default_str();
    check->add_option("--seed", c_seed, "battery seed")->capture_default_str();
    check->add_flag("--quick", quick, "reduced battery sizes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(entropy)) return run_entropy(state_path, split_spec, kind, eps, tol);
        if (app.got_subcommand(bounds))
            return run_bounds(channel_path, mode, beps, input_path, optimize, budget, seed,
                              kappa_variant);
        if (app.got_subcommand(asym)) return run_asymptotic(a_channel, a_budget, a_seed);
        if (app.got_subcommand(sweep)) return run_sweep(s_channel, s_input, nmax, s_eps);
        if (app.got_subcommand(dec))
            return run_decouple(d_channel, d_input, d_eps, d_trials, d_seed, dim_a0, dim_a1, jobs);
        if (app.got_subcommand(check)) return run_check(suite, c_seed, quick);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::length_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    }
    return 2;
}
