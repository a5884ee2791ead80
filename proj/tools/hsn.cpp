// hsn: command-line front end for the hybrid scattering library.
//
// Exit status: 0 on success, 1 when a requested check fails, 2 on bad input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsn/hsn.hpp"

namespace {

constexpr int kCheckFailed = 1;
constexpr int kBadInput = 2;

/// Writes to `path`, or stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw hsn::MissingFile("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

/// "gcn", "gcn:0.5", "wavelet:2", "lowpass:3", "diffusion:4", "chebyshev:1,-1,0.5".
hsn::SpectralFilter parse_filter(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto need = [&] {
        if (arg.empty()) throw hsn::ParseError("filter '" + spec + "' needs an argument");
        return hsn::detail::to_size(arg);
    };
    if (kind == "gcn") return hsn::SpectralFilter::gcn(arg.empty() ? 1.0 : hsn::detail::to_double(arg));
    if (kind == "wavelet") return hsn::SpectralFilter::wavelet(need());
    if (kind == "lowpass") return hsn::SpectralFilter::lowpass(need());
    if (kind == "diffusion") return hsn::SpectralFilter::diffusion(need());
    if (kind == "chebyshev") {
        if (arg.empty()) throw hsn::ParseError("chebyshev filter needs coefficients");
        return hsn::SpectralFilter::chebyshev(hsn::detail::to_list<double>(arg, hsn::detail::to_double));
    }
    throw hsn::ParseError("unknown filter '" + spec + "'");
}

struct TrainArgs {
    std::string graph, features, labels, splits, config, preset, out, attention_out;
    long long seed = -1;
};

int cmd_train(const TrainArgs& a) {
    hsn::ExperimentConfig cfg;
    if (!a.config.empty()) cfg = hsn::load_config(a.config);
    if (!a.preset.empty()) {
        const auto p = hsn::parse_preset(a.preset);
        if (a.config.empty() || p != cfg.model.preset) cfg.model = hsn::ModelConfig::defaults(p);
    }
    if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);

    const hsn::Dataset ds = hsn::load_dataset_files(a.graph, a.features, a.labels, a.splits);
    std::cerr << "loaded " << hsn::to_string(hsn::summarize(ds)) << '\n';
    const auto r = hsn::train_and_evaluate(ds, cfg.model, cfg.train);
    {
        Output out(a.out);
        hsn::write_metrics_csv(out.stream(), r.fit);
    }
    if (!r.attention.heads.empty()) {
        const std::string path = !a.attention_out.empty() ? a.attention_out
                                 : (a.out.empty() || a.out == "-") ? std::string("attention_ratios.csv")
                                 : (std::filesystem::path(a.out).parent_path() / "attention_ratios.csv").string();
        Output out(path);
        hsn::write_attention_ratios_csv(out.stream(), r.ratios);
    }
    std::cerr << "model=" << r.model << " epochs=" << r.fit.history.size() << " best_epoch=" << r.fit.best_epoch
              << " train_acc=" << r.train_accuracy << " val_acc=" << r.val_accuracy
              << " test_acc=" << r.test_accuracy << " seconds=" << r.seconds << '\n';
    return 0;
}

struct ScatterArgs {
    std::string graph, features, out, sigma = "abs";
    std::vector<std::string> paths;
    double q = 1.0;
    bool raw = false;
};

int cmd_scatter(const ScatterArgs& a) {
    const hsn::FeatureMatrix x = hsn::read_features_csv(a.features);
    const hsn::Graph g = hsn::read_edge_list(a.graph, x.rows());
    if (g.num_nodes() != x.rows()) {
        throw hsn::RowCountMismatch("graph has " + std::to_string(g.num_nodes()) + " nodes but features have " +
                                    std::to_string(x.rows()) + " rows");
    }
    std::vector<hsn::ScatteringPath> paths;
    std::size_t K = 0;
    for (const auto& p : a.paths) {
        paths.push_back(hsn::parse_path(p));
        K = std::max(K, paths.back().max_scale());
    }
    const hsn::Nonlinearity sigma = hsn::parse_nonlinearity(a.sigma);
    const hsn::Nonlinearity outer = a.q == 1.0 ? hsn::Nonlinearity::abs() : hsn::Nonlinearity::abs_pow(a.q);
    const hsn::WaveletBank bank(g, K);

    std::vector<hsn::Matrix> blocks;
    Output out(a.out);
    std::ostream& os = out.stream();
    os << "node";
    for (const auto& p : paths) {
        hsn::Matrix u = hsn::cascade(bank, p, sigma, x);
        if (!a.raw) u = outer.apply(std::move(u));
        for (std::size_t c = 0; c < x.cols(); ++c) os << ",U" << p.to_string() << "_" << c;
        blocks.push_back(std::move(u));
    }
    os << '\n' << std::setprecision(17);
    for (std::size_t v = 0; v < x.rows(); ++v) {
        os << v;
        for (const auto& b : blocks)
            for (std::size_t c = 0; c < b.cols(); ++c) os << ',' << b(v, c);
        os << '\n';
    }
    return 0;
}

struct SpectraArgs {
    std::string graph, out;
    std::vector<std::string> filters{"gcn", "wavelet:1", "wavelet:2", "wavelet:3", "lowpass:3"};
};

/// Measured responses, plus the closed forms the GCN derivation uses: the
/// first-order filter with the exact lambda_n and Chebyshev series with the
/// lambda_n ~ 2 approximation.
int cmd_spectra(const SpectraArgs& a) {
    const hsn::Graph g = hsn::read_edge_list(a.graph);
    const auto eig = hsn::eigendecompose(hsn::sym_normalized_laplacian(g));
    const double lmax = eig.eigenvalues.back();
    std::cerr << "lambda_max=" << std::setprecision(17) << lmax << '\n';

    std::vector<std::string> header{"index", "eigenvalue"};
    std::vector<std::vector<double>> columns;
    for (const auto& spec : a.filters) {
        const auto f = parse_filter(spec);
        header.push_back(spec);
        columns.push_back(hsn::spectral_response(g, f, eig));
        if (f.kind == hsn::SpectralFilter::Kind::GcnUnnormalized) {
            header.push_back(spec + "@exact_lambda_max");
            std::vector<double> c;
            for (double l : eig.eigenvalues) c.push_back(f.theta[0] * (2.0 - 2.0 * l / lmax));
            columns.push_back(std::move(c));
        } else if (f.kind == hsn::SpectralFilter::Kind::Chebyshev) {
            header.push_back(spec + "@lambda_max=2");
            std::vector<double> c;
            for (double l : eig.eigenvalues) c.push_back(hsn::chebyshev_series(l - 1.0, f.theta));
            columns.push_back(std::move(c));
        }
    }
    Output out(a.out);
    std::ostream& os = out.stream();
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
        os << i << ',' << eig.eigenvalues[i];
        for (const auto& c : columns) os << ',' << c[i];
        os << '\n';
    }
    return 0;
}

struct VerifyArgs {
    std::size_t draws = 100;
    std::size_t theta_draws = 20;
    std::uint64_t seed = 0;
};

int cmd_verify(const VerifyArgs& a) {
    const auto rows = hsn::theory_suite(a.draws, a.theta_draws, a.seed);
    std::size_t failed = 0;
    std::printf("%-14s %-40s %-6s %-12s %s\n", "group", "case", "result", "value", "detail");
    for (const auto& r : rows) {
        std::printf("%-14s %-40s %-6s %-12.4g %s\n", r.group.c_str(), r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.value, r.detail.c_str());
        failed += r.passed ? 0 : 1;
    }
    std::printf("%zu of %zu cases passed\n", rows.size() - failed, rows.size());
    return failed == 0 ? 0 : kCheckFailed;
}

struct SbmArgs {
    std::string blocks = "200,200", split = "5,1,1", out;
    double p_in = 0.1, p_out = 0.01, mean_scale = 1.0, noise = 1.0;
    std::size_t dim = 16;
    std::uint64_t seed = 0;
};

int cmd_gen_sbm(const SbmArgs& a) {
    hsn::SBMSpec spec;
    spec.block_sizes = hsn::detail::to_list<std::size_t>(a.blocks, hsn::detail::to_size);
    spec.split_ratio = hsn::detail::to_list<double>(a.split, hsn::detail::to_double);
    spec.p_in = a.p_in;
    spec.p_out = a.p_out;
    spec.mean_scale = a.mean_scale;
    spec.noise = a.noise;
    spec.feature_dim = a.dim;
    spec.seed = a.seed;
    const hsn::Dataset ds = hsn::generate_sbm(spec);
    hsn::save_dataset(ds, a.out);
    std::cout << "wrote " << a.out << ": " << hsn::to_string(hsn::summarize(ds)) << '\n';
    return 0;
}

int cmd_run(const std::string& config) {
    const auto cfg = hsn::load_config(config);
    const auto r = hsn::run_experiment(cfg);
    std::cout << "model=" << r.model << " " << hsn::to_string(r.data) << " test_acc=" << r.test_accuracy
              << " output=" << cfg.output << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid scattering graph networks: training, filters and theory checks"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train a model on a dataset given as separate files");
    t->add_option("--graph", train.graph, "Edge list (u v [w] per line)")->required()->check(CLI::ExistingFile);
    t->add_option("--features", train.features, "Feature CSV, one row per node")->required()->check(CLI::ExistingFile);
    t->add_option("--labels", train.labels, "Class ids, one per line")->required()->check(CLI::ExistingFile);
    t->add_option("--splits", train.splits, "JSON with train/val/test index arrays")->required()->check(CLI::ExistingFile);
    t->add_option("--config", train.config, "Config file supplying model.* and train.* keys")->check(CLI::ExistingFile);
    t->add_option("--preset", train.preset, "Model preset")->check(CLI::IsMember({"gcn-baseline", "sc-gcn", "gsan"}));
    t->add_option("--seed", train.seed, "Training seed (overrides the config)");
    t->add_option("--out", train.out, "Per-epoch metrics CSV (stdout when omitted)");
    t->add_option("--attention-out", train.attention_out,
                  "Attention ratio CSV for gsan (default: next to --out)");

    ScatterArgs scatter;
    auto* s = app.add_subcommand("scatter", "Emit scattering features |U_p X|^q for a list of paths");
    s->add_option("--graph", scatter.graph, "Edge list")->required()->check(CLI::ExistingFile);
    s->add_option("--features", scatter.features, "Feature CSV")->required()->check(CLI::ExistingFile);
    s->add_option("--path", scatter.paths, "Wavelet path such as \"1 3\" (repeatable)")->required();
    s->add_option("--sigma", scatter.sigma, "Nonlinearity between wavelets")->capture_default_str();
    s->add_option("--q", scatter.q, "Exponent of the outer |.|^q")->capture_default_str();
    s->add_flag("--raw", scatter.raw, "Skip the outer nonlinearity");
    s->add_option("--out", scatter.out, "Output CSV (stdout when omitted)");

    SpectraArgs spectra;
    auto* sp = app.add_subcommand("spectra", "Per-eigenvalue filter multipliers as CSV");
    sp->add_option("--graph", spectra.graph, "Edge list")->required()->check(CLI::ExistingFile);
    sp->add_option("--filter", spectra.filters,
                   "gcn[:theta], wavelet:k, lowpass:K, diffusion:t or chebyshev:t0,t1,... (repeatable)")
        ->capture_default_str();
    sp->add_option("--out", spectra.out, "Output CSV (stdout when omitted)");

    VerifyArgs verify;
    auto* v = app.add_subcommand("verify-theory", "Run the constructive discriminability fixture suite");
    v->add_option("--draws", verify.draws, "Random GCN weight draws per fixture")->capture_default_str();
    v->add_option("--theta-draws", verify.theta_draws, "Random invertible Theta draws per fixture")
        ->capture_default_str();
    v->add_option("--seed", verify.seed, "Seed for the random draws")->capture_default_str();

    SbmArgs sbm;
    auto* g = app.add_subcommand("gen-sbm", "Generate a stochastic block model dataset directory");
    g->add_option("--blocks", sbm.blocks, "Block sizes, comma separated")->capture_default_str();
    g->add_option("--p-in", sbm.p_in, "Edge probability inside a block")->capture_default_str();
    g->add_option("--p-out", sbm.p_out, "Edge probability across blocks")->capture_default_str();
    g->add_option("--dim", sbm.dim, "Feature dimension")->capture_default_str();
    g->add_option("--mean-scale", sbm.mean_scale, "Block mean magnitude")->capture_default_str();
    g->add_option("--noise", sbm.noise, "Feature noise standard deviation")->capture_default_str();
    g->add_option("--split", sbm.split, "train:val:test ratio, comma separated")->capture_default_str();
    g->add_option("--seed", sbm.seed, "Generator seed")->capture_default_str();
    g->add_option("--out", sbm.out, "Output directory")->required();

    std::string run_config;
    auto* r = app.add_subcommand("run", "Run an experiment described by a config file");
    r->add_option("--config", run_config, "Config file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kBadInput;
    }

    try {
        if (*t) return cmd_train(train);
        if (*s) return cmd_scatter(scatter);
        if (*sp) return cmd_spectra(spectra);
        if (*v) return cmd_verify(verify);
        if (*g) return cmd_gen_sbm(sbm);
        if (*r) return cmd_run(run_config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    }
    return kBadInput;
}
